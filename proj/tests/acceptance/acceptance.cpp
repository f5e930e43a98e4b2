// Acceptance checks. One PASS/FAIL line per criterion; exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "platsim/config.hpp"
#include "platsim/market_gen.hpp"
#include "platsim/matching.hpp"
#include "platsim/optimizer.hpp"
#include "platsim/oracle.hpp"
#include "platsim/platform_env.hpp"
#include "platsim/protocol.hpp"
#include "platsim/server.hpp"
#include "platsim/session.hpp"
#include "platsim/subscription.hpp"
#include "support/protocol_gen.hpp"

using namespace platsim;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;

  void fail(const std::string& why) {
    if (ok) detail = why;
    ok = false;
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// ---------------------------------------------------------------------------

Outcome oracle_exactness() {
  using namespace oracle;
  Outcome out;
  const auto start = Clock::now();
  const Rational alpha(7, 10);
  const std::pair<Rational, Rational> points[] = {
      {Rational(1), Rational(1, 100)}, {Rational(100), Rational(1, 100)}, {Rational(7), Rational(1, 16)}};
  for (const auto& [m, eps] : points) {
    const auto e = ToyEconomy::make(m, eps);
    const ToyCase cases[] = {ToyCase::no_platform, ToyCase::revenue_myopic, ToyCase::revenue_rational_matching,
                             ToyCase::surplus_aware, ToyCase::ideal};
    const Rational welfare[] = {eps * m, Rational(6) * m, (Rational(7) - 4 * eps) * m, (Rational(7) - 2 * eps) * m,
                                (Rational(7) - 2 * eps) * m};
    const Rational revenue[] = {Rational(0), (Rational(5) + 2 * eps) * m, (Rational(6) - 4 * eps) * m,
                                (Rational(4) - 4 * eps) * m, Rational(0)};
    const std::optional<ToyFees> fees[] = {std::nullopt,
                                           ToyFees{(Rational(1) + eps) * m, Rational(3) * m},
                                           ToyFees{(Rational(2) - 2 * eps) * m, m},
                                           ToyFees{(Rational(2) - 2 * eps) * m, Rational(0)},
                                           ToyFees{Rational(0), Rational(0)}};
    for (int i = 0; i < 5; ++i) {
      const auto r = solve_case(e, cases[i], cases[i] == ToyCase::surplus_aware ? std::optional(alpha) : std::nullopt);
      const std::string where = std::string(to_string(cases[i])) + " at m=" + to_string(m) + ", eps=" + to_string(eps);
      if (r.welfare != welfare[i]) out.fail(where + ": welfare " + to_string(r.welfare));
      if (r.revenue != revenue[i]) out.fail(where + ": revenue " + to_string(r.revenue));
      if (fees[i] && r.fees != *fees[i]) {
        out.fail(where + ": fees " + to_string(r.fees.buyer) + ", " + to_string(r.fees.seller));
      }
      if (!fees[i] && r.platform) out.fail(where + ": platform present");
    }
  }
  const double t = seconds_since(start);
  if (t >= 1.0) out.fail(fmt("took %.3f s", t));
  if (out.ok) out.detail = fmt("15 cells exact, %.3f s", t);
  return out;
}

Outcome engine_agreement() {
  using namespace oracle;
  Outcome out;
  const auto start = Clock::now();
  double worst = 0.0;
  const std::pair<Rational, Rational> points[] = {
      {Rational(1), Rational(1, 100)}, {Rational(100), Rational(1, 100)}, {Rational(7), Rational(1, 16)}};
  for (const auto& [m, eps] : points) {
    const auto e = ToyEconomy::make(m, eps);
    for (auto c : {ToyCase::no_platform, ToyCase::revenue_myopic, ToyCase::revenue_rational_matching,
                   ToyCase::surplus_aware}) {
      const auto rep =
          verify_against_engine(e, c, c == ToyCase::surplus_aware ? std::optional(Rational(7, 10)) : std::nullopt);
      worst = std::max(worst, rep.max_error);
      if (!rep.ok || rep.max_error > 1e-9) {
        out.fail(std::string(to_string(c)) + " at m=" + to_string(m) + ": " + rep.first_divergence);
      }
    }
  }
  const double t = seconds_since(start);
  if (t >= 5.0) out.fail(fmt("took %.3f s", t));
  if (out.ok) out.detail = fmt("max relative error %.2e, %.3f s", worst, t);
  return out;
}

Outcome welfare_identity() {
  Outcome out;
  const auto start = Clock::now();
  const RegulationRegime regimes[] = {RegulationRegime::laissez_faire(), RegulationRegime::tax(TaxCategory::referrals),
                                      RegulationRegime::tax(TaxCategory::all_seller_fees, 0.35),
                                      RegulationRegime::surplus_aware(), RegulationRegime::fee_cap(),
                                      RegulationRegime::fee_freeze()};
  double worst = 0.0;
  long epochs = 0;
  for (int i = 0; i < 1000; ++i) {
    EnvConfig c;
    c.market.n_buyers = 10;
    c.market.n_sellers = 10;
    c.epochs = 12;
    c.mode = i % 2 == 0 ? EnvMode::fee_setting : EnvMode::matching;
    c.regime = regimes[i % 6];
    if (c.mode == EnvMode::matching && c.regime.kind == RegimeKind::fee_cap) c.regime = RegulationRegime::laissez_faire();
    PlatformEnv probe(c);
    const auto ep = run_episode(c, random_policy(1000 + i, probe.action_count()), static_cast<std::uint64_t>(i));
    for (const auto& rec : ep.epochs) {
      const auto& l = rec.ledger;
      const auto& w = rec.welfare;
      // agent-level route
      double agents = 0.0;
      for (const auto& b : l.buyers) agents += b.surplus();
      for (const auto& s : l.sellers) agents += s.surplus();
      // transaction-level route: fees are transfers, fixed costs are not
      double tx = l.revenue.referrals;
      for (const auto& t : l.transactions) tx += t.buyer_surplus + t.seller_surplus;
      for (const auto& s : l.sellers) tx -= s.fixed_cost;
      const double lhs = w.buyer_surplus + w.seller_surplus + (w.revenue - w.tax) + w.tax;
      const double errs[] = {std::abs(lhs - w.welfare), std::abs(agents + l.revenue.total() - w.welfare),
                             std::abs(tx - w.welfare), std::abs(w.buyer_surplus + w.seller_surplus - agents)};
      for (double e : errs) worst = std::max(worst, e);
      if (errs[0] > 1e-9 || errs[1] > 1e-9 || errs[2] > 1e-9 || errs[3] > 1e-9) {
        out.fail(fmt("episode %.0f epoch %.0f: error %.3e", i, l.epoch, std::max({errs[0], errs[1], errs[2], errs[3]})));
      }
      ++epochs;
    }
  }
  if (out.ok) out.detail = fmt("%.0f epochs, max error %.2e, %.1f s", static_cast<double>(epochs), worst, seconds_since(start));
  return out;
}

Outcome myopic_equivalence() {
  Outcome out;
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  long queries = 0;
  long mismatches = 0;
  for (int k = 0; k < 100; ++k) {
    EnvConfig c;
    c.market.n_buyers = 10;
    c.market.n_sellers = 10;
    c.market.rho = 0.1 + 0.8 * unif(rng);
    c.market.structure = static_cast<StructureKind>(k % 3);
    const Market market = sample_env_market(c, SeedSet::from_root(static_cast<std::uint64_t>(k)));
    for (int q = 0; q < 1000; ++q) {
      const LatentPoint query{unif(rng), unif(rng)};
      std::vector<AgentId> candidates;
      for (const auto& s : market.sellers) {
        if (unif(rng) < 0.7) candidates.push_back(s.id);
      }
      SellerPlatformSurplusTracker tracker(market.sellers.size());
      for (const auto& s : market.sellers) tracker.set(s.id, 2.0 * unif(rng) - 1.0);
      const FeeSchedule fees{2.0 * unif(rng), 2.0 * unif(rng), 0.1 * unif(rng)};
      const MatchingStrategy strategy{q % 2 == 0 ? MatchingRule::seller_aware : MatchingRule::profit_driven, 10};
      const auto a = recommend(query, market.sellers, candidates, strategy, tracker, fees, market.kernel);
      const auto b = myopic(query, market.sellers, candidates, market.kernel);
      if (a != b) ++mismatches;
      ++queries;
    }
  }
  if (mismatches > 0) out.fail(fmt("%.0f of %.0f queries differ", static_cast<double>(mismatches), static_cast<double>(queries)));
  if (out.ok) out.detail = fmt("%.0f queries over 100 markets, 0 mismatches", static_cast<double>(queries));
  return out;
}

Outcome platform_value_trends() {
  Outcome out;
  const auto start = Clock::now();
  EnvConfig base;
  base.market.n_buyers = 5;
  base.market.n_sellers = 5;
  const std::vector<double> rhos{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::vector<double> mus;
  for (int i = 1; i <= 13; ++i) mus.push_back(i / 10.0);
  const std::vector<double> mu_fixed{0.6};
  const std::vector<double> rho_fixed{0.2};
  const auto by_rho = sweep_value_of_platform(base, base.market.structure, rhos, mu_fixed, 10);
  const auto by_mu = sweep_value_of_platform(base, base.market.structure, rho_fixed, mus, 10);

  auto inversions = [](const std::vector<PlatformValueRow>& rows, bool increasing) {
    int n = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const double d = rows[i].no_platform_normalized - rows[i - 1].no_platform_normalized;
      if (increasing ? d < 0.0 : d > 0.0) ++n;
    }
    return n;
  };
  const int inv_rho = inversions(by_rho, true);
  const int inv_mu = inversions(by_mu, false);
  if (inv_rho > 1) out.fail(fmt("no-platform welfare has %.0f inversions in rho", inv_rho));
  if (inv_mu > 1) out.fail(fmt("no-platform welfare has %.0f inversions in mu", inv_mu));
  double margin = 1e300;
  for (const auto* rows : {&by_rho, &by_mu}) {
    for (const auto& r : *rows) {
      margin = std::min(margin, r.platform_welfare - r.no_platform_welfare);
      if (r.platform_welfare < r.no_platform_welfare) {
        out.fail(fmt("platform welfare %.4f below no-platform %.4f at rho=%.1f", r.platform_welfare,
                     r.no_platform_welfare, r.rho) +
                 fmt(", mu=%.1f", r.mu));
      }
    }
  }
  const double t = seconds_since(start);
  if (t >= 600.0) out.fail(fmt("took %.1f s", t));
  if (out.ok) {
    out.detail = fmt("inversions rho %.0f, mu %.0f; min platform margin %.4f", inv_rho, inv_mu, margin) +
                 fmt("; %.1f s", t);
  }
  return out;
}

Outcome shock_statistics() {
  Outcome out;
  const ShockParams p;
  const double expected = 0.9 * std::exp(0.125);
  double sum = 0.0;
  long n = 0;
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    const auto s = sample_shock_schedule(12, p.pre, p.post, 0.8, 1.0, p.base_friction, seed);
    if (s.intensity < 0.8 || s.intensity > 1.0) out.fail(fmt("intensity %.4f out of range", s.intensity));
    for (int k = 0; k < s.epochs(); ++k) {
      if (s.stages[k] == ShockStage::shock) {
        sum += s.frictions[k];
        ++n;
      } else if (s.frictions[k] != 0.1) {
        out.fail(fmt("seed %.0f epoch %.0f: pre/post friction %.17g", static_cast<double>(seed), k, s.frictions[k]));
      }
    }
  }
  const double mean = n ? sum / static_cast<double>(n) : 0.0;
  const double rel = std::abs(mean - expected) / expected;
  if (n == 0 || rel > 0.05) out.fail(fmt("shock mean %.4f vs %.4f", mean, expected));
  if (out.ok) out.detail = fmt("shock mean %.4f vs %.4f (%.2f%%)", mean, expected, 100.0 * rel);
  return out;
}

Outcome logit_inertia() {
  Outcome out;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unif(-5.0, 5.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = unif(rng);
    if (subscribe_probability({x, x}, {}) != 0.5) out.fail(fmt("p != 0.5 at equal surplus %.4f", x));
    // an inertia bonus enters the logit like extra surplus on its side
    const double bonus = std::abs(unif(rng));
    const double a = subscribe_probability({x, x}, {bonus, 0.0});
    const double b = subscribe_probability({x, x + bonus}, {});
    const double c = subscribe_probability({x, x}, {0.0, bonus});
    const double d = subscribe_probability({x + bonus, x}, {});
    if (std::abs(a - b) > 1e-12 || std::abs(c - d) > 1e-12) out.fail(fmt("bonus at %.4f: %.3e", bonus, std::abs(a - b)));
    const double w = unif(rng);
    const double p = unif(rng);
    const double shift = 100.0 * unif(rng);
    const double base = subscribe_probability({w, p}, {});
    const double moved = subscribe_probability({w + shift, p + shift}, {});
    if (std::abs(base - moved) > 1e-12) out.fail(fmt("shift %.3f changes p by %.3e", shift, std::abs(base - moved)));
    // closed form
    const double expect = 1.0 / (1.0 + std::exp(w - p));
    if (std::abs(base - expect) > 1e-12) out.fail(fmt("logit %.17g vs %.17g", base, expect));
  }
  // stay on, leave, stay off, join
  for (int chi = 1; chi <= 6; ++chi) {
    if (update_inertia(chi, true) != chi + 1) out.fail("stay-on branch");
    if (update_inertia(chi, false) != -1) out.fail("leave branch");
    if (update_inertia(-chi, false) != -chi - 1) out.fail("stay-off branch");
    if (update_inertia(-chi, true) != 1) out.fail("join branch");
  }
  if (out.ok) out.detail = "equal-surplus, shift invariance, closed form and four inertia branches";
  return out;
}

Outcome protocol_round_trip() {
  using namespace protocol;
  Outcome out;
  test::MessageGenerator gen(2024);
  for (int i = 0; i < 10000; ++i) {
    const Message m = gen.next();
    const std::string line = serialize(m);
    try {
      const Message back = parse(line);
      if (!(back == m) || serialize(back) != line) {
        out.fail("round trip changed: " + line.substr(0, 120));
        break;
      }
    } catch (const std::exception& e) {
      out.fail(std::string("parse failed: ") + e.what());
      break;
    }
  }

  SessionOptions options;
  options.default_config.market.n_buyers = 6;
  options.default_config.market.n_sellers = 6;
  options.default_config.timesteps = 60;
  TcpServer server(options, 0);
  std::thread thread([&] { server.run(); });
  int episodes = 0;
  try {
    LineClient client("127.0.0.1", server.port());
    auto send = [&](const Message& m) { return parse(client.request(serialize(m))); };
    if (!std::holds_alternative<Ready>(send(Hello{}))) out.fail("hello not answered with ready");
    for (std::uint64_t seed = 0; seed < 50 && out.ok; ++seed) {
      const EnvMode mode = seed % 2 == 0 ? EnvMode::fee_setting : EnvMode::matching;
      EnvConfig c = options.default_config;
      c.mode = mode;
      PlatformEnv local(c);
      const Observation first = local.reset(seed);
      const auto ready = send(Reset{"default", seed, mode});
      if (!std::holds_alternative<Ready>(ready) || std::get<Ready>(ready).observation != first.values) {
        out.fail(fmt("seed %.0f: reset differs", static_cast<double>(seed)));
        break;
      }
      const auto policy = random_policy(seed + 7, local.action_count());
      Observation obs = first;
      while (!local.done()) {
        const int action = policy(obs);
        const StepResult r = local.step(action);
        const auto remote = send(Step{action});
        const auto* st = std::get_if<State>(&remote);
        if (!st || st->info.ledger_digest != hex64(r.ledger_digest) ||
            st->info.ledger_digest != hex64(ledger_digest(local.record().epochs.back().ledger)) ||
            st->observation != r.observation.values || st->reward != r.reward || st->done != r.done) {
          out.fail(fmt("seed %.0f: step diverges at epoch %.0f", static_cast<double>(seed),
                       static_cast<double>(local.record().epochs.size() - 1)));
          break;
        }
        obs = r.observation;
      }
      ++episodes;
    }
    client.send(serialize(Close{}));
  } catch (const std::exception& e) {
    out.fail(std::string("transport: ") + e.what());
  }
  server.stop();
  thread.join();
  if (out.ok) out.detail = fmt("10000 messages; %.0f remote episodes match in-process ledgers", episodes);
  return out;
}

Outcome tax_neutrality() {
  Outcome out;
  int reward_differs = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    EnvConfig lf;
    lf.market.n_buyers = 6;
    lf.market.n_sellers = 6;
    lf.timesteps = 60;
    lf.mode = seed % 2 == 0 ? EnvMode::fee_setting : EnvMode::matching;
    EnvConfig zero = lf;
    zero.regime = RegulationRegime::tax(TaxCategory::referrals, 0.0);
    EnvConfig taxed = lf;
    taxed.regime = RegulationRegime::tax(TaxCategory::referrals, 0.2);
    PlatformEnv probe(lf);
    // the policy keeps its own stream, so each run gets a fresh copy
    const auto a = run_episode(zero, random_policy(seed, probe.action_count()), seed);
    const auto b = run_episode(taxed, random_policy(seed, probe.action_count()), seed);
    if (a.epochs.size() != b.epochs.size()) {
      out.fail("episode lengths differ");
      break;
    }
    bool differs = false;
    for (std::size_t k = 0; k < a.epochs.size(); ++k) {
      if (!(a.epochs[k].ledger == b.epochs[k].ledger)) {
        out.fail(fmt("seed %.0f epoch %.0f: ledgers differ", static_cast<double>(seed), static_cast<double>(k)));
      }
      const double expect = 0.2 * a.epochs[k].ledger.revenue.referrals;
      if (std::abs(b.epochs[k].reward.tax - expect) > 1e-12 * std::max(1.0, expect)) {
        out.fail(fmt("seed %.0f: tax %.6f vs %.6f", static_cast<double>(seed), b.epochs[k].reward.tax, expect));
      }
      if (a.epochs[k].reward.total != b.epochs[k].reward.total) differs = true;
    }
    if (a.observations != b.observations) out.fail(fmt("seed %.0f: observations differ", static_cast<double>(seed)));
    reward_differs += differs;
  }
  if (reward_differs == 0) out.fail("the tax never changed a reward");
  if (out.ok) out.detail = fmt("100 seeds identical ledgers; reward differs in %.0f", reward_differs);
  return out;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> checks{
      {"oracle exactness", oracle_exactness},
      {"engine-oracle agreement", engine_agreement},
      {"welfare identity", welfare_identity},
      {"myopic equivalence", myopic_equivalence},
      {"value-of-platform trends", platform_value_trends},
      {"shock-schedule statistics", shock_statistics},
      {"logit and inertia", logit_inertia},
      {"protocol round trip", protocol_round_trip},
      {"tax neutrality", tax_neutrality},
  };
  int failed = 0;
  for (const auto& [name, run] : checks) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.fail(std::string("threw: ") + e.what());
    }
    std::printf("%s  %s: %s\n", o.ok ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
    failed += !o.ok;
  }
  return failed == 0 ? 0 : 1;
}
