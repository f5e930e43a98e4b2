#include "platsim/oracle.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "platsim/dynamics.hpp"
#include "platsim/matching.hpp"
#include "platsim/seeds.hpp"

namespace platsim::oracle {

Rational parse_rational(std::string_view text) {
  auto fail = [&] { return std::invalid_argument("not a rational number: '" + std::string(text) + "'"); };
  if (text.empty()) throw fail();
  auto parse_int = [&](std::string_view s) {
    std::int64_t v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || s.empty()) throw fail();
    return v;
  };
  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    const auto den = parse_int(text.substr(slash + 1));
    if (den == 0) throw fail();
    return Rational(parse_int(text.substr(0, slash)), den);
  }
  if (const auto dot = text.find('.'); dot != std::string_view::npos) {
    const bool negative = text.front() == '-';
    const auto whole_part = text.substr(negative ? 1 : 0, dot - (negative ? 1 : 0));
    const auto frac_part = text.substr(dot + 1);
    if (frac_part.size() > 15 || (whole_part.empty() && frac_part.empty())) throw fail();
    std::int64_t den = 1;
    for (std::size_t i = 0; i < frac_part.size(); ++i) den *= 10;
    const std::int64_t whole = whole_part.empty() ? 0 : parse_int(whole_part);
    const std::int64_t frac = frac_part.empty() ? 0 : parse_int(frac_part);
    if (whole < 0 || frac < 0) throw fail();
    Rational r = Rational(whole) + Rational(frac, den);
    return negative ? -r : r;
  }
  return Rational(parse_int(text));
}

std::string to_string(const Rational& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

double to_double(const Rational& r) { return boost::rational_cast<double>(r); }

ToyEconomy ToyEconomy::make(Rational m, Rational epsilon) {
  if (m <= Rational(0)) throw std::invalid_argument("toy economy: m must be > 0");
  if (epsilon <= Rational(0) || epsilon >= Rational(1, 8)) {
    throw std::invalid_argument("toy economy: epsilon must lie in (0, 1/8)");
  }
  return ToyEconomy{m, epsilon};
}

Rational ToyEconomy::seller_position(int s) const { return s == 0 ? Rational(-2) : Rational(0); }

Rational ToyEconomy::query_position(Group g) const {
  switch (g) {
    case Group::q11: return Rational(-2) + epsilon;
    case Group::q12: return Rational(-1) + epsilon;
    case Group::q2: break;
  }
  return Rational(1) + epsilon;
}

Rational ToyEconomy::distance(Group g, int s) const { return abs(query_position(g) - seller_position(s)); }

const char* to_string(ToyCase c) {
  switch (c) {
    case ToyCase::revenue_myopic: return "revenue_myopic";
    case ToyCase::revenue_rational_matching: return "revenue_rational_matching";
    case ToyCase::surplus_aware: return "surplus_aware";
    case ToyCase::ideal: return "ideal";
    case ToyCase::no_platform: break;
  }
  return "no_platform";
}

std::optional<ToyCase> parse_toy_case(std::string_view name) {
  for (auto c : {ToyCase::no_platform, ToyCase::revenue_myopic, ToyCase::revenue_rational_matching,
                 ToyCase::surplus_aware, ToyCase::ideal}) {
    if (name == to_string(c)) return c;
  }
  return std::nullopt;
}

Rational surplus_aware_threshold(const Rational& epsilon) {
  return Rational(1, 2) + 2 * epsilon / (1 + 2 * epsilon);
}

Rational ToyOutcome::seller_queries(int s) const {
  Rational n(0);
  for (int g = 0; g < kGroups; ++g) n += platform_tx[g][s] + world_tx[g][s];
  return n;
}

namespace {

constexpr std::array<Group, kGroups> kAllGroups{Group::q11, Group::q12, Group::q2};

std::array<bool, kAgents> profile_of(int mask) {
  std::array<bool, kAgents> on{};
  for (int i = 0; i < kAgents; ++i) on[i] = (mask >> i) & 1;
  return on;
}

bool both_sellers(int mask) { return (mask & 0b1100) == 0b1100; }

}  // namespace

ToyOutcome toy_outcome(const ToyEconomy& economy, const std::array<bool, kAgents>& on, const Routing& routing,
                       bool platform, const Rational& friction, bool everyone_known) {
  ToyOutcome o;
  for (int i = 0; i < kAgents; ++i) o.on[i] = platform && on[i];
  for (int round = 0; round <= 2; ++round) {
    for (auto& row : o.platform_tx) row = {};
    for (auto& row : o.world_tx) row = {};
    o.buyer_gross = {};

    for (Group g : kAllGroups) {
      const int gi = static_cast<int>(g);
      const int b = ToyEconomy::buyer_of(g);
      const Rational count = economy.group_size(g);

      std::optional<int> world_best;
      Rational world_u(0);
      for (int s = 0; s < 2; ++s) {
        if (!(everyone_known || ToyEconomy::knows(b, s)) || o.bankrupt[s]) continue;
        const Rational u = economy.utility(g, s);
        if (!world_best || u > world_u) {
          world_best = s;
          world_u = u;
        }
      }
      std::optional<int> world_candidate;
      Rational uw(0);
      if (world_best && world_u > friction) {
        world_candidate = world_best;
        uw = world_u - friction;
      }

      std::vector<std::pair<std::optional<int>, Rational>> portions;
      const std::array<bool, 2> avail{o.on[2] && !o.bankrupt[0], o.on[3] && !o.bankrupt[1]};
      if (o.on[b] && (avail[0] || avail[1])) {
        if (avail[0] && avail[1] && routing.to_s1) {
          const Rational x = (*routing.to_s1)[gi];
          if (x < Rational(0) || x > count) throw std::invalid_argument("routing: diverted mass outside [0, group size]");
          portions.push_back({0, x});
          portions.push_back({1, count - x});
        } else {
          int best = avail[0] ? 0 : 1;
          if (avail[0] && avail[1] && economy.utility(g, 1) > economy.utility(g, 0)) best = 1;
          portions.push_back({best, count});
        }
      } else {
        portions.push_back({std::nullopt, count});
      }

      for (const auto& [seller, n] : portions) {
        if (n == Rational(0)) continue;
        const Rational up = seller ? economy.utility(g, *seller) : Rational(0);
        if (seller && up >= uw && up > Rational(0)) {
          o.platform_tx[gi][*seller] += n;
          o.buyer_gross[b] += n * up;
        } else if (world_candidate && uw > Rational(0)) {
          o.world_tx[gi][*world_candidate] += n;
          o.buyer_gross[b] += n * uw;
        }
      }
    }

    bool changed = false;
    for (int s = 0; s < 2; ++s) {
      o.seller_gross[s] = o.seller_queries(s) - economy.m;
      if (!o.on[2 + s] && !o.bankrupt[s] && o.seller_gross[s] < Rational(0)) {
        o.bankrupt[s] = true;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return o;
}

Rational decision_value(const ToyOutcome& outcome, const ToyFees& fees, int agent) {
  if (agent < 2) return outcome.buyer_gross[agent] - (outcome.on[agent] ? fees.buyer : Rational(0));
  const int s = agent - 2;
  if (outcome.bankrupt[s]) return Rational(0);
  const Rational v = outcome.seller_gross[s] - (outcome.on[agent] ? fees.seller : Rational(0));
  return outcome.on[agent] ? v : std::max(v, Rational(0));
}

namespace {

struct Evaluator {
  const ToyEconomy& economy;
  ToyCase which;
  std::optional<Rational> alpha;

  EquilibriumResult result(const ToyOutcome& o, const ToyFees& fees, const Routing& routing) const {
    EquilibriumResult r;
    r.which = which;
    r.platform = true;
    r.fees = fees;
    r.routing = routing;
    r.outcome = o;
    r.alpha = alpha;
    Rational on_surplus(0);
    for (int i = 0; i < kAgents; ++i) {
      const Rational v = decision_value(o, fees, i);
      if (i < 2) {
        r.buyer_surplus[i] = v;
      } else {
        r.seller_surplus[i - 2] = v;
      }
      if (o.on[i]) {
        r.revenue += i < 2 ? fees.buyer : fees.seller;
        on_surplus += v;
      }
    }
    r.welfare = r.buyer_surplus[0] + r.buyer_surplus[1] + r.seller_surplus[0] + r.seller_surplus[1] + r.revenue;
    r.objective = r.revenue + (which == ToyCase::surplus_aware ? *alpha * on_surplus : Rational(0));
    return r;
  }
};

bool is_equilibrium(const std::array<ToyOutcome, 16>& outcomes, int mask, const ToyFees& fees) {
  for (int i = 0; i < kAgents; ++i) {
    if (decision_value(outcomes[mask ^ (1 << i)], fees, i) > decision_value(outcomes[mask], fees, i)) return false;
  }
  return true;
}

// Strict preference: objective, then welfare, then lower fees.
bool better(const EquilibriumResult& a, const EquilibriumResult& b) {
  if (a.objective != b.objective) return a.objective > b.objective;
  if (a.welfare != b.welfare) return a.welfare > b.welfare;
  if (a.fees.buyer != b.fees.buyer) return a.fees.buyer < b.fees.buyer;
  return a.fees.seller < b.fees.seller;
}

std::array<ToyOutcome, 16> all_outcomes(const ToyEconomy& economy, const Routing& routing,
                                        const std::array<ToyOutcome, 16>* myopic) {
  std::array<ToyOutcome, 16> out;
  for (int mask = 0; mask < 16; ++mask) {
    if (myopic && !both_sellers(mask)) {
      out[mask] = (*myopic)[mask];
    } else {
      out[mask] = toy_outcome(economy, profile_of(mask), routing);
    }
  }
  return out;
}

// Fee levels at which some agent of `side` is indifferent between its two
// options in profile `mask`, plus zero.
std::vector<Rational> boundary_fees(const std::array<ToyOutcome, 16>& outcomes, int mask, int first_agent) {
  std::vector<Rational> out{Rational(0)};
  const ToyFees none;
  for (int i = first_agent; i < first_agent + 2; ++i) {
    const int with = mask | (1 << i);
    const int without = mask & ~(1 << i);
    const Rational gain = decision_value(outcomes[with], none, i) - decision_value(outcomes[without], none, i);
    if (gain > Rational(0) && std::find(out.begin(), out.end(), gain) == out.end()) out.push_back(gain);
  }
  std::sort(out.begin(), out.end());
  return out;
}

EquilibriumResult no_platform_result(const ToyEconomy& economy, ToyCase which) {
  const bool ideal = which == ToyCase::ideal;
  EquilibriumResult r;
  r.which = which;
  r.platform = false;
  r.outcome = toy_outcome(economy, {}, Routing{}, false, ideal ? Rational(0) : Rational(1), ideal);
  for (int i = 0; i < kAgents; ++i) {
    const Rational v = decision_value(r.outcome, ToyFees{}, i);
    if (i < 2) {
      r.buyer_surplus[i] = v;
    } else {
      r.seller_surplus[i - 2] = v;
    }
  }
  r.welfare = r.buyer_surplus[0] + r.buyer_surplus[1] + r.seller_surplus[0] + r.seller_surplus[1];
  return r;
}

}  // namespace

std::vector<int> follower_equilibria(const ToyEconomy& economy, const ToyFees& fees, const Routing& routing) {
  const auto outcomes = all_outcomes(economy, routing, nullptr);
  std::vector<int> out;
  for (int mask = 0; mask < 16; ++mask) {
    if (is_equilibrium(outcomes, mask, fees)) out.push_back(mask);
  }
  return out;
}

std::optional<EquilibriumResult> follower_equilibrium(const ToyEconomy& economy, const ToyFees& fees) {
  const Routing myopic;
  const auto outcomes = all_outcomes(economy, myopic, nullptr);
  const Evaluator eval{economy, ToyCase::revenue_myopic, std::nullopt};
  std::optional<EquilibriumResult> best;
  for (int mask = 0; mask < 16; ++mask) {
    if (!is_equilibrium(outcomes, mask, fees)) continue;
    auto r = eval.result(outcomes[mask], fees, myopic);
    if (!best || better(r, *best)) best = std::move(r);
  }
  return best;
}

EquilibriumResult solve_case(const ToyEconomy& economy, ToyCase which, std::optional<Rational> alpha) {
  if (which == ToyCase::no_platform || which == ToyCase::ideal) return no_platform_result(economy, which);
  if (which == ToyCase::surplus_aware) {
    const Rational threshold = surplus_aware_threshold(economy.epsilon);
    if (!alpha || *alpha <= threshold || *alpha >= Rational(1)) {
      throw std::invalid_argument("surplus_aware: alpha must lie in (" + to_string(threshold) + ", 1); threshold = " +
                                  std::to_string(to_double(threshold)));
    }
  } else {
    alpha.reset();
  }

  const Evaluator eval{economy, which, alpha};
  std::vector<Routing> routings{Routing{}};
  if (which == ToyCase::revenue_rational_matching) {
    for (int i = 0; i <= 64; ++i) {
      for (int j = 0; j <= 64; ++j) {
        routings.push_back(Routing{std::array<Rational, kGroups>{economy.m * Rational(i, 64),
                                                                  economy.m * Rational(j, 64), Rational(0)}});
      }
    }
  }

  const auto myopic_outcomes = all_outcomes(economy, routings.front(), nullptr);
  std::optional<EquilibriumResult> best;
  for (std::size_t k = 0; k < routings.size(); ++k) {
    const auto outcomes = k == 0 ? myopic_outcomes : all_outcomes(economy, routings[k], &myopic_outcomes);
    for (int mask = 0; mask < 16; ++mask) {
      // Routing only matters when both sellers are on the platform.
      if (k > 0 && !both_sellers(mask)) continue;
      for (const Rational& pb : boundary_fees(outcomes, mask, 0)) {
        for (const Rational& ps : boundary_fees(outcomes, mask, 2)) {
          const ToyFees fees{pb, ps};
          if (!is_equilibrium(outcomes, mask, fees)) continue;
          auto r = eval.result(outcomes[mask], fees, routings[k]);
          if (!best || better(r, *best)) best = std::move(r);
        }
      }
    }
  }
  if (!best) throw std::logic_error("solve_case: no follower equilibrium among the candidates");
  return *best;
}

namespace {

struct EngineToy {
  Market market;
  int m = 0;
};

EngineToy engine_toy(const ToyEconomy& economy, bool everyone_known) {
  if (economy.m.denominator() != 1 || economy.m.numerator() > 1'000'000) {
    throw std::invalid_argument("engine replay needs an integer m <= 10^6");
  }
  EngineToy toy;
  toy.m = static_cast<int>(economy.m.numerator());
  const Rational width = 3 + economy.epsilon;
  // Maps the line [-2, 1+eps] onto [0, 1]; the kernel slope undoes the scaling.
  auto point = [&](const Rational& x) { return LatentPoint{to_double((x + 2) / width), 1.0}; };
  toy.market.kernel = UtilityKernel::linear(2.0, to_double(width));
  for (int s = 0; s < 2; ++s) {
    SellerSpec spec;
    spec.id = s;
    spec.location = point(economy.seller_position(s));
    spec.cost_fraction = 0.0;
    spec.shutdown_threshold = 1;
    spec.fixed_cost = static_cast<double>(toy.m);
    toy.market.sellers.push_back(spec);
  }
  for (int b = 0; b < 2; ++b) {
    BuyerSpec spec;
    spec.id = b;
    spec.epoch_budget = 2.0 * toy.m;
    for (int s = 0; s < 2; ++s) {
      if (everyone_known || ToyEconomy::knows(b, s)) spec.known_sellers.push_back(s);
    }
    for (Group g : kAllGroups) {
      if (ToyEconomy::buyer_of(g) != b) continue;
      const int n = static_cast<int>(economy.group_size(g).numerator());
      spec.scripted_queries.insert(spec.scripted_queries.end(), static_cast<std::size_t>(n),
                                   point(economy.query_position(g)));
    }
    spec.location = spec.scripted_queries.front();
    toy.market.buyers.push_back(spec);
  }
  toy.market.validate();
  return toy;
}

std::vector<std::vector<std::optional<AgentId>>> scripted_routes(const ToyEconomy& economy, const Routing& routing) {
  std::vector<std::vector<std::optional<AgentId>>> routes(2);
  for (Group g : kAllGroups) {
    const auto size = economy.group_size(g);
    const Rational x = (*routing.to_s1)[static_cast<int>(g)];
    if (x.denominator() != 1) throw std::invalid_argument("engine replay needs integral routing counts");
    auto& r = routes[static_cast<std::size_t>(ToyEconomy::buyer_of(g))];
    for (std::int64_t n = 0; n < size.numerator(); ++n) r.push_back(n < x.numerator() ? 0 : 1);
  }
  return routes;
}

EpochLedger engine_epoch(const EngineToy& toy, const ToyEconomy& economy, const std::array<bool, kAgents>& on,
                         const std::array<bool, 2>& bankrupt, const EquilibriumResult& eq, double friction) {
  MarketState state = MarketState::initial(toy.market);
  for (int b = 0; b < 2; ++b) state.buyers[static_cast<std::size_t>(b)].on_platform = eq.platform && on[b];
  for (int s = 0; s < 2; ++s) {
    state.sellers[static_cast<std::size_t>(s)].on_platform = eq.platform && on[2 + s];
    state.sellers[static_cast<std::size_t>(s)].bankrupt = bankrupt[s];
  }
  StrategyMatcher myopic(MatchingStrategy::myopic());
  std::optional<ScriptedMatcher> scripted;
  MatchingPolicy* policy = nullptr;
  if (eq.platform) {
    if (eq.routing.myopic()) {
      policy = &myopic;
    } else {
      scripted.emplace(scripted_routes(economy, eq.routing));
      policy = &*scripted;
    }
  }
  const FeeSchedule fees{to_double(eq.fees.buyer), to_double(eq.fees.seller), 0.0};
  Rng unused(0);
  return run_epoch(toy.market, state, {1, fees, friction, 4 * toy.m}, policy, unused);
}

double engine_value(const EpochLedger& ledger, int agent) {
  if (agent < 2) return ledger.buyers[static_cast<std::size_t>(agent)].surplus();
  const auto& s = ledger.sellers[static_cast<std::size_t>(agent - 2)];
  if (!s.active) return 0.0;
  return s.on_platform ? s.surplus() : std::max(s.surplus(), 0.0);
}

const char* agent_name(int agent) {
  static constexpr const char* names[] = {"B1", "B2", "S1", "S2"};
  return names[agent];
}

}  // namespace

EngineReport verify_against_engine(const ToyEconomy& economy, ToyCase which, std::optional<Rational> alpha,
                                   double tolerance) {
  const EquilibriumResult eq = solve_case(economy, which, alpha);
  const bool ideal = which == ToyCase::ideal;
  const EngineToy toy = engine_toy(economy, ideal);
  const double friction = ideal ? 0.0 : 1.0;
  const double scale = to_double(economy.m);

  EngineReport report;
  report.which = which;
  auto check = [&](std::string quantity, const Rational& expected, double actual) {
    EngineCheck c{std::move(quantity), to_double(expected), actual, 0.0};
    c.error = std::abs(c.actual - c.expected) / std::max(std::abs(c.expected), scale);
    report.max_error = std::max(report.max_error, c.error);
    if (c.error > tolerance && report.ok) {
      report.ok = false;
      char buf[256];
      std::snprintf(buf, sizeof buf, "%s: oracle %.17g, engine %.17g", c.quantity.c_str(), c.expected, c.actual);
      report.first_divergence = buf;
    }
    report.checks.push_back(std::move(c));
  };

  const EpochLedger ledger = engine_epoch(toy, economy, eq.outcome.on, eq.outcome.bankrupt, eq, friction);
  const EpochTotals totals = epoch_totals(ledger);
  for (int b = 0; b < 2; ++b) {
    check(std::string(agent_name(b)) + " surplus", eq.buyer_surplus[b], ledger.buyers[static_cast<std::size_t>(b)].surplus());
  }
  for (int s = 0; s < 2; ++s) {
    const auto& e = ledger.sellers[static_cast<std::size_t>(s)];
    check(std::string(agent_name(2 + s)) + " surplus", eq.seller_surplus[s], e.active ? e.surplus() : 0.0);
    check(std::string(agent_name(2 + s)) + " queries", eq.outcome.seller_queries(s),
          static_cast<double>(e.platform_tx + e.world_tx));
  }
  check("revenue", eq.revenue, totals.platform_revenue);
  check("welfare", eq.welfare, totals.welfare);

  if (eq.platform) {
    for (int i = 0; i < kAgents; ++i) {
      auto flipped = eq.outcome.on;
      flipped[i] = !flipped[i];
      const ToyOutcome dev = toy_outcome(economy, flipped, eq.routing);
      auto pre_bankrupt = dev.bankrupt;
      if (i >= 2) pre_bankrupt[i - 2] = false;
      const EpochLedger dev_ledger = engine_epoch(toy, economy, flipped, pre_bankrupt, eq, friction);
      const Rational dev_value = decision_value(dev, eq.fees, i);
      check(std::string(agent_name(i)) + " flipped", dev_value, engine_value(dev_ledger, i));
      const Rational eq_value = decision_value(eq.outcome, eq.fees, i);
      if (dev_value > eq_value && report.ok) {
        report.ok = false;
        report.first_divergence = std::string(agent_name(i)) + " gains by flipping its subscription";
      }
    }
  }
  return report;
}

namespace {

std::string num(const Rational& r) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", to_double(r));
  return buf;
}

std::string multiple_of_m(const Rational& count, const Rational& m) {
  const Rational k = count / m;
  if (k == Rational(1)) return "m";
  return to_string(k) + "m";
}

std::string matches(const EquilibriumResult& r, int buyer) {
  static constexpr const char* group_names[] = {"Q11", "Q12", "Q2"};
  std::vector<std::pair<std::string, std::string>> parts;  // destination -> groups
  for (Group g : kAllGroups) {
    if (ToyEconomy::buyer_of(g) != buyer) continue;
    const int gi = static_cast<int>(g);
    std::string dest;
    for (int s = 0; s < 2; ++s) {
      if (r.outcome.platform_tx[gi][s] + r.outcome.world_tx[gi][s] > Rational(0)) {
        dest += dest.empty() ? "" : "+";
        dest += s == 0 ? "S1" : "S2";
      }
    }
    if (dest.empty()) continue;
    auto it = std::find_if(parts.begin(), parts.end(), [&](const auto& p) { return p.first == dest; });
    if (it == parts.end()) {
      parts.push_back({dest, group_names[gi]});
    } else {
      it->second += std::string(",") + group_names[gi];
    }
  }
  if (parts.empty()) return "None";
  std::string out;
  for (const auto& [dest, groups] : parts) out += (out.empty() ? "" : "; ") + groups + "->" + dest;
  return out;
}

}  // namespace

std::string format_report(const ToyEconomy& economy, const Rational& alpha) {
  const std::array<EquilibriumResult, 5> r{
      solve_case(economy, ToyCase::no_platform), solve_case(economy, ToyCase::revenue_myopic),
      solve_case(economy, ToyCase::revenue_rational_matching), solve_case(economy, ToyCase::surplus_aware, alpha),
      solve_case(economy, ToyCase::ideal)};
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"", "No platform", "Revenue-maximizing", "Rational matching",
                  "Surplus-aware (" + num(alpha) + ")", "Ideal"});
  auto row = [&](const std::string& label, auto cell) {
    std::vector<std::string> v{label};
    for (const auto& c : r) v.push_back(cell(c));
    rows.push_back(std::move(v));
  };
  row("Welfare", [](const auto& c) { return num(c.welfare); });
  for (int b = 0; b < 2; ++b) {
    const std::string name = agent_name(b);
    row(name + " surplus", [b](const auto& c) { return num(c.buyer_surplus[b]); });
    row(name + " matches", [b](const auto& c) { return matches(c, b); });
  }
  for (int s = 0; s < 2; ++s) {
    const std::string name = agent_name(2 + s);
    row(name + " surplus", [s](const auto& c) { return num(c.seller_surplus[s]); });
    row(name + " state", [&, s](const auto& c) {
      return c.outcome.bankrupt[s] ? std::string("bankrupt")
                                   : multiple_of_m(c.outcome.seller_queries(s), economy.m) + " queries";
    });
  }
  row("Revenue", [](const auto& c) { return num(c.revenue); });
  row("Fees", [](const auto& c) {
    if (c.which == ToyCase::no_platform) return std::string("N/A");
    return "P_B=" + num(c.fees.buyer) + ", P_S=" + num(c.fees.seller);
  });

  std::vector<std::size_t> width(rows.front().size(), 0);
  for (const auto& v : rows) {
    for (std::size_t i = 0; i < v.size(); ++i) width[i] = std::max(width[i], v[i].size());
  }
  std::ostringstream out;
  out << "m = " << to_string(economy.m) << ", epsilon = " << to_string(economy.epsilon) << "\n";
  for (const auto& v : rows) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      out << v[i] << std::string(width[i] - v[i].size() + (i + 1 < v.size() ? 2 : 0), ' ');
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace platsim::oracle
