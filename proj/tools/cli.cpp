#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>

#include <CLI11.hpp>

#include "platsim/config.hpp"
#include "platsim/optimizer.hpp"
#include "platsim/oracle.hpp"
#include "platsim/protocol.hpp"
#include "platsim/run_log.hpp"
#include "platsim/server.hpp"
#include "report.hpp"

namespace platsim::cli {

namespace fs = std::filesystem;

namespace {

// Usage and configuration problems; exit code 2.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
  return out;
}

double parse_number(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw std::invalid_argument("policy: " + key + " expects a number, got '" + text + "'");
  return v;
}

}  // namespace

Stat summarize(std::span<const double> values) {
  Stat s;
  s.n = static_cast<int>(values.size());
  if (s.n == 0) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / s.n;
  if (s.n < 2) return s;
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.se = std::sqrt(ss / (s.n - 1)) / std::sqrt(static_cast<double>(s.n));
  return s;
}

EnvConfig apply_case(EnvConfig config, const std::string& name) {
  if (name == "no_platform") {
    config.platform_enabled = false;
    return config;
  }
  const auto kind = parse_regime_kind(name);
  if (!kind) throw std::invalid_argument("unknown case '" + name + "' (allowed: " + join(case_names()) + ")");
  config.platform_enabled = true;
  config.regime.kind = *kind;
  return config;
}

PolicySpec parse_policy(const std::string& text) {
  PolicySpec spec;
  if (text == "grid-optimal") {
    spec.source = PolicySource::grid_optimal;
    return spec;
  }
  if (text == "external-server") {
    spec.source = PolicySource::external_server;
    return spec;
  }
  if (text != "fixed" && text.rfind("fixed:", 0) != 0) {
    throw std::invalid_argument("unknown policy '" + text + "' (allowed: fixed[:k=v,...], grid-optimal, external-server)");
  }
  if (text == "fixed") return spec;
  FeeSchedule fees;
  bool any_fee = false;
  std::optional<MatchingRule> rule;
  std::optional<double> eta;
  std::stringstream items(text.substr(6));
  std::string item;
  while (std::getline(items, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("policy: expected key=value, got '" + item + "'");
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    if (key == "P_B") {
      fees.buyer_subscription = parse_number(key, value);
      any_fee = true;
    } else if (key == "P_S") {
      fees.seller_subscription = parse_number(key, value);
      any_fee = true;
    } else if (key == "P_R") {
      fees.referral_rate = parse_number(key, value);
      any_fee = true;
    } else if (key == "rule") {
      if (value == "seller_aware") {
        rule = MatchingRule::seller_aware;
      } else if (value == "profit_driven") {
        rule = MatchingRule::profit_driven;
      } else {
        throw std::invalid_argument("policy: rule must be seller_aware or profit_driven");
      }
    } else if (key == "eta") {
      eta = parse_number(key, value);
    } else {
      throw std::invalid_argument("policy: unknown key '" + key + "' (allowed: P_B, P_S, P_R, rule, eta)");
    }
  }
  if (any_fee) spec.fixed.fees = fees;
  if (rule || eta) {
    MatchingStrategy s;
    if (rule) s.rule = *rule;
    if (eta) {
      const double tick = std::round(*eta * 10.0);
      if (std::abs(*eta * 10.0 - tick) > 1e-9 || tick < 0 || tick > 10) {
        throw std::invalid_argument("policy: eta must be one of 0, 0.1, ..., 1");
      }
      s.threshold_tick = static_cast<int>(tick);
    }
    spec.fixed.strategy = s;
  }
  return spec;
}

int fixed_action(EnvConfig& config, const FixedPolicy& policy) {
  if (config.mode == EnvMode::fee_setting) {
    if (policy.strategy) config.fixed_strategy = *policy.strategy;
    const FeeSchedule fees = policy.fees ? *policy.fees
                             : config.regime.kind == RegimeKind::fee_freeze ? config.regime.frozen
                                                                            : config.fixed_fees;
    const PlatformEnv env(config);
    FeeTicks ticks;
    try {
      ticks = fee_ticks(fees);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(std::string("policy: ") + e.what());
    }
    const int action = env.fee_action_index(ticks);
    if (action < 0) throw std::invalid_argument("policy: fees are not admitted by the " +
                                                std::string(to_string(config.regime.kind)) + " regime");
    return action;
  }
  if (policy.fees) config.fixed_fees = *policy.fees;
  return policy.strategy ? policy.strategy->action() : config.fixed_strategy.action();
}

namespace {

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string case_name;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "JSON config file");
  cmd->add_option("--set", c.overrides, "dotted-path override, e.g. market.rho=0.3")->allow_extra_args(false);
  cmd->add_option("--case", c.case_name, "intervention case: " + join(case_names()));
}

EnvConfig resolve(const Common& c) {
  EnvConfig config;
  try {
    if (!c.config_path.empty()) config = load_config(c.config_path);
    config = apply_overrides(config, c.overrides);
    if (!c.case_name.empty()) config = apply_case(config, c.case_name);
    config.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return config;
}

struct ServeTarget {
  bool tcp = false;
  std::uint16_t port = 0;
};

ServeTarget parse_serve(const std::string& text) {
  if (text == "stdio") return {};
  if (text.rfind("tcp:", 0) == 0) {
    const std::string p = text.substr(4);
    char* end = nullptr;
    const long port = std::strtol(p.c_str(), &end, 10);
    if (!p.empty() && *end == '\0' && port >= 0 && port <= 65535) return {true, static_cast<std::uint16_t>(port)};
  }
  throw UsageError("--serve expects stdio or tcp:PORT, got '" + text + "'");
}

int serve(const EnvConfig& config, const Common& common, const std::string& target, std::ostream& err) {
  SessionOptions options;
  options.default_config = config;
  if (!common.config_path.empty()) options.config_dir = fs::path(common.config_path).parent_path();
  if (options.config_dir.empty()) options.config_dir = ".";
  const ServeTarget t = parse_serve(target);
  if (!t.tcp) {
    serve_stream(std::cin, std::cout, options);
    return 0;
  }
  TcpServer server(options, t.port);
  err << "listening on 127.0.0.1:" << server.port() << std::endl;
  server.run();
  return 0;
}

Objective objective_for(const RegulationRegime& regime) {
  if (regime.kind == RegimeKind::surplus_aware) return {ObjectiveKind::surplus_aware, regime.alpha};
  return {};
}

constexpr int kSelectionSeeds = 8;
constexpr std::uint64_t kSelectionSeedOffset = 1'000'000;

// Best constant action on seeds disjoint from the run's.
int grid_optimal_action(const EnvConfig& config, std::uint64_t seed, std::ostream& out) {
  const auto seeds = seed_range(seed + kSelectionSeedOffset, kSelectionSeeds);
  if (config.mode == EnvMode::fee_setting) {
    if (!config.platform_enabled) return 0;
    EnvConfig one = config;
    one.epochs = 1;
    if (config.shock.enabled) one.shock.constant_friction = config.shock.base_friction;
    one.shock.enabled = false;
    const auto r = optimize_fees(one, objective_for(config.regime), SearchOptions{}, seeds);
    out << "grid-optimal fees: P_B=" << r.fees.buyer_subscription << " P_S=" << r.fees.seller_subscription
        << " P_R=" << r.fees.referral_rate << " (" << r.evaluations << " evaluations)\n";
    return PlatformEnv(config).fee_action_index(r.ticks);
  }
  int best = 0;
  double best_value = 0.0;
  for (int a = 0; a < kMatchingActionCount; ++a) {
    double total = 0.0;
    for (auto s : seeds) total += run_episode(config, constant_policy(a), s).discounted_return(config.discount);
    if (a == 0 || total > best_value) {
      best = a;
      best_value = total;
    }
  }
  const auto s = MatchingStrategy::from_action(best);
  out << "grid-optimal strategy: rule=" << to_string(s.rule) << " eta=" << s.threshold() << "\n";
  return best;
}

struct EpisodeSummary {
  std::uint64_t seed = 0;
  std::string run_id;
  double ret = 0.0;
  double discounted = 0.0;
  double buyer = 0.0;
  double seller = 0.0;
  double revenue = 0.0;
  double tax = 0.0;
  double welfare = 0.0;
  int bankrupt = 0;
};

struct RunArgs {
  Common common;
  std::uint64_t seed = 0;
  int episodes = 1;
  int workers = 1;
  std::string out_dir;
  std::string policy = "fixed";
  std::string serve;
};

int cmd_run(const RunArgs& a, std::ostream& out, std::ostream& err) {
  EnvConfig config = resolve(a.common);
  PolicySpec policy;
  try {
    policy = parse_policy(a.policy);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (policy.source == PolicySource::external_server) {
    if (a.serve.empty()) throw UsageError("--policy external-server needs --serve stdio|tcp:PORT");
    return serve(config, a.common, a.serve, err);
  }
  if (a.out_dir.empty()) throw UsageError("run: --out is required");
  if (a.episodes < 0) throw UsageError("run: --episodes must be >= 0");
  int action = 0;
  if (policy.source == PolicySource::fixed) {
    try {
      action = fixed_action(config, policy.fixed);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  } else {
    action = grid_optimal_action(config, a.seed, out);
  }

  const fs::path root(a.out_dir);
  std::error_code ec;
  fs::create_directories(root / "runs", ec);
  if (ec) throw RunLogError(root.string() + ": " + ec.message());
  save_config(config, root / "config.json");

  std::vector<EpisodeSummary> rows(static_cast<std::size_t>(a.episodes));
  parallel_for(a.episodes, a.workers, [&](int i) {
    const std::uint64_t seed = a.seed + static_cast<std::uint64_t>(i);
    const EpisodeRecord rec = run_episode(config, constant_policy(action), seed);
    EpisodeSummary s;
    s.seed = seed;
    s.run_id = log_run(rec, config, root / "runs");
    for (double r : rec.rewards) s.ret += r;
    s.discounted = rec.discounted_return(config.discount);
    for (std::size_t k = 1; k < rec.epochs.size(); ++k) {
      const auto& w = rec.epochs[k].welfare;
      s.buyer += w.buyer_surplus;
      s.seller += w.seller_surplus;
      s.revenue += w.revenue;
      s.tax += w.tax;
      s.welfare += w.welfare;
    }
    for (bool b : rec.epochs.back().seller_bankrupt) s.bankrupt += b;
    rows[static_cast<std::size_t>(i)] = s;
  });

  std::ofstream summary(root / "summary.csv", std::ios::binary);
  if (!summary) throw RunLogError((root / "summary.csv").string() + ": cannot open for writing");
  summary << "seed,run_id,return,discounted_return,buyer_surplus,seller_surplus,platform_revenue,tax,welfare,"
             "sellers_bankrupt\n";
  std::vector<double> returns;
  for (const auto& s : rows) {
    summary << s.seed << ',' << s.run_id << ',' << protocol::format_double(s.ret) << ','
            << protocol::format_double(s.discounted) << ',' << protocol::format_double(s.buyer) << ','
            << protocol::format_double(s.seller) << ',' << protocol::format_double(s.revenue) << ','
            << protocol::format_double(s.tax) << ',' << protocol::format_double(s.welfare) << ',' << s.bankrupt
            << '\n';
    returns.push_back(s.ret);
  }
  summary.close();
  if (!summary) throw RunLogError((root / "summary.csv").string() + ": write failed");
  const Stat st = summarize(returns);
  char buf[128];
  std::snprintf(buf, sizeof buf, "%d episodes, mean return %.4f (%.4f)\n", a.episodes, st.mean, st.se);
  out << buf << "logs: " << (root / "runs").string() << "\n";
  return 0;
}

int cmd_oracle(const std::string& m_text, const std::string& eps_text, const std::string& alpha_text,
               std::ostream& out) {
  oracle::ToyEconomy economy;
  oracle::Rational alpha;
  try {
    economy = oracle::ToyEconomy::make(oracle::parse_rational(m_text), oracle::parse_rational(eps_text));
    const auto threshold = oracle::surplus_aware_threshold(economy.epsilon);
    if (alpha_text.empty()) {
      alpha = (threshold + oracle::Rational(1)) / oracle::Rational(2);
      out << "alpha not given; using " << oracle::to_string(alpha) << " (valid range: " << oracle::to_string(threshold)
          << " < alpha < 1)\n";
    } else {
      alpha = oracle::parse_rational(alpha_text);
      if (!(alpha > threshold && alpha < oracle::Rational(1))) {
        throw std::invalid_argument("alpha must lie in (" + oracle::to_string(threshold) + ", 1); threshold = 1/2 + " +
                                    "2*epsilon/(1+2*epsilon) = " + oracle::to_string(threshold));
      }
    }
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  out << oracle::format_report(economy, alpha);
  return 0;
}

struct SweepArgs {
  Common common;
  std::string kind = "value_of_platform";
  int seeds = 10;
  int workers = 1;
  std::string out_dir;
  std::vector<double> rho;
  std::vector<double> mu;
  std::string method = "exhaustive";
  int budget = 0;
  std::uint64_t seed = 0;
};

int cmd_sweep(const SweepArgs& a, std::ostream& out) {
  const EnvConfig config = resolve(a.common);
  if (a.out_dir.empty()) throw UsageError("sweep: --out is required");
  if (a.seeds < 1) throw UsageError("sweep: --seeds must be >= 1");
  const fs::path root(a.out_dir);
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw RunLogError(root.string() + ": " + ec.message());
  save_config(config, root / "config.json");
  auto fmt = [](double v) { return protocol::format_double(v); };

  if (a.kind == "value_of_platform") {
    SearchOptions search;
    if (a.method == "bo") {
      search = SearchOptions::bo_preset(a.seed);
    } else {
      const auto m = parse_search_method(a.method);
      if (!m) throw UsageError("sweep: unknown method '" + a.method + "' (allowed: exhaustive, random_then_local, bo)");
      search.method = *m;
      search.budget = a.budget;
      search.seed = a.seed;
    }
    // Default: the two one-dimensional curves.
    std::vector<std::pair<std::string, std::pair<std::vector<double>, std::vector<double>>>> curves;
    if (a.rho.empty() && a.mu.empty()) {
      curves.push_back({"rho", {{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}, {0.6}}});
      curves.push_back({"mu", {{0.2}, {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2, 1.3}}});
    } else {
      curves.push_back({"grid", {a.rho.empty() ? std::vector<double>{config.market.rho} : a.rho,
                                 a.mu.empty() ? std::vector<double>{config.shock.constant_friction} : a.mu}});
    }
    std::ofstream f(root / "value_of_platform.csv", std::ios::binary);
    if (!f) throw RunLogError((root / "value_of_platform.csv").string() + ": cannot open for writing");
    f << "curve,rho,mu,ideal_welfare,no_platform_welfare,platform_welfare,no_platform_normalized,"
         "platform_normalized,no_platform_surplus_normalized,platform_surplus_normalized,platform_revenue,P_B,P_S,"
         "P_R\n";
    for (const auto& [name, grid] : curves) {
      const auto rows = sweep_value_of_platform(config, config.market.structure, grid.first, grid.second, a.seeds,
                                                search, a.workers);
      for (const auto& r : rows) {
        f << name << ',' << fmt(r.rho) << ',' << fmt(r.mu) << ',' << fmt(r.ideal_welfare) << ','
          << fmt(r.no_platform_welfare) << ',' << fmt(r.platform_welfare) << ',' << fmt(r.no_platform_normalized)
          << ',' << fmt(r.platform_normalized) << ',' << fmt(r.no_platform_surplus_normalized) << ','
          << fmt(r.platform_surplus_normalized) << ',' << fmt(r.platform_revenue) << ','
          << fmt(r.platform_fees.buyer_subscription) << ',' << fmt(r.platform_fees.seller_subscription) << ','
          << fmt(r.platform_fees.referral_rate) << '\n';
        char buf[160];
        std::snprintf(buf, sizeof buf, "rho=%.2f mu=%.2f  no-platform %.4f  platform %.4f\n", r.rho, r.mu,
                      r.no_platform_normalized, r.platform_normalized);
        out << buf;
      }
    }
    return 0;
  }
  if (a.kind == "matching_strategies") {
    if (config.regime.kind != RegimeKind::fee_freeze) {
      throw UsageError("sweep matching_strategies needs the fee_freeze case");
    }
    EnvConfig c = config;
    c.mode = EnvMode::matching;
    const auto rows = sweep_matching_strategies(c, a.seeds, {}, a.seed, a.workers);
    std::ofstream f(root / "matching_strategies.csv", std::ios::binary);
    if (!f) throw RunLogError((root / "matching_strategies.csv").string() + ": cannot open for writing");
    f << "action,rule,eta,welfare,revenue,tax,bankrupt_fraction,bankrupt_core,bankrupt_niche,bankrupt_cheap,"
         "bankrupt_other\n";
    for (const auto& r : rows) {
      auto cls = [&](SellerClass k) {
        auto it = r.bankrupt_by_class.find(k);
        return it == r.bankrupt_by_class.end() ? std::string() : fmt(it->second);
      };
      f << r.strategy.action() << ',' << to_string(r.strategy.rule) << ',' << fmt(r.strategy.threshold()) << ','
        << fmt(r.welfare) << ',' << fmt(r.revenue) << ',' << fmt(r.tax) << ',' << fmt(r.bankrupt_fraction) << ','
        << cls(SellerClass::core) << ',' << cls(SellerClass::niche) << ',' << cls(SellerClass::cheap) << ','
        << cls(SellerClass::other) << '\n';
    }
    out << rows.size() << " strategies written to " << (root / "matching_strategies.csv").string() << "\n";
    return 0;
  }
  throw UsageError("sweep: unknown kind '" + a.kind + "' (allowed: value_of_platform, matching_strategies)");
}

}  // namespace

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"platsim: two-sided market simulator"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "run seeded episodes and write logs");
  add_common(run_cmd, run.common);
  run_cmd->add_option("--seed", run.seed, "first episode seed");
  run_cmd->add_option("--episodes", run.episodes, "number of episodes");
  run_cmd->add_option("--workers", run.workers, "worker threads");
  run_cmd->add_option("--out", run.out_dir, "output directory");
  run_cmd->add_option("--policy", run.policy, "fixed[:P_B=..,P_S=..,P_R=..,rule=..,eta=..] | grid-optimal | external-server");
  run_cmd->add_option("--serve", run.serve, "stdio | tcp:PORT (external-server policy)");

  std::vector<std::string> report_dirs;
  std::string report_kind;
  std::string report_out;
  auto* report_cmd = app.add_subcommand("report", "aggregate run logs");
  report_cmd->add_option("run_dirs", report_dirs, "run output directories")->required();
  report_cmd->add_option("--kind", report_kind, "welfare_by_stage | fees_by_stage | agents_by_stage | bankruptcy_by_class")
      ->required();
  report_cmd->add_option("--out", report_out, "directory for table and CSV files");

  std::string m_text = "1";
  std::string eps_text = "1/100";
  std::string alpha_text;
  auto* oracle_cmd = app.add_subcommand("oracle", "exact equilibria of the two-buyer, two-seller economy");
  oracle_cmd->add_option("--m", m_text, "query mass per group");
  oracle_cmd->add_option("--epsilon", eps_text, "offset, 0 < epsilon < 1/8");
  oracle_cmd->add_option("--alpha", alpha_text, "surplus weight of the surplus-aware platform");

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "value-of-platform or matching-strategy sweeps");
  add_common(sweep_cmd, sweep.common);
  sweep_cmd->add_option("--kind", sweep.kind, "value_of_platform | matching_strategies");
  sweep_cmd->add_option("--seeds", sweep.seeds, "seeds per point");
  sweep_cmd->add_option("--seed", sweep.seed, "search / seed base");
  sweep_cmd->add_option("--workers", sweep.workers, "worker threads");
  sweep_cmd->add_option("--out", sweep.out_dir, "output directory");
  sweep_cmd->add_option("--rho", sweep.rho, "knowledge densities")->delimiter(',');
  sweep_cmd->add_option("--mu", sweep.mu, "world frictions")->delimiter(',');
  sweep_cmd->add_option("--method", sweep.method, "exhaustive | random_then_local | bo");
  sweep_cmd->add_option("--budget", sweep.budget, "evaluations for random_then_local");

  Common serve_common;
  std::string serve_target = "stdio";
  auto* serve_cmd = app.add_subcommand("serve", "expose environments over the line protocol");
  add_common(serve_cmd, serve_common);
  serve_cmd->add_option("--serve", serve_target, "stdio | tcp:PORT");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
      return 0;
    }
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    for (const auto* name : {&run.common.case_name, &sweep.common.case_name, &serve_common.case_name}) {
      if (name->empty()) continue;
      bool known = false;
      for (const auto& c : case_names()) known = known || c == *name;
      if (!known) throw UsageError("unknown case '" + *name + "' (allowed: " + join(case_names()) + ")");
    }
    if (run_cmd->parsed()) return cmd_run(run, out, err);
    if (report_cmd->parsed()) {
      const auto kind = parse_report_kind(report_kind);
      if (!kind) {
        throw UsageError("unknown report kind '" + report_kind +
                         "' (allowed: welfare_by_stage, fees_by_stage, agents_by_stage, bankruptcy_by_class)");
      }
      std::vector<fs::path> dirs(report_dirs.begin(), report_dirs.end());
      std::optional<fs::path> out_dir;
      if (!report_out.empty()) out_dir = report_out;
      try {
        write_report(*kind, dirs, out_dir, out);
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      return 0;
    }
    if (oracle_cmd->parsed()) return cmd_oracle(m_text, eps_text, alpha_text, out);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep, out);
    if (serve_cmd->parsed()) return serve(resolve(serve_common), serve_common, serve_target, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace platsim::cli
