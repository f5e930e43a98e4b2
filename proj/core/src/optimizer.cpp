#include "platsim/optimizer.hpp"

#include <algorithm>
#include <exception>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace platsim {

const char* to_string(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::welfare: return "welfare";
    case ObjectiveKind::surplus_aware: return "surplus_aware";
    case ObjectiveKind::revenue: break;
  }
  return "revenue";
}

std::optional<ObjectiveKind> parse_objective_kind(std::string_view name) {
  for (auto k : {ObjectiveKind::revenue, ObjectiveKind::welfare, ObjectiveKind::surplus_aware}) {
    if (name == to_string(k)) return k;
  }
  return std::nullopt;
}

const char* to_string(SearchMethod method) {
  return method == SearchMethod::random_then_local ? "random_then_local" : "exhaustive";
}

std::optional<SearchMethod> parse_search_method(std::string_view name) {
  if (name == "exhaustive") return SearchMethod::exhaustive;
  if (name == "random_then_local") return SearchMethod::random_then_local;
  return std::nullopt;
}

SearchOptions SearchOptions::bo_preset(std::uint64_t seed) {
  return {SearchMethod::random_then_local, 64, 10, seed};
}

void parallel_for(int n, int workers, const std::function<void(int)>& body) {
  if (workers <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr error;
  std::mutex mu;
  std::vector<std::thread> threads;
  const int w = std::min(workers, n);
  for (int k = 0; k < w; ++k) {
    threads.emplace_back([&, k] {
      for (int i = k; i < n; i += w) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

SearchResult grid_search(std::span<const FeeTicks> grid, const std::function<double(int)>& evaluate,
                         const SearchOptions& options) {
  SearchResult r;
  const int n = static_cast<int>(grid.size());
  if (n == 0) throw std::invalid_argument("grid_search: empty grid");
  const int budget = options.budget <= 0 || options.budget > n ? n : options.budget;

  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::vector<double> values(static_cast<std::size_t>(n), 0.0);
  auto visit = [&](int i) {
    if (seen[static_cast<std::size_t>(i)] || static_cast<int>(r.trace.size()) >= budget) return;
    seen[static_cast<std::size_t>(i)] = 1;
    values[static_cast<std::size_t>(i)] = evaluate(i);
    r.trace.push_back({i, values[static_cast<std::size_t>(i)]});
  };

  if (options.method == SearchMethod::exhaustive) {
    for (int i = 0; i < budget; ++i) visit(i);
  } else {
    std::vector<int> lookup(static_cast<std::size_t>(kSubscriptionTicks) * kSubscriptionTicks * kReferralTicks, -1);
    auto key = [](int b, int s, int p) {
      return static_cast<std::size_t>((b * kSubscriptionTicks + s) * kReferralTicks + p);
    };
    for (int i = 0; i < n; ++i) lookup[key(grid[i].buyer, grid[i].seller, grid[i].referral)] = i;
    auto neighbour = [&](const FeeTicks& t, int axis, int step) {
      FeeTicks u = t;
      (axis == 0 ? u.buyer : axis == 1 ? u.seller : u.referral) += step;
      if (u.buyer < 0 || u.seller < 0 || u.referral < 0 || u.buyer >= kSubscriptionTicks ||
          u.seller >= kSubscriptionTicks || u.referral >= kReferralTicks) {
        return -1;
      }
      return lookup[key(u.buyer, u.seller, u.referral)];
    };

    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    Rng rng(options.seed);
    std::shuffle(order.begin(), order.end(), rng);
    std::size_t next = 0;
    auto fresh = [&]() {
      while (next < order.size() && seen[static_cast<std::size_t>(order[next])]) ++next;
      return next < order.size() ? order[next] : -1;
    };

    const int initial = std::clamp(options.initial, 1, budget);
    for (int k = 0; k < initial; ++k) visit(fresh());
    auto better = [&](int a, int b) {
      return values[static_cast<std::size_t>(a)] > values[static_cast<std::size_t>(b)] ||
             (values[static_cast<std::size_t>(a)] == values[static_cast<std::size_t>(b)] && a < b);
    };
    int current = r.trace.front().index;
    for (const auto& e : r.trace) {
      if (better(e.index, current)) current = e.index;
    }
    while (static_cast<int>(r.trace.size()) < budget) {
      int step_to = -1;
      for (int axis = 0; axis < 3; ++axis) {
        for (int step : {-1, 1}) {
          const int j = neighbour(grid[static_cast<std::size_t>(current)], axis, step);
          if (j < 0) continue;
          visit(j);
          if (!seen[static_cast<std::size_t>(j)]) continue;
          if (better(j, current) && (step_to < 0 || better(j, step_to))) step_to = j;
        }
      }
      if (step_to >= 0) {
        current = step_to;
        continue;
      }
      const int restart = fresh();
      if (restart < 0) break;
      visit(restart);
      current = restart;
    }
  }

  r.best = r.trace.front().index;
  for (const auto& e : r.trace) {
    const double v = values[static_cast<std::size_t>(e.index)];
    const double b = values[static_cast<std::size_t>(r.best)];
    if (v > b || (v == b && e.index < r.best)) r.best = e.index;
  }
  r.value = values[static_cast<std::size_t>(r.best)];
  return r;
}

double objective_value(const EpochLedger& ledger, const RegulationRegime& regime, const Objective& objective) {
  const double tax = tax_amount(ledger.revenue, regime);
  switch (objective.kind) {
    case ObjectiveKind::welfare: return epoch_totals(ledger).welfare;
    case ObjectiveKind::surplus_aware:
      return ledger.revenue.total() - tax + objective.alpha * platform_side_surplus(ledger);
    case ObjectiveKind::revenue: break;
  }
  return ledger.revenue.total() - tax;
}

FeeEvaluator::FeeEvaluator(const EnvConfig& config, Objective objective, std::vector<std::uint64_t> seeds)
    : config_(config), objective_(objective) {
  config_.validate();
  if (config_.mode != EnvMode::fee_setting) throw std::invalid_argument("fee evaluation needs fee-setting mode");
  if (config_.epochs != 1) throw std::invalid_argument("fee evaluation needs a single-epoch configuration");
  if (seeds.empty()) throw std::invalid_argument("fee evaluation needs at least one seed");
  cached_ = !config_.platform_enabled || config_.fixed_strategy.is_myopic();
  seeds_.reserve(seeds.size());
  for (auto seed : seeds) {
    SeedEnv s{PlatformEnv(config_), {}};
    s.env.reset(seed);
    seeds_.push_back(std::move(s));
  }
}

std::size_t FeeEvaluator::profiles_simulated() const {
  std::size_t n = 0;
  for (const auto& s : seeds_) n += s.profiles.size();
  return n;
}

FeeMetrics FeeEvaluator::metrics(const ProfileOutcome& p, const FeeSchedule& fees) const {
  RevenueBreakdown revenue{p.buyers_on * fees.buyer_subscription, p.sellers_on * fees.seller_subscription,
                           fees.referral_rate * p.referral_base};
  FeeMetrics m;
  m.revenue = revenue.total();
  m.tax = tax_amount(revenue, config_.regime);
  m.welfare = p.welfare;
  m.surplus = p.welfare - m.revenue;
  m.platform_side_surplus = p.platform_gross - m.revenue;
  m.buyers_on = p.buyers_on;
  m.sellers_on = p.sellers_on;
  switch (objective_.kind) {
    case ObjectiveKind::welfare: m.objective = m.welfare; break;
    case ObjectiveKind::surplus_aware: m.objective = m.revenue - m.tax + objective_.alpha * m.platform_side_surplus; break;
    case ObjectiveKind::revenue: m.objective = m.revenue - m.tax; break;
  }
  return m;
}

FeeMetrics FeeEvaluator::metrics(const EpochLedger& ledger) const {
  const EpochTotals t = epoch_totals(ledger);
  FeeMetrics m;
  m.revenue = t.platform_revenue;
  m.tax = tax_amount(ledger.revenue, config_.regime);
  m.welfare = t.welfare;
  m.surplus = t.buyer_surplus + t.seller_surplus;
  m.platform_side_surplus = platform_side_surplus(ledger);
  for (const auto& b : ledger.buyers) m.buyers_on += b.on_platform ? 1 : 0;
  for (const auto& s : ledger.sellers) m.sellers_on += s.active && s.on_platform ? 1 : 0;
  m.objective = objective_value(ledger, config_.regime, objective_);
  return m;
}

namespace {

void accumulate(FeeMetrics& total, const FeeMetrics& m) {
  total.objective += m.objective;
  total.revenue += m.revenue;
  total.tax += m.tax;
  total.welfare += m.welfare;
  total.surplus += m.surplus;
  total.platform_side_surplus += m.platform_side_surplus;
  total.buyers_on += m.buyers_on;
  total.sellers_on += m.sellers_on;
}

FeeMetrics scaled(FeeMetrics m, double k) {
  for (double* v : {&m.objective, &m.revenue, &m.tax, &m.welfare, &m.surplus, &m.platform_side_surplus,
                    &m.buyers_on, &m.sellers_on}) {
    *v *= k;
  }
  return m;
}

}  // namespace

FeeMetrics FeeEvaluator::evaluate_direct(const FeeSchedule& fees) const {
  FeeMetrics total;
  for (const auto& s : seeds_) {
    PlatformEnv env = s.env;
    env.step_fees(fees);
    accumulate(total, metrics(env.record().epochs.back().ledger));
  }
  return scaled(total, 1.0 / static_cast<double>(seeds_.size()));
}

FeeMetrics FeeEvaluator::evaluate(const FeeSchedule& fees) {
  if (!cached_) return evaluate_direct(fees);
  FeeMetrics total;
  for (auto& s : seeds_) {
    MarketState state = s.env.state();
    if (config_.platform_enabled && !s.env.pending_bases().empty()) {
      wake_and_decide(state, s.env.pending_bases(), fees, s.env.pending_draws(), config_.subscription);
    }
    std::string key(state.buyers.size() + state.sellers.size(), '0');
    for (std::size_t b = 0; b < state.buyers.size(); ++b) key[b] = state.buyers[b].on_platform ? '1' : '0';
    for (std::size_t i = 0; i < state.sellers.size(); ++i) {
      key[state.buyers.size() + i] = state.sellers[i].on_platform && !state.sellers[i].bankrupt ? '1' : '0';
    }
    auto it = s.profiles.find(key);
    if (it == s.profiles.end()) {
      PlatformEnv env = s.env;
      env.step_fees(fees);
      const EpochLedger& ledger = env.record().epochs.back().ledger;
      ProfileOutcome p;
      for (const auto& b : ledger.buyers) p.buyers_on += b.on_platform ? 1 : 0;
      const auto& sellers = env.market().sellers;
      for (std::size_t i = 0; i < ledger.sellers.size(); ++i) {
        const auto& e = ledger.sellers[i];
        if (!e.active) continue;
        p.sellers_on += e.on_platform ? 1 : 0;
        p.referral_base += sellers[i].price() * e.platform_tx;
      }
      p.platform_gross = platform_side_surplus(ledger) + p.buyers_on * fees.buyer_subscription +
                         p.sellers_on * fees.seller_subscription + fees.referral_rate * p.referral_base;
      p.welfare = epoch_totals(ledger).welfare;
      it = s.profiles.emplace(key, p).first;
    }
    accumulate(total, metrics(it->second, fees));
  }
  return scaled(total, 1.0 / static_cast<double>(seeds_.size()));
}

OptimizeResult optimize_fees(const EnvConfig& config, const Objective& objective, const SearchOptions& options,
                             std::span<const std::uint64_t> seeds) {
  if (config.epochs != 1) {
    throw std::invalid_argument("optimize_fees: single-epoch configurations only (got " +
                                std::to_string(config.epochs) + " epochs)");
  }
  if (config.mode != EnvMode::fee_setting) throw std::invalid_argument("optimize_fees: needs fee-setting mode");
  const auto grid = fee_tick_space(config.regime);
  FeeEvaluator evaluator(config, objective, std::vector<std::uint64_t>(seeds.begin(), seeds.end()));
  const SearchResult search = grid_search(
      grid, [&](int i) { return evaluator.evaluate(grid[static_cast<std::size_t>(i)].schedule()).objective; },
      options);
  OptimizeResult r;
  r.ticks = grid[static_cast<std::size_t>(search.best)];
  r.fees = r.ticks.schedule();
  r.value = search.value;
  r.metrics = evaluator.evaluate(r.fees);
  r.trace = search.trace;
  r.evaluations = static_cast<int>(search.trace.size());
  return r;
}

std::vector<std::uint64_t> seed_range(std::uint64_t base, int n) {
  std::vector<std::uint64_t> out;
  for (int i = 0; i < n; ++i) out.push_back(base + static_cast<std::uint64_t>(i));
  return out;
}

EnvConfig value_sweep_config(const EnvConfig& base, StructureKind structure, double rho, double mu,
                             bool platform_enabled) {
  EnvConfig c = base;
  c.market.structure = structure;
  c.market.rho = rho;
  c.epochs = 1;
  c.shock.enabled = false;
  c.shock.constant_friction = mu;
  c.warmup_friction = mu;
  c.mode = EnvMode::fee_setting;
  c.platform_enabled = platform_enabled;
  c.fixed_strategy = MatchingStrategy::myopic();
  return c;
}

namespace {

struct SeedMeans {
  double welfare = 0.0;
  double surplus = 0.0;
};

SeedMeans no_platform_means(const EnvConfig& config, std::span<const std::uint64_t> seeds) {
  FeeEvaluator evaluator(config, Objective{ObjectiveKind::welfare}, std::vector<std::uint64_t>(seeds.begin(), seeds.end()));
  const FeeMetrics m = evaluator.evaluate_direct(FeeSchedule{});
  return {m.welfare, m.surplus};
}

}  // namespace

std::vector<PlatformValueRow> sweep_value_of_platform(const EnvConfig& base, StructureKind structure,
                                                      std::span<const double> rho_grid,
                                                      std::span<const double> mu_grid, int n_seeds,
                                                      const SearchOptions& search, int workers) {
  if (rho_grid.empty() || mu_grid.empty()) throw std::invalid_argument("sweep: grids must be nonempty");
  if (n_seeds < 1) throw std::invalid_argument("sweep: need at least one seed");
  const auto seeds = seed_range(0, n_seeds);
  const double ideal = no_platform_means(value_sweep_config(base, structure, 1.0, 0.0, false), seeds).welfare;

  std::vector<PlatformValueRow> rows;
  for (double rho : rho_grid) {
    for (double mu : mu_grid) {
      PlatformValueRow row;
      row.rho = rho;
      row.mu = mu;
      row.ideal_welfare = ideal;
      rows.push_back(row);
    }
  }
  parallel_for(static_cast<int>(rows.size()), workers, [&](int i) {
    auto& row = rows[static_cast<std::size_t>(i)];
    const SeedMeans none = no_platform_means(value_sweep_config(base, structure, row.rho, row.mu, false), seeds);
    row.no_platform_welfare = none.welfare;
    row.no_platform_surplus = none.surplus;
    const auto opt = optimize_fees(value_sweep_config(base, structure, row.rho, row.mu, true),
                                   Objective{ObjectiveKind::revenue}, search, seeds);
    row.platform_welfare = opt.metrics.welfare;
    row.platform_surplus = opt.metrics.surplus;
    row.platform_revenue = opt.metrics.revenue;
    row.platform_fees = opt.fees;
    if (ideal != 0.0) {
      row.no_platform_normalized = row.no_platform_welfare / ideal;
      row.platform_normalized = row.platform_welfare / ideal;
      row.no_platform_surplus_normalized = row.no_platform_surplus / ideal;
      row.platform_surplus_normalized = row.platform_surplus / ideal;
    }
  });
  return rows;
}

std::vector<StrategyRow> sweep_matching_strategies(const EnvConfig& config, int n_seeds,
                                                   std::vector<MatchingStrategy> strategies, std::uint64_t seed_base,
                                                   int workers) {
  if (config.regime.kind != RegimeKind::fee_freeze) {
    throw std::invalid_argument("sweep_matching_strategies: needs a fee_freeze regime");
  }
  if (n_seeds < 1) throw std::invalid_argument("sweep_matching_strategies: need at least one seed");
  EnvConfig c = config;
  c.mode = EnvMode::matching;
  c.validate();
  if (strategies.empty()) {
    for (int a = 0; a < kMatchingActionCount; ++a) strategies.push_back(MatchingStrategy::from_action(a));
  }
  const auto structure = MarketStructure::of(c.market.structure);
  std::vector<StrategyRow> rows(strategies.size());
  parallel_for(static_cast<int>(strategies.size()), workers, [&](int i) {
    auto& row = rows[static_cast<std::size_t>(i)];
    row.strategy = strategies[static_cast<std::size_t>(i)];
    std::map<SellerClass, int> bankrupt;
    int bankrupt_total = 0;
    int sellers_total = 0;
    for (int k = 0; k < n_seeds; ++k) {
      PlatformEnv env(c);
      env.reset(seed_base + static_cast<std::uint64_t>(k));
      while (!env.done()) env.step_strategy(row.strategy);
      const auto& rec = env.record();
      for (std::size_t e = 1; e < rec.epochs.size(); ++e) {
        row.welfare += rec.epochs[e].welfare.welfare;
        row.revenue += rec.epochs[e].welfare.revenue;
        row.tax += rec.epochs[e].welfare.tax;
      }
      for (const auto& s : rec.market.sellers) {
        const SellerClass cls = seller_class(s, structure, rec.market.buyers, rec.market.sellers);
        const bool gone = rec.final_state.sellers[static_cast<std::size_t>(s.id)].bankrupt;
        row.class_count[cls] += 1;
        bankrupt[cls] += gone ? 1 : 0;
        bankrupt_total += gone ? 1 : 0;
        sellers_total += 1;
      }
    }
    row.welfare /= n_seeds;
    row.revenue /= n_seeds;
    row.tax /= n_seeds;
    row.bankrupt_fraction = sellers_total ? static_cast<double>(bankrupt_total) / sellers_total : 0.0;
    for (const auto& [cls, count] : row.class_count) row.bankrupt_by_class[cls] = static_cast<double>(bankrupt[cls]) / count;
  });
  return rows;
}

}  // namespace platsim
