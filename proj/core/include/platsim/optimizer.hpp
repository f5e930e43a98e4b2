#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "platsim/market_gen.hpp"
#include "platsim/platform_env.hpp"
#include "platsim/regulation.hpp"

namespace platsim {

enum class ObjectiveKind { revenue, welfare, surplus_aware };

const char* to_string(ObjectiveKind kind);
std::optional<ObjectiveKind> parse_objective_kind(std::string_view name);

struct Objective {
  ObjectiveKind kind = ObjectiveKind::revenue;
  double alpha = 0.4;  // surplus_aware only
};

enum class SearchMethod { exhaustive, random_then_local };

const char* to_string(SearchMethod method);
std::optional<SearchMethod> parse_search_method(std::string_view name);

struct SearchOptions {
  SearchMethod method = SearchMethod::exhaustive;
  int budget = 0;   // evaluations; <= 0 or above the grid size means the whole grid
  int initial = 10; // uniform draws before local search
  std::uint64_t seed = 0;

  /// Budget preset standing in for Bayesian optimization: 64 rounds, 10
  /// initial points.
  static SearchOptions bo_preset(std::uint64_t seed = 0);
};

struct TraceEntry {
  int index = 0;
  double value = 0.0;
};

struct SearchResult {
  int best = -1;
  double value = 0.0;
  std::vector<TraceEntry> trace;  // evaluation order
};

/// Maximizes `evaluate(i)` over grid indices. Exhaustive search visits every
/// index in order. random_then_local draws `initial` distinct points uniformly,
/// then runs coordinate ascent over the +-1 tick neighbours and restarts from a
/// fresh random point at each local optimum until the budget is spent. Ties go
/// to the lowest index.
SearchResult grid_search(std::span<const FeeTicks> grid, const std::function<double(int)>& evaluate,
                         const SearchOptions& options);

/// Mean outcome of the single evaluated epoch over a seed set.
struct FeeMetrics {
  double objective = 0.0;
  double revenue = 0.0;  // gross
  double tax = 0.0;
  double welfare = 0.0;
  double surplus = 0.0;  // buyers + sellers
  double platform_side_surplus = 0.0;
  double buyers_on = 0.0;
  double sellers_on = 0.0;
};

double objective_value(const EpochLedger& ledger, const RegulationRegime& regime, const Objective& objective);

/// Evaluates fee schedules on a single-epoch fee-setting configuration with
/// common random numbers: every candidate sees the same markets, warm-up,
/// queries and decision draws.
///
/// When the fixed matching strategy does not depend on fees (threshold 1) the
/// epoch outcome depends on the fees only through the subscription profile
/// they induce, and every quantity is affine in the fees given that profile.
/// Each distinct profile is then simulated once and reused.
class FeeEvaluator {
 public:
  FeeEvaluator(const EnvConfig& config, Objective objective, std::vector<std::uint64_t> seeds);

  const EnvConfig& config() const { return config_; }
  bool cached() const { return cached_; }
  std::size_t profiles_simulated() const;

  FeeMetrics evaluate(const FeeSchedule& fees);
  /// Steps a copy of each reset environment; no reuse.
  FeeMetrics evaluate_direct(const FeeSchedule& fees) const;

 private:
  struct ProfileOutcome {
    int buyers_on = 0;
    int sellers_on = 0;
    double referral_base = 0.0;  // sum of prices of platform transactions
    double platform_gross = 0.0; // platform-side surplus before fees
    double welfare = 0.0;
  };
  struct SeedEnv {
    PlatformEnv env;
    std::unordered_map<std::string, ProfileOutcome> profiles;
  };

  FeeMetrics metrics(const ProfileOutcome& p, const FeeSchedule& fees) const;
  FeeMetrics metrics(const EpochLedger& ledger) const;

  EnvConfig config_;
  Objective objective_;
  bool cached_ = false;
  std::vector<SeedEnv> seeds_;
};

struct OptimizeResult {
  FeeSchedule fees;
  FeeTicks ticks;
  double value = 0.0;
  FeeMetrics metrics;
  std::vector<TraceEntry> trace;
  int evaluations = 0;
};

/// Black-box search over the regime's fee grid. Rejects configurations with
/// more than one epoch or in matching mode (std::invalid_argument).
OptimizeResult optimize_fees(const EnvConfig& config, const Objective& objective, const SearchOptions& options,
                             std::span<const std::uint64_t> seeds);

/// Seeds 0..n-1 offset by `base`.
std::vector<std::uint64_t> seed_range(std::uint64_t base, int n);

struct PlatformValueRow {
  double rho = 0.0;
  double mu = 0.0;
  double ideal_welfare = 0.0;
  double no_platform_welfare = 0.0;
  double no_platform_surplus = 0.0;
  double platform_welfare = 0.0;
  double platform_surplus = 0.0;
  double platform_revenue = 0.0;
  FeeSchedule platform_fees;
  // Ratios of seed means to the ideal-welfare mean.
  double no_platform_normalized = 0.0;
  double platform_normalized = 0.0;
  double no_platform_surplus_normalized = 0.0;
  double platform_surplus_normalized = 0.0;
};

/// Single-epoch, constant-friction value-of-platform sweep over rho x mu. The
/// platform chooses revenue-maximizing fees over the grid. The ideal world has
/// rho = 1, mu = 0 and no platform, on the same seeds. `base` supplies
/// everything else (market size, timesteps, matching strategy, regime).
std::vector<PlatformValueRow> sweep_value_of_platform(const EnvConfig& base, StructureKind structure,
                                                      std::span<const double> rho_grid,
                                                      std::span<const double> mu_grid, int n_seeds,
                                                      const SearchOptions& search = {}, int workers = 1);

/// Base configuration for the sweep: shocks off, one epoch, myopic matching.
EnvConfig value_sweep_config(const EnvConfig& base, StructureKind structure, double rho, double mu,
                             bool platform_enabled);

struct StrategyRow {
  MatchingStrategy strategy;
  double welfare = 0.0;  // mean per-episode sum over non-warm-up epochs
  double revenue = 0.0;
  double tax = 0.0;
  double bankrupt_fraction = 0.0;
  std::map<SellerClass, double> bankrupt_by_class;  // fraction of that class bankrupt at episode end
  std::map<SellerClass, int> class_count;
};

/// Runs every strategy for the whole episode in matching mode under a fee
/// freeze. Requires regime.kind == fee_freeze (std::invalid_argument).
/// `strategies` defaults to the 21 matching actions.
std::vector<StrategyRow> sweep_matching_strategies(const EnvConfig& config, int n_seeds,
                                                   std::vector<MatchingStrategy> strategies = {},
                                                   std::uint64_t seed_base = 0, int workers = 1);

/// Splits [0, n) over `workers` threads (1 = inline). Exceptions propagate.
void parallel_for(int n, int workers, const std::function<void(int)>& body);

}  // namespace platsim
