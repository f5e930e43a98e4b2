#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "platsim/dynamics.hpp"
#include "platsim/market_gen.hpp"
#include "platsim/matching.hpp"
#include "platsim/observation.hpp"
#include "platsim/regulation.hpp"
#include "platsim/seeds.hpp"
#include "platsim/subscription.hpp"

namespace platsim {

enum class EnvMode { fee_setting, matching };

const char* to_string(EnvMode mode);
std::optional<EnvMode> parse_env_mode(std::string_view name);

struct MarketParams {
  StructureKind structure = StructureKind::core_and_niche;
  int n_buyers = 10;
  int n_sellers = 10;
  double rho = 0.2;
  double utility_scale = 2.0;
  double query_variance = 0.02;
};

struct ShockParams {
  bool enabled = true;
  int pre = 3;
  int post = 3;
  double intensity_min = 0.8;
  double intensity_max = 1.0;
  double base_friction = 0.1;
  double constant_friction = 0.1;  // every epoch when shocks are disabled
};

struct EnvConfig {
  MarketParams market;
  ShockParams shock;
  int epochs = 12;
  int timesteps = 100;
  double warmup_friction = 0.1;
  SubscriptionConfig subscription;
  int inertia_bound = 3;
  EnvMode mode = EnvMode::fee_setting;
  RegulationRegime regime;
  bool platform_enabled = true;
  MatchingStrategy fixed_strategy;         // fee-setting mode
  FeeSchedule fixed_fees{1.2, 2.0, 0.1};   // matching mode, unless the regime freezes fees
  TrackerUpdate tracker_update = TrackerUpdate::on_transaction;
  bool time_features = true;
  double discount = 0.99;

  /// Throws std::invalid_argument naming the first bad field.
  void validate() const;
  /// Fees used in matching mode.
  FeeSchedule matching_fees() const;
};

/// Rejected action; the env-server maps it to error{code: "action"}.
class ActionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct WelfareReport {
  double buyer_surplus = 0.0;
  double seller_surplus = 0.0;
  double revenue = 0.0;  // gross platform revenue
  double tax = 0.0;      // sink; not redistributed
  double welfare = 0.0;  // buyer + seller + (revenue - tax) + tax
};

WelfareReport welfare_report(const EpochLedger& ledger, const RegulationRegime& regime);

struct EpochRecord {
  EpochLedger ledger;
  ShockStage stage = ShockStage::warm_up;
  MatchingStrategy strategy;
  RewardBreakdown reward;  // zero for the warm-up
  WelfareReport welfare;
  std::vector<bool> seller_bankrupt;  // after close-out
};

struct EpisodeRecord {
  std::uint64_t seed = 0;
  SeedSet seeds;
  EnvMode mode = EnvMode::fee_setting;
  Market market;
  ShockSchedule schedule;
  std::vector<EpochRecord> epochs;  // index 0 is the warm-up
  std::vector<Observation> observations;  // observation before each step, then the terminal one
  std::vector<double> rewards;
  MarketState final_state;

  double discounted_return(double gamma) const;
};

struct StepResult {
  Observation observation;
  double reward = 0.0;
  bool done = false;
  RewardBreakdown breakdown;
  std::uint64_t ledger_digest = 0;
};

/// One episode of either platform POMDP. Copyable; a copy continues
/// independently with identical random streams.
class PlatformEnv {
 public:
  explicit PlatformEnv(EnvConfig config);

  const EnvConfig& config() const { return config_; }
  const ObservationLayout& layout() const { return layout_; }
  /// Fee grid size in fee-setting mode, 21 in matching mode.
  int action_count() const;
  const std::vector<FeeTicks>& fee_actions() const { return fee_actions_; }
  /// Index of a fee tick triple in the action space, or -1 if inadmissible.
  int fee_action_index(const FeeTicks& ticks) const;

  /// Samples the market, runs the warm-up epoch and returns the first observation.
  Observation reset(std::uint64_t seed);
  /// Resets onto an explicit market and friction schedule (no sampling).
  Observation reset(std::uint64_t seed, Market market, ShockSchedule schedule);

  /// Action index in the mode's action space. Throws ActionError on a bad index.
  StepResult step(int action);
  /// Fee-setting mode only. Throws ActionError when the regime rejects the fees.
  StepResult step_fees(const FeeSchedule& fees);
  /// Matching mode only.
  StepResult step_strategy(const MatchingStrategy& strategy);

  bool started() const { return started_; }
  bool done() const { return started_ && epoch_ > config_.epochs; }
  int epoch() const { return epoch_; }
  const EpisodeRecord& record() const { return record_; }
  const Market& market() const { return record_.market; }
  const MarketState& state() const { return state_; }
  Observation observation() const;

  /// Fee-setting mode: fee-free estimate bases and random draws that the next
  /// step's subscription decisions will use.
  const std::vector<EstimateBasis>& pending_bases() const { return bases_; }
  const DecisionDraws& pending_draws() const { return draws_; }

 private:
  void prepare_decisions(const FeeSchedule* fees);
  void decide(const FeeSchedule& fees);
  EpochLedger run(int epoch, const FeeSchedule& fees, const MatchingStrategy& strategy, double friction);
  StepResult finish_step(const RewardBreakdown& breakdown);
  double friction_for(int epoch) const;
  ShockStage stage_for(int epoch) const;

  EnvConfig config_;
  ObservationLayout layout_;
  std::vector<FeeTicks> fee_actions_;
  std::vector<int> fee_index_;
  bool started_ = false;
  int epoch_ = 0;
  MarketState state_;
  EpisodeRecord record_;
  UtilityTable last_utilities_;
  MatchingStrategy last_strategy_;
  FeeSchedule current_fees_;
  MatchingStrategy current_strategy_;
  std::vector<EstimateBasis> bases_;
  DecisionDraws draws_;
};

using Policy = std::function<int(const Observation&)>;

Policy constant_policy(int action);
/// Uniform over [0, action_count).
Policy random_policy(std::uint64_t seed, int action_count);

/// Runs reset plus one step per epoch with `policy` choosing the adaptive
/// surface; the other surface stays fixed by the config.
EpisodeRecord run_episode(const EnvConfig& config, const Policy& policy, std::uint64_t seed);

/// Builds the market an EnvConfig samples for `seed`.
Market sample_env_market(const EnvConfig& config, const SeedSet& seeds);
ShockSchedule sample_env_schedule(const EnvConfig& config, const SeedSet& seeds);

}  // namespace platsim
