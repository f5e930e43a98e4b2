#pragma once

#include <span>
#include <vector>

#include "platsim/dynamics.hpp"
#include "platsim/matching.hpp"
#include "platsim/model.hpp"
#include "platsim/seeds.hpp"

namespace platsim {

struct SubscriptionEstimate {
  double xi_world = 0.0;
  double xi_platform = 0.0;
};

/// Fee-free part of an estimate. The fees enter affinely:
///   xi_platform = platform_gross - (own subscription fee) - P_R * referral_base
/// so one basis can be priced under many fee schedules.
struct EstimateBasis {
  bool seller = false;
  double xi_world = 0.0;
  double platform_gross = 0.0;
  double referral_base = 0.0;  // sellers: n^{p*} * price
};

SubscriptionEstimate price_estimate(const EstimateBasis& basis, const FeeSchedule& new_fees);

/// Everything an agent may use to re-evaluate the previous epoch.
struct CounterfactualContext {
  const Market& market;
  const MarketState& state;     // after close_epoch of the previous epoch
  const EpochLedger& previous;  // ledger of the previous epoch
  const UtilityTable& utilities;
  MatchingStrategy strategy;  // strategy the platform used in the previous epoch
  double new_friction = 0.1;
};

/// Utility rows rebuilt from the recorded queries of a ledger.
UtilityTable utility_table(const Market& market, const EpochLedger& ledger);

/// On-platform buyers reuse their recorded platform options; off-platform
/// buyers are shown the utility-best subscribed seller for each past query.
/// Throws std::out_of_range for an id absent from the ledger.
EstimateBasis buyer_basis(const CounterfactualContext& ctx, AgentId buyer);

/// Re-matches past queries with the seller removed (on-platform) or added
/// (off-platform) under the previous strategy. The Algorithm-1 tracker is
/// snapshotted at its end-of-epoch values. Budgets are not re-screened for
/// re-matched sellers. Throws std::invalid_argument for a bankrupt seller.
EstimateBasis seller_basis(const CounterfactualContext& ctx, AgentId seller);

SubscriptionEstimate estimate_buyer(const CounterfactualContext& ctx, AgentId buyer, const FeeSchedule& new_fees);
SubscriptionEstimate estimate_seller(const CounterfactualContext& ctx, AgentId seller, const FeeSchedule& new_fees);

struct InertiaBonus {
  double platform = 0.0;
  double world = 0.0;
};

/// sigma^p = I^p log(chi) for chi > 0, sigma^w = (1 - I^p) log(-chi) for chi < 0.
/// Throws std::invalid_argument when chi == 0.
InertiaBonus inertia_bonus(const AgentState& state);

/// Logit probability of subscribing, evaluated without overflow.
double subscribe_probability(const SubscriptionEstimate& estimate, const InertiaBonus& bonus);
/// Bernoulli draw: subscribes iff uniform < probability.
bool subscribe_decision(const SubscriptionEstimate& estimate, const InertiaBonus& bonus, double uniform);
bool subscribe_decision(const SubscriptionEstimate& estimate, const InertiaBonus& bonus, Rng& rng);

/// chi > 0: +1 on stay, reset to -1 on leave. chi < 0: -1 on stay off, reset to +1 on join.
int update_inertia(int chi, bool subscribed);
AgentState update_inertia(AgentState state, bool subscribed);

/// Uniform on {-bound..-1, 1..bound}.
int sample_initial_inertia(int bound, Rng& rng);

enum class DecisionMode { logit, best_response };

struct SubscriptionConfig {
  double p_wake = 1.0;
  bool sleepers_accrue_inertia = true;
  DecisionMode mode = DecisionMode::logit;
};

/// Pre-drawn uniforms, one wake and one choice draw per agent (buyers first).
/// Drawing them unconditionally keeps the stream aligned across fee schedules.
struct DecisionDraws {
  std::vector<double> wake;
  std::vector<double> choice;

  static DecisionDraws draw(int n_buyers, int n_sellers, Rng& rng);
};

/// Applies one round of subscription decisions to `state`. `bases` holds one
/// entry per buyer followed by one per seller; bankrupt sellers are skipped.
/// Best-response mode subscribes iff xi_platform >= xi_world, ignoring inertia.
void wake_and_decide(MarketState& state, std::span<const EstimateBasis> bases, const FeeSchedule& fees,
                     const DecisionDraws& draws, const SubscriptionConfig& config);

/// Bases for every agent, buyers first.
std::vector<EstimateBasis> compute_bases(const CounterfactualContext& ctx);

}  // namespace platsim
