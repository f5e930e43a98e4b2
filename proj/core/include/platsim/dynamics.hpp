#pragma once

#include <optional>
#include <span>
#include <vector>

#include "platsim/matching.hpp"
#include "platsim/model.hpp"
#include "platsim/seeds.hpp"

namespace platsim {

/// Immutable agents plus the utility kernel.
struct Market {
  std::vector<BuyerSpec> buyers;
  std::vector<SellerSpec> sellers;
  UtilityKernel kernel;

  int n_buyers() const { return static_cast<int>(buyers.size()); }
  int n_sellers() const { return static_cast<int>(sellers.size()); }
  /// Throws std::invalid_argument on out-of-range ids or attributes.
  void validate() const;
};

struct MarketState {
  std::vector<AgentState> buyers;
  std::vector<AgentState> sellers;

  static MarketState initial(const Market& market);
  /// On-platform, solvent sellers in ascending id order.
  std::vector<AgentId> subscribed_sellers() const;

  friend bool operator==(const MarketState&, const MarketState&) = default;
};

struct WorldOption {
  std::optional<AgentId> best;  // s*_w before the friction cut
  double best_utility = 0.0;
  std::optional<AgentId> candidate;  // s^w
  double surplus = 0.0;              // max(u - mu, 0)
};

/// Best known, solvent seller the buyer can afford. Ties go to the lowest id.
/// `utility[s]` holds u(q, s) for every seller id.
WorldOption world_choice(const BuyerSpec& buyer, std::span<const double> utility, double friction, double budget,
                         std::span<const SellerSpec> sellers, std::span<const AgentState> seller_states);

struct PlatformOption {
  std::optional<AgentId> recommended;
  double recommended_utility = 0.0;
  std::optional<AgentId> candidate;  // recommended and affordable
  double utility = 0.0;              // u^p, 0 without a candidate
};

/// Screens a recommendation against the remaining budget.
PlatformOption platform_option(std::optional<AgentId> recommended, std::span<const double> utility, double budget,
                               std::span<const SellerSpec> sellers);

struct TransactionOutcome {
  std::optional<AgentId> world_candidate;
  std::optional<AgentId> platform_candidate;
  std::optional<AgentId> chosen;
  Channel channel = Channel::none;
  double buyer_surplus = 0.0;
  double seller_surplus = 0.0;
};

/// Chooses between the two options and applies the result to `state`: budget,
/// per-epoch surplus and transaction counters of both parties. Platform wins
/// ties. Throws std::invalid_argument if the platform candidate is not an
/// on-platform, solvent seller or the buyer is off-platform.
TransactionOutcome buyer_transact(const Market& market, MarketState& state, AgentId buyer, const WorldOption& world,
                                  const PlatformOption& platform, const FeeSchedule& fees);

/// u(q_t, s) for every arrival of one epoch, row-major by timestep.
struct UtilityTable {
  int n_sellers = 0;
  std::vector<double> values;

  std::span<const double> row(int t) const {
    return {values.data() + static_cast<std::size_t>(t) * static_cast<std::size_t>(n_sellers),
            static_cast<std::size_t>(n_sellers)};
  }
};

struct EpochSettings {
  int epoch = 0;
  FeeSchedule fees;
  double friction = 0.1;
  int timesteps = 100;
};

/// Runs T round-robin arrivals (buyer t mod |B|). Subscriptions must already
/// be set in `state`. A null `policy` means no platform matching. When
/// `utilities` is non-null it receives the per-arrival utility rows.
EpochLedger run_epoch(const Market& market, MarketState& state, const EpochSettings& settings,
                      MatchingPolicy* policy, Rng& query_rng, UtilityTable* utilities = nullptr);

/// Bankruptcy bookkeeping: a seller whose epoch surplus is <= 0 for
/// shutdown_threshold consecutive epochs goes bankrupt and leaves the platform.
void close_epoch(const Market& market, MarketState& state, const EpochLedger& ledger);

/// Query for the buyer's n-th arrival: scripted, or N(location, stddev^2) clipped to the unit square.
LatentPoint sample_query(const BuyerSpec& buyer, int arrival, Rng& rng);

}  // namespace platsim
