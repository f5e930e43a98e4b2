#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace platsim {

/// Dense agent index. Buyers and sellers are numbered independently from 0.
using AgentId = int;

/// Point in the two-dimensional latent space: product taste and normalized price.
struct LatentPoint {
  double taste = 0.0;
  double price_level = 0.0;

  friend bool operator==(const LatentPoint&, const LatentPoint&) = default;
};

LatentPoint clip_unit(LatentPoint p);
double euclidean_distance(const LatentPoint& a, const LatentPoint& b);

/// exp(-c * ||q - s||). Requires c > 0.
double matching_utility(const LatentPoint& q, const LatentPoint& s, double c);

/// Utility of matching a query with a seller location.
///
/// The simulator uses the exponential kernel. The linear kernel
/// (intercept - scale * distance) exists so that one-dimensional toy
/// economies can be replayed by the same engine.
struct UtilityKernel {
  enum class Kind { exponential, linear };

  Kind kind = Kind::exponential;
  double scale = 2.0;
  double intercept = 1.0;

  double operator()(const LatentPoint& q, const LatentPoint& s) const;

  static UtilityKernel exponential(double c) { return {Kind::exponential, c, 1.0}; }
  static UtilityKernel linear(double intercept, double slope) { return {Kind::linear, slope, intercept}; }
};

struct BuyerSpec {
  AgentId id = 0;
  LatentPoint location;
  double query_stddev = 0.0;
  std::vector<AgentId> known_sellers;  // ascending
  double epoch_budget = 0.0;
  // When non-empty the buyer's n-th arrival in an epoch queries
  // scripted_queries[n % size] instead of sampling around `location`.
  std::vector<LatentPoint> scripted_queries;
};

struct SellerSpec {
  AgentId id = 0;
  LatentPoint location;
  double cost_fraction = 0.3;
  int shutdown_threshold = 2;
  double fixed_cost = 0.0;  // per-epoch cost while operating; zero in generated markets

  double price() const { return location.price_level; }
};

/// Platform fees for one epoch.
struct FeeSchedule {
  double buyer_subscription = 0.0;
  double seller_subscription = 0.0;
  double referral_rate = 0.0;

  /// Throws std::invalid_argument on negative, non-finite or out-of-range values.
  void validate() const;

  friend bool operator==(const FeeSchedule&, const FeeSchedule&) = default;
};

enum class Channel { none, world, platform };

const char* to_string(Channel c);

/// Mutable per-agent state carried across epochs.
struct AgentState {
  bool on_platform = false;
  int inertia = 1;
  double budget_remaining = 0.0;  // buyers only
  bool bankrupt = false;          // sellers only
  int consecutive_nonpositive_epochs = 0;
  double epoch_surplus_world = 0.0;
  double epoch_surplus_platform = 0.0;
  int platform_tx_count = 0;
  int world_tx_count = 0;

  friend bool operator==(const AgentState&, const AgentState&) = default;
};

double transaction_seller_surplus(double price, double cost_fraction, double referral_rate, Channel channel);

/// One buyer arrival: the query, both candidate sellers and the outcome.
struct TransactionRecord {
  int epoch = 0;
  int t = 0;
  AgentId buyer = 0;
  bool buyer_on_platform = false;
  LatentPoint query;

  // Best affordable known seller before the friction cut (s*_w) and its utility.
  std::optional<AgentId> world_best;
  double world_best_utility = 0.0;
  // s^w: world_best if its utility exceeds the friction, else none.
  std::optional<AgentId> world_candidate;
  double world_surplus = 0.0;

  // Seller recommended by the platform (regardless of budget) and its utility.
  std::optional<AgentId> recommended;
  double recommended_utility = 0.0;
  // s_p: the recommendation if affordable, else none; u^p is 0 without it.
  std::optional<AgentId> platform_candidate;
  double platform_utility = 0.0;

  std::optional<AgentId> chosen;
  Channel channel = Channel::none;
  double buyer_surplus = 0.0;
  double seller_surplus = 0.0;
  double price = 0.0;

  friend bool operator==(const TransactionRecord&, const TransactionRecord&) = default;
};

struct BuyerEpoch {
  bool on_platform = false;
  int arrivals = 0;
  double surplus_world = 0.0;     // r^w_{b,k}
  double surplus_platform = 0.0;  // r^p_{b,k}, subscription fee included
  int platform_tx = 0;
  int world_tx = 0;

  double surplus() const { return surplus_world + surplus_platform; }
  friend bool operator==(const BuyerEpoch&, const BuyerEpoch&) = default;
};

struct SellerEpoch {
  bool active = true;  // not bankrupt at the start of the epoch
  bool on_platform = false;
  double surplus_world = 0.0;     // r^w_{s,k}
  double surplus_platform = 0.0;  // r^p_{s,k}, subscription fee included
  double fixed_cost = 0.0;
  int platform_tx = 0;  // n^p_{s,k}
  int world_tx = 0;     // n^w_{s,k}

  double surplus() const { return surplus_world + surplus_platform - fixed_cost; }
  friend bool operator==(const SellerEpoch&, const SellerEpoch&) = default;
};

struct RevenueBreakdown {
  double buyer_subscriptions = 0.0;
  double seller_subscriptions = 0.0;
  double referrals = 0.0;

  double total() const { return buyer_subscriptions + seller_subscriptions + referrals; }
  friend bool operator==(const RevenueBreakdown&, const RevenueBreakdown&) = default;
};

/// Audit trail of one epoch. Produced by the dynamics engine.
struct EpochLedger {
  int epoch = 0;
  FeeSchedule fees;
  double friction = 0.0;
  std::vector<BuyerEpoch> buyers;
  std::vector<SellerEpoch> sellers;
  RevenueBreakdown revenue;
  std::vector<TransactionRecord> transactions;
  bool finalized = false;

  friend bool operator==(const EpochLedger&, const EpochLedger&) = default;
};

struct EpochTotals {
  double buyer_surplus = 0.0;
  double seller_surplus = 0.0;
  double platform_revenue = 0.0;
  double welfare = 0.0;
};

/// Throws std::logic_error when the ledger is not finalized.
EpochTotals epoch_totals(const EpochLedger& ledger);

/// Surplus generated on the platform this epoch: sum of r^p over buyers and sellers.
double platform_side_surplus(const EpochLedger& ledger);

/// 64-bit FNV-1a digest over every numeric field of the ledger.
std::uint64_t ledger_digest(const EpochLedger& ledger);

}  // namespace platsim
