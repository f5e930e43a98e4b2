#pragma once

#include <optional>
#include <span>
#include <vector>

#include "platsim/model.hpp"

namespace platsim {

enum class MatchingRule { seller_aware = 0, profit_driven = 1 };

const char* to_string(MatchingRule rule);

/// Matching rule plus utility threshold eta = threshold_tick / 10.
struct MatchingStrategy {
  MatchingRule rule = MatchingRule::seller_aware;
  int threshold_tick = 10;

  double threshold() const { return threshold_tick / 10.0; }
  bool is_myopic() const { return threshold_tick == 10; }

  /// Index in [0, 21). Both rules at eta = 1 map to action 10.
  int action() const;
  /// Actions 0..10 are seller-aware with eta = a/10, 11..20 profit-driven
  /// with eta = (a-11)/10. Throws std::out_of_range otherwise.
  static MatchingStrategy from_action(int action);
  static MatchingStrategy myopic() { return {}; }

  friend bool operator==(const MatchingStrategy&, const MatchingStrategy&) = default;
};

inline constexpr int kMatchingActionCount = 21;

/// When the Algorithm-1 surplus estimate is credited.
enum class TrackerUpdate { on_transaction, on_recommendation };

/// Running estimate of each seller's platform surplus within an epoch.
class SellerPlatformSurplusTracker {
 public:
  SellerPlatformSurplusTracker() = default;
  explicit SellerPlatformSurplusTracker(std::size_t n_sellers) : values_(n_sellers, 0.0) {}

  /// -P_S for subscribed sellers, 0 otherwise.
  void reset(std::span<const SellerSpec> sellers, std::span<const AgentId> subscribed, const FeeSchedule& fees);
  void credit(const SellerSpec& seller, const FeeSchedule& fees);
  void set(AgentId seller, double value) { values_.at(static_cast<std::size_t>(seller)) = value; }

  double operator[](AgentId seller) const { return values_[static_cast<std::size_t>(seller)]; }
  std::span<const double> values() const { return values_; }

 private:
  std::vector<double> values_;
};

/// Utility-argmax among `candidates`; ties go to the lowest id.
/// `utility[s]` holds u(q, s) for every seller id.
std::optional<AgentId> myopic(std::span<const double> utility, std::span<const AgentId> candidates);

/// Threshold matching. `candidates` are the subscribed, solvent sellers in ascending
/// id order; `tracker[s]` is the running platform-surplus estimate.
std::optional<AgentId> recommend(std::span<const double> utility, std::span<const AgentId> candidates,
                                 const MatchingStrategy& strategy, std::span<const double> tracker,
                                 const FeeSchedule& fees, std::span<const SellerSpec> sellers);

/// Convenience overloads that evaluate the kernel first.
std::optional<AgentId> myopic(const LatentPoint& query, std::span<const SellerSpec> sellers,
                              std::span<const AgentId> candidates, const UtilityKernel& kernel);
/// Validates `fees` before matching.
std::optional<AgentId> recommend(const LatentPoint& query, std::span<const SellerSpec> sellers,
                                 std::span<const AgentId> candidates, const MatchingStrategy& strategy,
                                 const SellerPlatformSurplusTracker& tracker, const FeeSchedule& fees,
                                 const UtilityKernel& kernel);

/// What a matching policy sees about one arrival.
struct MatchRequest {
  int t = 0;
  AgentId buyer = 0;
  int arrival = 0;  // index of this buyer's arrival within the epoch
  LatentPoint query;
  std::span<const double> utility;  // u(q, s) for every seller id
};

/// Epoch-level context handed to a policy before the first arrival.
struct MatchContext {
  std::span<const SellerSpec> sellers;
  std::span<const AgentId> subscribed;  // on-platform, solvent sellers
  FeeSchedule fees;
};

class MatchingPolicy {
 public:
  virtual ~MatchingPolicy() = default;

  virtual void begin_epoch(const MatchContext& context) = 0;
  virtual std::optional<AgentId> recommend(const MatchRequest& request) = 0;
  virtual void on_platform_transaction(AgentId /*seller*/) {}
};

/// Threshold matching with a tracker that lives for one epoch.
class StrategyMatcher final : public MatchingPolicy {
 public:
  explicit StrategyMatcher(MatchingStrategy strategy = {}, TrackerUpdate update = TrackerUpdate::on_transaction)
      : strategy_(strategy), update_(update) {}

  void set_strategy(MatchingStrategy strategy) { strategy_ = strategy; }
  const MatchingStrategy& strategy() const { return strategy_; }
  TrackerUpdate update_mode() const { return update_; }
  const SellerPlatformSurplusTracker& tracker() const { return tracker_; }

  void begin_epoch(const MatchContext& context) override;
  std::optional<AgentId> recommend(const MatchRequest& request) override;
  void on_platform_transaction(AgentId seller) override;

 private:
  MatchingStrategy strategy_;
  TrackerUpdate update_;
  SellerPlatformSurplusTracker tracker_;
  std::vector<SellerSpec> sellers_;
  std::vector<AgentId> subscribed_;
  FeeSchedule fees_;
};

/// Fixed route per (buyer, arrival). Falls back to myopic matching when the
/// scripted seller is not subscribed or no route is given.
class ScriptedMatcher final : public MatchingPolicy {
 public:
  // routes[b][n] is the seller for buyer b's n-th arrival, or nullopt.
  explicit ScriptedMatcher(std::vector<std::vector<std::optional<AgentId>>> routes) : routes_(std::move(routes)) {}

  void begin_epoch(const MatchContext& context) override;
  std::optional<AgentId> recommend(const MatchRequest& request) override;

 private:
  std::vector<std::vector<std::optional<AgentId>>> routes_;
  std::vector<AgentId> subscribed_;
};

}  // namespace platsim
