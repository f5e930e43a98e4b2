#include "platsim/matching.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace platsim {

const char* to_string(MatchingRule rule) {
  return rule == MatchingRule::profit_driven ? "profit_driven" : "seller_aware";
}

int MatchingStrategy::action() const {
  if (threshold_tick < 0 || threshold_tick > 10) throw std::out_of_range("matching threshold tick must be in [0,10]");
  if (threshold_tick == 10 || rule == MatchingRule::seller_aware) return threshold_tick;
  return 11 + threshold_tick;
}

MatchingStrategy MatchingStrategy::from_action(int action) {
  if (action < 0 || action >= kMatchingActionCount) {
    throw std::out_of_range("matching action " + std::to_string(action) + " outside [0, 21)");
  }
  if (action <= 10) return {MatchingRule::seller_aware, action};
  return {MatchingRule::profit_driven, action - 11};
}

void SellerPlatformSurplusTracker::reset(std::span<const SellerSpec> sellers, std::span<const AgentId> subscribed,
                                         const FeeSchedule& fees) {
  values_.assign(sellers.size(), 0.0);
  for (AgentId s : subscribed) values_.at(static_cast<std::size_t>(s)) = -fees.seller_subscription;
}

void SellerPlatformSurplusTracker::credit(const SellerSpec& seller, const FeeSchedule& fees) {
  values_.at(static_cast<std::size_t>(seller.id)) +=
      transaction_seller_surplus(seller.price(), seller.cost_fraction, fees.referral_rate, Channel::platform);
}

std::optional<AgentId> myopic(std::span<const double> utility, std::span<const AgentId> candidates) {
  std::optional<AgentId> best;
  double best_u = 0.0;
  for (AgentId s : candidates) {
    const double u = utility[static_cast<std::size_t>(s)];
    if (!best || u > best_u || (u == best_u && s < *best)) {
      best = s;
      best_u = u;
    }
  }
  return best;
}

namespace {

// Strictly better under (key desc, utility desc, id asc).
bool better(double key, double u, AgentId s, double best_key, double best_u, AgentId best_s) {
  if (key != best_key) return key > best_key;
  if (u != best_u) return u > best_u;
  return s < best_s;
}

}  // namespace

std::optional<AgentId> recommend(std::span<const double> utility, std::span<const AgentId> candidates,
                                 const MatchingStrategy& strategy, std::span<const double> tracker,
                                 const FeeSchedule& fees, std::span<const SellerSpec> sellers) {
  if (candidates.empty()) return std::nullopt;
  double u_star = utility[static_cast<std::size_t>(candidates.front())];
  for (AgentId s : candidates) u_star = std::max(u_star, utility[static_cast<std::size_t>(s)]);
  const double cut = strategy.threshold() * u_star;

  auto in_set = [&](AgentId s) { return utility[static_cast<std::size_t>(s)] >= cut; };

  std::optional<AgentId> pick;
  double pick_key = 0.0;
  double pick_u = 0.0;
  auto consider = [&](AgentId s, double key) {
    const double u = utility[static_cast<std::size_t>(s)];
    if (!pick || better(key, u, s, pick_key, pick_u, *pick)) {
      pick = s;
      pick_key = key;
      pick_u = u;
    }
  };

  if (strategy.rule == MatchingRule::profit_driven) {
    for (AgentId s : candidates) {
      if (in_set(s)) consider(s, fees.referral_rate * sellers[static_cast<std::size_t>(s)].price());
    }
    return pick;
  }

  // Seller-aware: closest to break-even among those not yet covering the fee.
  for (AgentId s : candidates) {
    const double r = tracker[static_cast<std::size_t>(s)];
    if (in_set(s) && r <= 0.0) consider(s, r);
  }
  if (pick) return pick;
  for (AgentId s : candidates) {
    if (in_set(s)) consider(s, -tracker[static_cast<std::size_t>(s)]);
  }
  return pick;
}

namespace {

std::vector<double> utilities(const LatentPoint& query, std::span<const SellerSpec> sellers,
                              const UtilityKernel& kernel) {
  std::vector<double> u(sellers.size());
  for (std::size_t i = 0; i < sellers.size(); ++i) u[i] = kernel(query, sellers[i].location);
  return u;
}

}  // namespace

std::optional<AgentId> myopic(const LatentPoint& query, std::span<const SellerSpec> sellers,
                              std::span<const AgentId> candidates, const UtilityKernel& kernel) {
  return myopic(utilities(query, sellers, kernel), candidates);
}

std::optional<AgentId> recommend(const LatentPoint& query, std::span<const SellerSpec> sellers,
                                 std::span<const AgentId> candidates, const MatchingStrategy& strategy,
                                 const SellerPlatformSurplusTracker& tracker, const FeeSchedule& fees,
                                 const UtilityKernel& kernel) {
  fees.validate();
  if (tracker.values().size() != sellers.size()) throw std::invalid_argument("recommend: tracker size mismatch");
  return recommend(utilities(query, sellers, kernel), candidates, strategy, tracker.values(), fees, sellers);
}

void StrategyMatcher::begin_epoch(const MatchContext& context) {
  sellers_.assign(context.sellers.begin(), context.sellers.end());
  subscribed_.assign(context.subscribed.begin(), context.subscribed.end());
  fees_ = context.fees;
  tracker_.reset(sellers_, subscribed_, fees_);
}

std::optional<AgentId> StrategyMatcher::recommend(const MatchRequest& request) {
  auto s = platsim::recommend(request.utility, subscribed_, strategy_, tracker_.values(), fees_, sellers_);
  if (s && update_ == TrackerUpdate::on_recommendation) tracker_.credit(sellers_[static_cast<std::size_t>(*s)], fees_);
  return s;
}

void StrategyMatcher::on_platform_transaction(AgentId seller) {
  if (update_ == TrackerUpdate::on_transaction) tracker_.credit(sellers_.at(static_cast<std::size_t>(seller)), fees_);
}

void ScriptedMatcher::begin_epoch(const MatchContext& context) {
  subscribed_.assign(context.subscribed.begin(), context.subscribed.end());
}

std::optional<AgentId> ScriptedMatcher::recommend(const MatchRequest& request) {
  const auto b = static_cast<std::size_t>(request.buyer);
  const auto n = static_cast<std::size_t>(request.arrival);
  if (b < routes_.size() && n < routes_[b].size() && routes_[b][n]) {
    const AgentId s = *routes_[b][n];
    if (std::binary_search(subscribed_.begin(), subscribed_.end(), s)) return s;
  }
  return myopic(request.utility, subscribed_);
}

}  // namespace platsim
