#pragma once

#include <string>
#include <vector>

#include "platsim/dynamics.hpp"
#include "platsim/market_gen.hpp"
#include "platsim/matching.hpp"
#include "platsim/model.hpp"

namespace platsim {

struct ObservationField {
  std::string name;
  int offset = 0;
  int length = 0;
};

/// Flat observation layout; a pure function of the market size.
struct ObservationLayout {
  int n_buyers = 0;
  int n_sellers = 0;
  bool time_features = true;
  std::vector<ObservationField> fields;
  int length = 0;

  /// Field order:
  ///   buyer_subscribed[n], seller_subscribed[m],
  ///   buyer_location[2n], seller_location[2m]        (zero for off-platform agents)
  ///   buyer_platform_tx[n], buyer_platform_surplus[n],
  ///   seller_platform_tx[m], seller_platform_surplus[m],
  ///   recommendations[n*m], platform_transactions[n*m]  (row = buyer)
  ///   fees[3] (P_B, P_S, P_R), strategy[2] (rule, eta), friction[1],
  ///   time[3] (epoch, stage code, remaining epochs) when time_features is set.
  /// Length 6(n+m) + 2nm + 6 (+3). 309 for 10x10 with time features.
  static ObservationLayout make(int n_buyers, int n_sellers, bool time_features);

  /// Throws std::out_of_range for an unknown name.
  const ObservationField& field(const std::string& name) const;
};

struct Observation {
  std::vector<double> values;

  friend bool operator==(const Observation&, const Observation&) = default;
};

/// The only data an observation is built from. Nothing here identifies a
/// buyer's known sellers, a world counterparty or an agent's inertia.
struct PlatformView {
  std::vector<bool> buyer_subscribed;
  std::vector<bool> seller_subscribed;
  std::vector<LatentPoint> buyer_location;  // on-platform agents only
  std::vector<LatentPoint> seller_location;
  std::vector<int> buyer_platform_tx;
  std::vector<double> buyer_platform_surplus;
  std::vector<int> seller_platform_tx;
  std::vector<double> seller_platform_surplus;
  std::vector<int> recommendations;  // n*m
  std::vector<int> platform_transactions;
  FeeSchedule fees;
  MatchingStrategy strategy;
  double friction = 0.0;
  int epoch = 0;
  ShockStage stage = ShockStage::warm_up;
  int remaining = 0;
};

/// Extracts the platform's view. `reference` is the most recent finished
/// epoch (null before any epoch ran); per-agent stats and matrices come from
/// it and are restricted to agents that were on the platform in it.
PlatformView platform_view(const Market& market, const MarketState& state, const EpochLedger* reference,
                           const FeeSchedule& fees, const MatchingStrategy& strategy, double friction, int epoch,
                           ShockStage stage, int remaining);

Observation observe(const ObservationLayout& layout, const PlatformView& view);

}  // namespace platsim
