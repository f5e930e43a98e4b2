#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "platsim/model.hpp"

namespace platsim {

enum class RegimeKind { laissez_faire, surplus_aware, tax, fee_cap, fee_freeze };
enum class TaxCategory { buyer_subs, seller_subs, referrals, all_seller_fees };

const char* to_string(RegimeKind kind);
const char* to_string(TaxCategory category);
std::optional<RegimeKind> parse_regime_kind(std::string_view name);
std::optional<TaxCategory> parse_tax_category(std::string_view name);

struct FeeCaps {
  std::optional<double> buyer_subscription;
  std::optional<double> seller_subscription;
  std::optional<double> referral_rate;

  bool admits(const FeeSchedule& fees) const;
};

struct RegulationRegime {
  RegimeKind kind = RegimeKind::laissez_faire;
  double alpha = 0.4;
  TaxCategory tax_category = TaxCategory::referrals;
  double tax_rate = 0.2;
  FeeCaps caps{2.0, 2.0, 0.1};
  FeeSchedule frozen{1.2, 2.0, 0.1};

  static RegulationRegime laissez_faire() { return {}; }
  static RegulationRegime surplus_aware(double alpha = 0.4);
  static RegulationRegime tax(TaxCategory category, double rate = 0.2);
  static RegulationRegime fee_cap(FeeCaps caps = {2.0, 2.0, 0.1});
  static RegulationRegime fee_freeze(FeeSchedule fees = {1.2, 2.0, 0.1});

  /// Throws std::invalid_argument on out-of-range parameters.
  void validate() const;
};

/// Subscription fees are tick * 0.2 for tick in [0, 50]; referral rate is tick * 0.1 for tick in [0, 10].
inline constexpr int kSubscriptionTicks = 51;
inline constexpr int kReferralTicks = 11;

struct FeeTicks {
  int buyer = 0;
  int seller = 0;
  int referral = 0;

  FeeSchedule schedule() const { return {buyer / 5.0, seller / 5.0, referral / 10.0}; }
  friend bool operator==(const FeeTicks&, const FeeTicks&) = default;
};

/// Nearest grid ticks; throws std::invalid_argument if the schedule is off-grid.
FeeTicks fee_ticks(const FeeSchedule& fees);

/// Admissible grid points in (buyer, seller, referral) lexicographic order.
/// A freeze yields the frozen schedule alone.
std::vector<FeeTicks> fee_tick_space(const RegulationRegime& regime);
std::vector<FeeSchedule> fee_action_space(const RegulationRegime& regime);

enum class RewardTiming { same_epoch, next_epoch_subscriptions };

struct RewardBreakdown {
  RevenueBreakdown revenue;  // as attributed to this step
  double tax = 0.0;
  double surplus_bonus = 0.0;
  double total = 0.0;
};

/// Tax charged on the given revenue under `regime` (0 unless a tax regime).
double tax_amount(const RevenueBreakdown& revenue, const RegulationRegime& regime);

/// Platform reward for one epoch. With next_epoch_subscriptions timing the
/// subscription revenue is taken from `next_subscriptions` (zero after the
/// last epoch) and referrals from `ledger`. Throws std::logic_error on an
/// unfinalized ledger.
RewardBreakdown reward(const EpochLedger& ledger, const RegulationRegime& regime, RewardTiming timing,
                       const RevenueBreakdown& next_subscriptions = {});

}  // namespace platsim
