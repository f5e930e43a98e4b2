#include "platsim/regulation.hpp"

#include <cmath>
#include <stdexcept>

namespace platsim {

const char* to_string(RegimeKind kind) {
  switch (kind) {
    case RegimeKind::surplus_aware: return "surplus_aware";
    case RegimeKind::tax: return "tax";
    case RegimeKind::fee_cap: return "fee_cap";
    case RegimeKind::fee_freeze: return "fee_freeze";
    case RegimeKind::laissez_faire: break;
  }
  return "laissez_faire";
}

const char* to_string(TaxCategory category) {
  switch (category) {
    case TaxCategory::buyer_subs: return "buyer_subs";
    case TaxCategory::seller_subs: return "seller_subs";
    case TaxCategory::all_seller_fees: return "all_seller_fees";
    case TaxCategory::referrals: break;
  }
  return "referrals";
}

std::optional<RegimeKind> parse_regime_kind(std::string_view name) {
  for (auto k : {RegimeKind::laissez_faire, RegimeKind::surplus_aware, RegimeKind::tax, RegimeKind::fee_cap,
                 RegimeKind::fee_freeze}) {
    if (name == to_string(k)) return k;
  }
  return std::nullopt;
}

std::optional<TaxCategory> parse_tax_category(std::string_view name) {
  for (auto c : {TaxCategory::buyer_subs, TaxCategory::seller_subs, TaxCategory::referrals,
                 TaxCategory::all_seller_fees}) {
    if (name == to_string(c)) return c;
  }
  return std::nullopt;
}

namespace {

constexpr double kGridSlack = 1e-9;

bool under(const std::optional<double>& cap, double v) { return !cap || v <= *cap + kGridSlack; }

}  // namespace

bool FeeCaps::admits(const FeeSchedule& fees) const {
  return under(buyer_subscription, fees.buyer_subscription) && under(seller_subscription, fees.seller_subscription) &&
         under(referral_rate, fees.referral_rate);
}

RegulationRegime RegulationRegime::surplus_aware(double alpha) {
  RegulationRegime r;
  r.kind = RegimeKind::surplus_aware;
  r.alpha = alpha;
  return r;
}

RegulationRegime RegulationRegime::tax(TaxCategory category, double rate) {
  RegulationRegime r;
  r.kind = RegimeKind::tax;
  r.tax_category = category;
  r.tax_rate = rate;
  return r;
}

RegulationRegime RegulationRegime::fee_cap(FeeCaps caps) {
  RegulationRegime r;
  r.kind = RegimeKind::fee_cap;
  r.caps = caps;
  return r;
}

RegulationRegime RegulationRegime::fee_freeze(FeeSchedule fees) {
  RegulationRegime r;
  r.kind = RegimeKind::fee_freeze;
  r.frozen = fees;
  return r;
}

void RegulationRegime::validate() const {
  if (!std::isfinite(alpha) || alpha < 0.0) throw std::invalid_argument("regime: alpha must be finite and >= 0");
  if (!(tax_rate >= 0.0 && tax_rate <= 1.0)) throw std::invalid_argument("regime: tax rate must lie in [0,1]");
  for (const auto& c : {caps.buyer_subscription, caps.seller_subscription, caps.referral_rate}) {
    if (c && !(*c >= 0.0)) throw std::invalid_argument("regime: fee caps must be >= 0");
  }
  if (kind == RegimeKind::fee_freeze) fee_ticks(frozen);
}

FeeTicks fee_ticks(const FeeSchedule& fees) {
  fees.validate();
  FeeTicks t{static_cast<int>(std::lround(fees.buyer_subscription * 5.0)),
             static_cast<int>(std::lround(fees.seller_subscription * 5.0)),
             static_cast<int>(std::lround(fees.referral_rate * 10.0))};
  const FeeSchedule back = t.schedule();
  if (t.buyer >= kSubscriptionTicks || t.seller >= kSubscriptionTicks || t.referral >= kReferralTicks ||
      std::abs(back.buyer_subscription - fees.buyer_subscription) > kGridSlack ||
      std::abs(back.seller_subscription - fees.seller_subscription) > kGridSlack ||
      std::abs(back.referral_rate - fees.referral_rate) > kGridSlack) {
    throw std::invalid_argument("fee schedule is not on the fee grid");
  }
  return t;
}

std::vector<FeeTicks> fee_tick_space(const RegulationRegime& regime) {
  if (regime.kind == RegimeKind::fee_freeze) return {fee_ticks(regime.frozen)};
  std::vector<FeeTicks> out;
  out.reserve(static_cast<std::size_t>(kSubscriptionTicks) * kSubscriptionTicks * kReferralTicks);
  for (int b = 0; b < kSubscriptionTicks; ++b) {
    for (int s = 0; s < kSubscriptionTicks; ++s) {
      for (int r = 0; r < kReferralTicks; ++r) {
        const FeeTicks t{b, s, r};
        if (regime.kind == RegimeKind::fee_cap && !regime.caps.admits(t.schedule())) continue;
        out.push_back(t);
      }
    }
  }
  return out;
}

std::vector<FeeSchedule> fee_action_space(const RegulationRegime& regime) {
  std::vector<FeeSchedule> out;
  for (const auto& t : fee_tick_space(regime)) out.push_back(t.schedule());
  return out;
}

double tax_amount(const RevenueBreakdown& revenue, const RegulationRegime& regime) {
  if (regime.kind != RegimeKind::tax) return 0.0;
  double base = 0.0;
  switch (regime.tax_category) {
    case TaxCategory::buyer_subs: base = revenue.buyer_subscriptions; break;
    case TaxCategory::seller_subs: base = revenue.seller_subscriptions; break;
    case TaxCategory::referrals: base = revenue.referrals; break;
    case TaxCategory::all_seller_fees: base = revenue.seller_subscriptions + revenue.referrals; break;
  }
  return regime.tax_rate * base;
}

RewardBreakdown reward(const EpochLedger& ledger, const RegulationRegime& regime, RewardTiming timing,
                       const RevenueBreakdown& next_subscriptions) {
  if (!ledger.finalized) throw std::logic_error("reward: ledger is not finalized");
  RewardBreakdown r;
  r.revenue = ledger.revenue;
  if (timing == RewardTiming::next_epoch_subscriptions) {
    r.revenue.buyer_subscriptions = next_subscriptions.buyer_subscriptions;
    r.revenue.seller_subscriptions = next_subscriptions.seller_subscriptions;
  }
  r.tax = tax_amount(r.revenue, regime);
  if (regime.kind == RegimeKind::surplus_aware) r.surplus_bonus = regime.alpha * platform_side_surplus(ledger);
  r.total = r.revenue.total() - r.tax + r.surplus_bonus;
  return r;
}

}  // namespace platsim
