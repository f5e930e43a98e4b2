#include <doctest.h>

#include <set>
#include <tuple>

#include "platsim/regulation.hpp"

using namespace platsim;

namespace {

EpochLedger ledger_with(RevenueBreakdown revenue, double buyer_platform = 0.0, double seller_platform = 0.0) {
  EpochLedger l;
  l.revenue = revenue;
  BuyerEpoch b;
  b.on_platform = true;
  b.surplus_platform = buyer_platform;
  l.buyers.push_back(b);
  SellerEpoch s;
  s.on_platform = true;
  s.surplus_platform = seller_platform;
  l.sellers.push_back(s);
  l.finalized = true;
  return l;
}

}  // namespace

TEST_SUITE("regulation") {
  TEST_CASE("grid sizes") {
    CHECK(fee_tick_space(RegulationRegime::laissez_faire()).size() == 28611);
    CHECK(fee_tick_space(RegulationRegime::surplus_aware()).size() == 28611);
    CHECK(fee_tick_space(RegulationRegime::tax(TaxCategory::referrals)).size() == 28611);
    CHECK(fee_tick_space(RegulationRegime::fee_cap()).size() == 11 * 11 * 2);
    CHECK(fee_tick_space(RegulationRegime::fee_freeze()).size() == 1);
    CHECK(fee_tick_space(RegulationRegime::fee_cap({std::nullopt, 0.0, std::nullopt})).size() == 51 * 1 * 11);
  }

  TEST_CASE("grid order and values") {
    const auto space = fee_tick_space(RegulationRegime::laissez_faire());
    CHECK(space.front() == FeeTicks{0, 0, 0});
    CHECK(space[1] == FeeTicks{0, 0, 1});
    CHECK(space[11] == FeeTicks{0, 1, 0});
    CHECK(space.back() == FeeTicks{50, 50, 10});
    std::set<std::tuple<int, int, int>> unique;
    for (const auto& t : space) unique.insert({t.buyer, t.seller, t.referral});
    CHECK(unique.size() == space.size());
    const auto last = space.back().schedule();
    CHECK(last.buyer_subscription == 10.0);
    CHECK(last.referral_rate == 1.0);
    for (const auto& f : fee_action_space(RegulationRegime::fee_cap())) {
      CHECK(f.buyer_subscription <= 2.0 + 1e-12);
      CHECK(f.seller_subscription <= 2.0 + 1e-12);
      CHECK(f.referral_rate <= 0.1 + 1e-12);
    }
    CHECK(fee_action_space(RegulationRegime::fee_freeze()).front() == FeeSchedule{1.2, 2.0, 0.1});
  }

  TEST_CASE("fee ticks") {
    CHECK(fee_ticks({1.2, 2.0, 0.1}) == FeeTicks{6, 10, 1});
    CHECK(fee_ticks({0.6000000000000001, 0.0, 0.30000000000000004}) == FeeTicks{3, 0, 3});
    CHECK_THROWS_AS(fee_ticks({0.1, 0.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(fee_ticks({10.2, 0.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(fee_ticks({0.0, 0.0, 0.05}), std::invalid_argument);
  }

  TEST_CASE("regime validation") {
    CHECK_NOTHROW(RegulationRegime::laissez_faire().validate());
    CHECK_THROWS_AS(RegulationRegime::tax(TaxCategory::referrals, 1.5).validate(), std::invalid_argument);
    CHECK_THROWS_AS(RegulationRegime::surplus_aware(-0.1).validate(), std::invalid_argument);
    CHECK_THROWS_AS(RegulationRegime::fee_freeze({0.3, 0.0, 0.0}).validate(), std::invalid_argument);
    CHECK_THROWS_AS(RegulationRegime::fee_cap({-1.0, std::nullopt, std::nullopt}).validate(), std::invalid_argument);
  }

  TEST_CASE("names round trip") {
    for (auto k : {RegimeKind::laissez_faire, RegimeKind::surplus_aware, RegimeKind::tax, RegimeKind::fee_cap,
                   RegimeKind::fee_freeze}) {
      CHECK(parse_regime_kind(to_string(k)) == k);
    }
    for (auto c : {TaxCategory::buyer_subs, TaxCategory::seller_subs, TaxCategory::referrals,
                   TaxCategory::all_seller_fees}) {
      CHECK(parse_tax_category(to_string(c)) == c);
    }
    CHECK_FALSE(parse_regime_kind("anarchy"));
  }

  TEST_CASE("tax on referrals") {
    const auto l = ledger_with({10.0, 5.0, 3.0});
    const auto r = reward(l, RegulationRegime::tax(TaxCategory::referrals, 0.2), RewardTiming::same_epoch);
    CHECK(r.tax == doctest::Approx(0.6));
    CHECK(r.total == doctest::Approx(17.4));
    CHECK(tax_amount(l.revenue, RegulationRegime::tax(TaxCategory::buyer_subs, 0.2)) == doctest::Approx(2.0));
    CHECK(tax_amount(l.revenue, RegulationRegime::tax(TaxCategory::seller_subs, 0.2)) == doctest::Approx(1.0));
    CHECK(tax_amount(l.revenue, RegulationRegime::tax(TaxCategory::all_seller_fees, 0.2)) == doctest::Approx(1.6));
    CHECK(tax_amount(l.revenue, RegulationRegime::laissez_faire()) == 0.0);
  }

  TEST_CASE("surplus-aware bonus") {
    const auto l = ledger_with({6.0, 3.0, 1.0}, 12.0, 8.0);
    const auto r = reward(l, RegulationRegime::surplus_aware(0.4), RewardTiming::same_epoch);
    CHECK(r.surplus_bonus == doctest::Approx(8.0));
    CHECK(r.total == doctest::Approx(18.0));
    CHECK(reward(l, RegulationRegime::laissez_faire(), RewardTiming::same_epoch).total == doctest::Approx(10.0));
  }

  TEST_CASE("next-epoch subscription timing") {
    const auto l = ledger_with({6.0, 3.0, 1.0});
    const auto r = reward(l, RegulationRegime::laissez_faire(), RewardTiming::next_epoch_subscriptions, {2.0, 0.5, 99.0});
    CHECK(r.revenue.buyer_subscriptions == 2.0);
    CHECK(r.revenue.seller_subscriptions == 0.5);
    CHECK(r.revenue.referrals == 1.0);
    CHECK(r.total == doctest::Approx(3.5));
    EpochLedger open;
    CHECK_THROWS_AS(reward(open, RegulationRegime::laissez_faire(), RewardTiming::same_epoch), std::logic_error);
  }

  TEST_CASE("caps admit on the boundary") {
    const FeeCaps caps{2.0, 2.0, 0.1};
    CHECK(caps.admits({2.0, 2.0, 0.1}));
    CHECK(caps.admits({0.4 * 5, 0.0, 0.1}));
    CHECK_FALSE(caps.admits({2.2, 0.0, 0.0}));
    CHECK_FALSE(caps.admits({0.0, 0.0, 0.2}));
  }
}
