#include <doctest.h>

#include <set>
#include <vector>

#include "helpers.hpp"
#include "platsim/matching.hpp"

using namespace platsim;

namespace {

const std::vector<SellerSpec> kSellers{test::seller(0, {0.0, 0.2}), test::seller(1, {0.0, 0.5}),
                                       test::seller(2, {0.0, 0.8}), test::seller(3, {0.0, 0.3})};
const std::vector<AgentId> kAll{0, 1, 2, 3};

}  // namespace

TEST_SUITE("matching") {
  TEST_CASE("action encoding") {
    std::set<std::pair<int, int>> seen;
    for (int a = 0; a < kMatchingActionCount; ++a) {
      const auto s = MatchingStrategy::from_action(a);
      CHECK(s.action() == a);
      seen.insert({static_cast<int>(s.rule), s.threshold_tick});
    }
    CHECK(seen.size() == 21);
    CHECK(MatchingStrategy::from_action(10).is_myopic());
    CHECK(MatchingStrategy{MatchingRule::profit_driven, 10}.action() == 10);
    CHECK(MatchingStrategy::from_action(11) == MatchingStrategy{MatchingRule::profit_driven, 0});
    CHECK(MatchingStrategy::from_action(20).threshold() == doctest::Approx(0.9));
    CHECK_THROWS_AS(MatchingStrategy::from_action(21), std::out_of_range);
    CHECK_THROWS_AS(MatchingStrategy::from_action(-1), std::out_of_range);
  }

  TEST_CASE("myopic argmax with lowest-id ties") {
    const std::vector<double> u{0.3, 0.9, 0.9, 0.1};
    CHECK(myopic(u, kAll) == 1);
    const std::vector<AgentId> some{2, 3};
    CHECK(myopic(u, some) == 2);
    CHECK_FALSE(myopic(u, std::vector<AgentId>{}));
  }

  TEST_CASE("eta = 1 is myopic under either rule") {
    Rng rng(0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const FeeSchedule fees{0.4, 0.6, 0.3};
    for (int i = 0; i < 500; ++i) {
      std::vector<double> u(4);
      std::vector<double> tracker(4);
      for (int s = 0; s < 4; ++s) {
        u[s] = unif(rng);
        tracker[s] = unif(rng) - 0.5;
      }
      const auto expect = myopic(u, kAll);
      CHECK(recommend(u, kAll, {MatchingRule::seller_aware, 10}, tracker, fees, kSellers) == expect);
      CHECK(recommend(u, kAll, {MatchingRule::profit_driven, 10}, tracker, fees, kSellers) == expect);
    }
  }

  TEST_CASE("seller-aware picks the seller closest to break-even") {
    const std::vector<double> u{0.9, 0.8, 0.7, 0.2};
    const FeeSchedule fees{0.0, 1.0, 0.1};
    // seller 3 is below the 0.5 cut
    const std::vector<double> tracker{-0.8, -0.3, 0.4, -0.1};
    CHECK(recommend(u, kAll, {MatchingRule::seller_aware, 5}, tracker, fees, kSellers) == 1);
    // all at or above break-even: the least ahead
    const std::vector<double> ahead{0.5, 0.2, 0.9, -1.0};
    CHECK(recommend(u, kAll, {MatchingRule::seller_aware, 5}, ahead, fees, kSellers) == 1);
    // eta = 0 admits everyone
    CHECK(recommend(u, kAll, {MatchingRule::seller_aware, 0}, tracker, fees, kSellers) == 3);
  }

  TEST_CASE("profit-driven picks the most expensive admissible seller") {
    const std::vector<double> u{0.9, 0.8, 0.6, 0.85};
    const FeeSchedule fees{0.0, 0.0, 0.2};
    const std::vector<double> tracker(4, 0.0);
    CHECK(recommend(u, kAll, {MatchingRule::profit_driven, 0}, tracker, fees, kSellers) == 2);
    CHECK(recommend(u, kAll, {MatchingRule::profit_driven, 7}, tracker, fees, kSellers) == 1);
    CHECK(recommend(u, kAll, {MatchingRule::profit_driven, 9}, tracker, fees, kSellers) == 3);
    // zero referral: every key ties and utility decides
    CHECK(recommend(u, kAll, {MatchingRule::profit_driven, 0}, tracker, FeeSchedule{}, kSellers) == 0);
  }

  TEST_CASE("ties break on utility then id") {
    const std::vector<double> u{0.5, 0.5, 0.5, 0.5};
    const std::vector<double> tracker{-0.2, -0.2, -0.2, -0.2};
    CHECK(recommend(u, kAll, {MatchingRule::seller_aware, 3}, tracker, {}, kSellers) == 0);
    const std::vector<SellerSpec> same_price{test::seller(0, {0.0, 0.5}), test::seller(1, {0.1, 0.5})};
    const std::vector<AgentId> both{0, 1};
    const std::vector<double> u2{0.6, 0.7};
    CHECK(recommend(u2, both, {MatchingRule::profit_driven, 0}, std::vector<double>(2, 0.0), {0, 0, 0.1}, same_price) ==
          1);
  }

  TEST_CASE("tracker") {
    SellerPlatformSurplusTracker t(4);
    const FeeSchedule fees{0.0, 0.7, 0.1};
    const std::vector<AgentId> subs{1, 3};
    t.reset(kSellers, subs, fees);
    CHECK(t[0] == 0.0);
    CHECK(t[1] == -0.7);
    t.credit(kSellers[1], fees);
    CHECK(t[1] == doctest::Approx(-0.7 + 0.5 * 0.6));
  }

  TEST_CASE("matcher credits on transaction or on recommendation") {
    const FeeSchedule fees{0.0, 0.5, 0.1};
    const std::vector<AgentId> subs{0, 1};
    const std::vector<double> u{0.9, 0.8, 0.0, 0.0};
    StrategyMatcher tx({MatchingRule::seller_aware, 5}, TrackerUpdate::on_transaction);
    StrategyMatcher rec({MatchingRule::seller_aware, 5}, TrackerUpdate::on_recommendation);
    tx.begin_epoch({kSellers, subs, fees});
    rec.begin_epoch({kSellers, subs, fees});
    CHECK(tx.recommend({0, 0, 0, {}, u}) == 0);
    CHECK(rec.recommend({0, 0, 0, {}, u}) == 0);
    CHECK(tx.tracker()[0] == -0.5);
    CHECK(rec.tracker()[0] > -0.5);
    tx.on_platform_transaction(0);
    CHECK(tx.tracker()[0] == rec.tracker()[0]);
  }

  TEST_CASE("scripted matcher") {
    ScriptedMatcher m({{2, std::nullopt}, {}});
    const std::vector<AgentId> subs{1, 2};
    m.begin_epoch({kSellers, subs, {}});
    const std::vector<double> u{0.9, 0.8, 0.1, 0.0};
    CHECK(m.recommend({0, 0, 0, {}, u}) == 2);
    CHECK(m.recommend({1, 0, 1, {}, u}) == 1);
    CHECK(m.recommend({2, 1, 0, {}, u}) == 1);
    const std::vector<AgentId> only1{1};
    m.begin_epoch({kSellers, only1, {}});
    CHECK(m.recommend({0, 0, 0, {}, u}) == 1);
  }

  TEST_CASE("kernel overload validates fees") {
    SellerPlatformSurplusTracker t(4);
    CHECK_THROWS_AS(recommend({0.0, 0.5}, kSellers, kAll, {}, t, FeeSchedule{0, 0, 2.0}, UtilityKernel::exponential(2)),
                    std::invalid_argument);
    CHECK(recommend({0.0, 0.5}, kSellers, kAll, {}, t, {}, UtilityKernel::exponential(2)) == 1);
    CHECK(myopic({0.0, 0.22}, kSellers, kAll, UtilityKernel::exponential(2)) == 0);
  }
}
