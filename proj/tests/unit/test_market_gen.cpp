#include <doctest.h>

#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "platsim/market_gen.hpp"
#include "platsim/seeds.hpp"

using namespace platsim;

namespace {

// Mean of N(mu, sigma^2) truncated to [0, 1].
double truncated_mean(double mu, double sigma) {
  const auto pdf = [](double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); };
  const auto cdf = [](double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); };
  const double a = (0.0 - mu) / sigma;
  const double b = (1.0 - mu) / sigma;
  return mu + sigma * (pdf(a) - pdf(b)) / (cdf(b) - cdf(a));
}

}  // namespace

TEST_SUITE("market_gen") {
  TEST_CASE("same seed, same market") {
    const auto s = MarketStructure::core_and_niche();
    const auto a = sample_market(s, 10, 10, 42);
    const auto b = sample_market(s, 10, 10, 42);
    REQUIRE(a.buyers.size() == 10);
    for (int i = 0; i < 10; ++i) {
      CHECK(a.buyers[i].location == b.buyers[i].location);
      CHECK(a.sellers[i].location == b.sellers[i].location);
      CHECK(a.sellers[i].cost_fraction == b.sellers[i].cost_fraction);
    }
    const auto c = sample_market(s, 10, 10, 43);
    CHECK_FALSE(a.buyers[0].location == c.buyers[0].location);
  }

  TEST_CASE("generated attributes are in range") {
    for (auto kind : {StructureKind::uniform, StructureKind::core_and_niche, StructureKind::two_core}) {
      const auto m = sample_market(MarketStructure::of(kind), 7, 9, 5);
      for (const auto& b : m.buyers) {
        CHECK(b.location.taste >= 0.0);
        CHECK(b.location.taste <= 1.0);
        CHECK(b.epoch_budget == doctest::Approx(10.0 * b.location.price_level));
        CHECK(b.query_stddev == doctest::Approx(std::sqrt(0.02)));
      }
      for (const auto& s : m.sellers) {
        CHECK(s.cost_fraction >= 0.2);
        CHECK(s.cost_fraction <= 0.4);
        CHECK(s.shutdown_threshold == 2);
        CHECK(s.fixed_cost == 0.0);
      }
    }
    CHECK_THROWS_AS(sample_market(MarketStructure::uniform(), 0, 3, 1), std::invalid_argument);
  }

  TEST_CASE("core-and-niche sample mean") {
    const auto s = MarketStructure::core_and_niche();
    double t = 0.0;
    double p = 0.0;
    int n = 0;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
      const auto m = sample_market(s, 10, 1, seed);
      for (const auto& b : m.buyers) {
        t += b.location.taste;
        p += b.location.price_level;
        ++n;
      }
    }
    t /= n;
    p /= n;
    CHECK(std::abs(t - 0.5) < 0.02);
    CHECK(std::abs(p - 0.4) < 0.02);
    CHECK(std::abs(t - truncated_mean(0.5, 0.2)) < 0.006);
    CHECK(std::abs(p - truncated_mean(0.4, 0.2)) < 0.006);
  }

  TEST_CASE("two-core split") {
    const auto m = sample_market(MarketStructure::two_core(), 10, 10, 3);
    int first = 0;
    for (int c : m.buyer_core) first += c == 0;
    CHECK(first == 5);
    for (int i = 0; i < 5; ++i) CHECK(m.seller_core[i] == 0);
    for (int i = 5; i < 10; ++i) CHECK(m.seller_core[i] == 1);
    const auto odd = sample_market(MarketStructure::two_core(), 7, 7, 3);
    CHECK(odd.buyer_core[3] == 0);
    CHECK(odd.buyer_core[4] == 1);
  }

  TEST_CASE("knowledge extremes") {
    CHECK(sample_knowledge(10, 10, 0.0, 1).density() == 0.0);
    CHECK(sample_knowledge(10, 10, 1.0, 1).density() == 1.0);
    CHECK_THROWS_AS(sample_knowledge(2, 2, 1.5, 1), std::invalid_argument);
  }

  TEST_CASE("knowledge density") {
    for (double rho : {0.2, 0.5, 0.8}) {
      double sum = 0.0;
      for (std::uint64_t seed = 0; seed < 1000; ++seed) sum += sample_knowledge(10, 10, rho, seed).density();
      CHECK(std::abs(sum / 1000.0 - rho) < 0.01);
    }
  }

  TEST_CASE("knowledge is nested in rho") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto lo = sample_knowledge(8, 8, 0.3, seed);
      const auto hi = sample_knowledge(8, 8, 0.6, seed);
      for (int b = 0; b < 8; ++b) {
        for (int s = 0; s < 8; ++s) {
          if (lo.known(b, s)) CHECK(hi.known(b, s));
        }
      }
    }
  }

  TEST_CASE("shock schedule stages") {
    const auto sch = sample_shock_schedule(12, 3, 3, 0.8, 1.0, 0.1, 9);
    REQUIRE(sch.epochs() == 12);
    CHECK(sch.intensity >= 0.8);
    CHECK(sch.intensity <= 1.0);
    for (int k = 0; k < 12; ++k) {
      if (k < 3) {
        CHECK(sch.stages[k] == ShockStage::pre);
        CHECK(sch.frictions[k] == 0.1);
      } else if (k >= 9) {
        CHECK(sch.stages[k] == ShockStage::post);
        CHECK(sch.frictions[k] == 0.1);
      } else {
        CHECK(sch.stages[k] == ShockStage::shock);
        CHECK(sch.frictions[k] > 0.0);
      }
    }
    const auto again = sample_shock_schedule(12, 3, 3, 0.8, 1.0, 0.1, 9);
    CHECK(again.frictions == sch.frictions);
  }

  TEST_CASE("infeasible shock windows") {
    CHECK_THROWS_AS(sample_shock_schedule(6, 3, 3, 0.8, 1.0, 0.1, 0), std::invalid_argument);
    CHECK_THROWS_AS(sample_shock_schedule(12, 2, 3, 0.8, 1.0, 0.1, 0), std::invalid_argument);
    CHECK_THROWS_AS(sample_shock_schedule(12, 3, 3, 1.0, 0.8, 0.1, 0), std::invalid_argument);
    CHECK_NOTHROW(sample_shock_schedule(7, 3, 3, 0.8, 1.0, 0.1, 0));
  }

  TEST_CASE("zero intensity falls back to base friction") {
    const auto sch = sample_shock_schedule(10, 3, 3, 0.0, 0.0, 0.1, 4);
    for (double f : sch.frictions) CHECK(f == 0.1);
  }

  TEST_CASE("seed streams are independent") {
    const auto a = SeedSet::from_root(11);
    const auto b = SeedSet::from_root(11);
    CHECK(a.market == b.market);
    CHECK(a.market != a.knowledge);
    CHECK(a.shock != a.episode);
    CHECK(derive_seed(11, "x") == derive_seed(11, "x"));
    CHECK(derive_seed(11, "x") != derive_seed(12, "x"));
  }

  TEST_CASE("seller classes") {
    const auto structure = MarketStructure::core_and_niche();
    std::vector<BuyerSpec> buyers{test::buyer(0, {0.5, 0.4}, {}), test::buyer(1, {0.55, 0.45}, {}),
                                  test::buyer(2, {0.05, 0.95}, {})};
    std::vector<SellerSpec> sellers{test::seller(0, {0.5, 0.42}), test::seller(1, {0.95, 0.95}),
                                    test::seller(2, {0.1, 0.05}), test::seller(3, {0.6, 0.6}),
                                    test::seller(4, {0.45, 0.7}), test::seller(5, {0.9, 0.1})};
    CHECK(seller_class(sellers[0], structure, buyers, sellers) == SellerClass::core);
    CHECK(seller_class(sellers[1], structure, buyers, sellers) == SellerClass::niche);
    CHECK(seller_class(sellers[2], structure, buyers, sellers) == SellerClass::cheap);
    CHECK(seller_class(sellers[4], structure, buyers, sellers) == SellerClass::other);

    // cheap wins over core
    SellerClassOptions cutoff;
    cutoff.cheap_price_cutoff = 0.5;
    const auto f = seller_class_flags(sellers[0], structure, buyers, sellers, cutoff);
    CHECK(f.cheap);
    CHECK(f.core);
    CHECK(seller_class(sellers[0], structure, buyers, sellers, cutoff) == SellerClass::cheap);

    const auto u = MarketStructure::uniform();
    CHECK(seller_class(sellers[3], u, buyers, sellers) == SellerClass::other);
    CHECK(seller_class(sellers[2], u, buyers, sellers) == SellerClass::cheap);
  }
}
