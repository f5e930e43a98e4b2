#include <doctest.h>

#include <algorithm>

#include "platsim/oracle.hpp"

using namespace platsim::oracle;

namespace {

const Rational kAlpha{7, 10};

struct Point {
  Rational m;
  Rational eps;
};

const Point kPoints[] = {{Rational(1), Rational(1, 100)}, {Rational(2), Rational(1, 10)}, {Rational(5), Rational(1, 20)},
                         {Rational(3, 2), Rational(1, 9)}};

}  // namespace

TEST_SUITE("oracle") {
  TEST_CASE("rational parsing") {
    CHECK(parse_rational("3") == Rational(3));
    CHECK(parse_rational("-2/7") == Rational(-2, 7));
    CHECK(parse_rational("0.015") == Rational(3, 200));
    CHECK(to_string(Rational(6, 4)) == "3/2");
    CHECK_THROWS_AS(parse_rational("abc"), std::invalid_argument);
    CHECK_THROWS_AS(parse_rational("1/0"), std::invalid_argument);
  }

  TEST_CASE("economy bounds") {
    CHECK_THROWS_AS(ToyEconomy::make(Rational(1), Rational(1, 8)), std::invalid_argument);
    CHECK_THROWS_AS(ToyEconomy::make(Rational(0), Rational(1, 100)), std::invalid_argument);
    CHECK_THROWS_AS(ToyEconomy::make(Rational(1), Rational(0)), std::invalid_argument);
    const auto e = ToyEconomy::make(Rational(1), Rational(1, 100));
    CHECK(e.utility(Group::q11, 0) == Rational(199, 100));
    CHECK(e.utility(Group::q2, 1) == Rational(99, 100));
    CHECK(e.group_size(Group::q2) == Rational(2));
  }

  TEST_CASE("surplus-aware threshold") {
    CHECK(surplus_aware_threshold(Rational(1, 100)) == Rational(53, 102));
    const auto e = ToyEconomy::make(Rational(1), Rational(1, 100));
    CHECK_THROWS_AS(solve_case(e, ToyCase::surplus_aware, Rational(1, 2)), std::invalid_argument);
    CHECK_THROWS_AS(solve_case(e, ToyCase::surplus_aware, Rational(1)), std::invalid_argument);
    CHECK_THROWS_AS(solve_case(e, ToyCase::surplus_aware), std::invalid_argument);
  }

  TEST_CASE("closed-form revenue and welfare") {
    for (const auto& p : kPoints) {
      CAPTURE(to_string(p.m));
      CAPTURE(to_string(p.eps));
      const auto e = ToyEconomy::make(p.m, p.eps);
      const auto none = solve_case(e, ToyCase::no_platform);
      const auto my = solve_case(e, ToyCase::revenue_myopic);
      const auto rat = solve_case(e, ToyCase::revenue_rational_matching);
      const auto sa = solve_case(e, ToyCase::surplus_aware, kAlpha);
      const auto ideal = solve_case(e, ToyCase::ideal);

      CHECK(none.revenue == Rational(0));
      CHECK(my.revenue == (Rational(5) + 2 * p.eps) * p.m);
      CHECK(rat.revenue == (Rational(6) - 4 * p.eps) * p.m);
      CHECK(sa.revenue == (Rational(4) - 4 * p.eps) * p.m);
      CHECK(sa.welfare == (Rational(7) - 2 * p.eps) * p.m);
      CHECK(ideal.welfare == sa.welfare);

      CHECK(rat.revenue > my.revenue);
      CHECK(my.revenue > sa.revenue);
      CHECK(rat.welfare >= my.welfare);
      CHECK(my.welfare >= none.welfare);
      CHECK(sa.welfare >= rat.welfare);
      for (bool on : sa.outcome.on) CHECK(on);
    }
  }

  TEST_CASE("welfare equals the sum of surpluses and revenue") {
    const auto e = ToyEconomy::make(Rational(2), Rational(1, 10));
    for (auto c : {ToyCase::no_platform, ToyCase::revenue_myopic, ToyCase::revenue_rational_matching,
                   ToyCase::surplus_aware, ToyCase::ideal}) {
      const auto r = solve_case(e, c, c == ToyCase::surplus_aware ? std::optional(kAlpha) : std::nullopt);
      CHECK(r.welfare == r.buyer_surplus[0] + r.buyer_surplus[1] + r.seller_surplus[0] + r.seller_surplus[1] + r.revenue);
    }
  }

  TEST_CASE("stackelberg fees match a search over the fee grid") {
    // Independent route: platform-preferred follower equilibrium at every
    // grid point (steps of 1/5), keep the revenue maximizer.
    const auto e = ToyEconomy::make(Rational(2), Rational(1, 10));
    std::optional<EquilibriumResult> best;
    for (int b = 0; b <= 60; ++b) {
      for (int s = 0; s <= 60; ++s) {
        const auto r = follower_equilibrium(e, {Rational(b, 5), Rational(s, 5)});
        if (r && (!best || r->revenue > best->revenue)) best = r;
      }
    }
    REQUIRE(best);
    const auto solved = solve_case(e, ToyCase::revenue_myopic);
    CHECK(best->revenue == solved.revenue);
    CHECK(best->fees == solved.fees);
    CHECK(solved.fees == ToyFees{Rational(11, 5), Rational(6)});
  }

  TEST_CASE("follower equilibria at zero fees") {
    const auto e = ToyEconomy::make(Rational(1), Rational(1, 100));
    const auto eq = follower_equilibria(e, {}, Routing{});
    CHECK_FALSE(eq.empty());
    // free access: everyone on is stable
    CHECK(std::find(eq.begin(), eq.end(), 0b1111) != eq.end());
  }

  TEST_CASE("engine replays every case") {
    for (const auto& p : {kPoints[0], kPoints[1], kPoints[2]}) {
      const auto e = ToyEconomy::make(p.m, p.eps);
      for (auto c : {ToyCase::no_platform, ToyCase::revenue_myopic, ToyCase::revenue_rational_matching,
                     ToyCase::surplus_aware, ToyCase::ideal}) {
        const auto rep = verify_against_engine(e, c, c == ToyCase::surplus_aware ? std::optional(kAlpha) : std::nullopt);
        CAPTURE(rep.first_divergence);
        CHECK(rep.ok);
        CHECK(rep.max_error < 1e-9);
        CHECK_FALSE(rep.checks.empty());
      }
    }
  }

  TEST_CASE("report lists all five cases") {
    const auto text = format_report(ToyEconomy::make(Rational(1), Rational(1, 100)), kAlpha);
    for (const char* s : {"No platform", "Revenue-maximizing", "Rational matching", "Surplus-aware (0.7)", "Ideal"}) {
      CHECK(text.find(s) != std::string::npos);
    }
    CHECK(text.find("5.02") != std::string::npos);
    CHECK(text.find("5.96") != std::string::npos);
    CHECK(text.find("3.96") != std::string::npos);
  }
}
