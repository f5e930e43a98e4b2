#include <doctest.h>

#include <fstream>

#include "helpers.hpp"
#include "platsim/config.hpp"

using namespace platsim;

TEST_SUITE("config") {
  TEST_CASE("defaults survive a round trip") {
    const EnvConfig d;
    const auto back = parse_config(dump_config(d));
    CHECK(dump_config(back) == dump_config(d));
    CHECK(config_hash(back) == config_hash(d));
    CHECK(parse_config("{}").epochs == 12);
  }

  TEST_CASE("every field round trips") {
    EnvConfig c;
    c.market.structure = StructureKind::two_core;
    c.market.n_buyers = 7;
    c.market.rho = 0.35;
    c.shock.enabled = false;
    c.shock.constant_friction = 0.45;
    c.epochs = 9;
    c.timesteps = 70;
    c.subscription.p_wake = 0.6;
    c.subscription.sleepers_accrue_inertia = false;
    c.subscription.mode = DecisionMode::best_response;
    c.inertia_bound = 5;
    c.mode = EnvMode::matching;
    c.fixed_strategy = {MatchingRule::profit_driven, 4};
    c.fixed_fees = {0.4, 1.6, 0.3};
    c.tracker_update = TrackerUpdate::on_recommendation;
    c.time_features = false;
    c.discount = 0.9;
    c.regime = RegulationRegime::fee_cap({1.0, std::nullopt, 0.2});
    const auto back = parse_config(dump_config(c));
    CHECK(dump_config(back) == dump_config(c));
    CHECK(back.market.structure == StructureKind::two_core);
    CHECK(back.subscription.mode == DecisionMode::best_response);
    CHECK_FALSE(back.regime.caps.seller_subscription);
    CHECK(back.regime.caps.referral_rate == 0.2);
    CHECK(back.fixed_strategy == c.fixed_strategy);
    CHECK(config_hash(back) == config_hash(c));
  }

  TEST_CASE("unknown keys and bad values are rejected") {
    CHECK_THROWS_AS(parse_config(R"({"market": {"n_byers": 3}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"markets": {}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"market": {"structure": "ring"}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"market": {"rho": "high"}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"market": {"rho": 1.5}})"), ConfigError);
    CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
    CHECK_THROWS_AS(parse_config("[]"), ConfigError);
  }

  TEST_CASE("errors name the field") {
    try {
      parse_config(R"({"shock": {"pre": "three"}})");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("shock.pre") != std::string::npos);
    }
  }

  TEST_CASE("overrides") {
    const EnvConfig d;
    const std::vector<std::string> o{"market.structure=uniform", "market.n_buyers=4", "regulation.kind=tax",
                                     "regulation.tax_rate=0.5", "platform.fees.P_B=0.8", "regulation.caps.P_S=null"};
    const auto c = apply_overrides(d, o);
    CHECK(c.market.structure == StructureKind::uniform);
    CHECK(c.market.n_buyers == 4);
    CHECK(c.regime.kind == RegimeKind::tax);
    CHECK(c.regime.tax_rate == 0.5);
    CHECK(c.fixed_fees.buyer_subscription == 0.8);
    CHECK_FALSE(c.regime.caps.seller_subscription);
    CHECK(config_hash(c) != config_hash(d));

    CHECK_THROWS_AS(apply_overrides(d, std::vector<std::string>{"market.bogus=1"}), ConfigError);
    CHECK_THROWS_AS(apply_overrides(d, std::vector<std::string>{"nothing"}), ConfigError);
    CHECK_THROWS_AS(apply_overrides(d, std::vector<std::string>{"market.n_buyers=-3"}), ConfigError);
  }

  TEST_CASE("files") {
    test::TempDir dir("config");
    EnvConfig c;
    c.market.rho = 0.7;
    save_config(c, dir.path() / "a.json");
    CHECK(load_config(dir.path() / "a.json").market.rho == 0.7);
    try {
      load_config(dir.path() / "missing.json");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("missing.json") != std::string::npos);
    }
    std::ofstream(dir.path() / "bad.json") << R"({"dynamics": {"epochs": 0}})";
    try {
      load_config(dir.path() / "bad.json");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("bad.json") != std::string::npos);
    }
  }

  TEST_CASE("hash format") {
    CHECK(hex64(0) == "0000000000000000");
    CHECK(hex64(0xdeadbeefULL) == "00000000deadbeef");
    CHECK(hex64(config_hash(EnvConfig{})).size() == 16);
  }
}
