#include <doctest.h>

#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "platsim/config.hpp"
#include "platsim/run_log.hpp"

using namespace platsim;

namespace {

EnvConfig small() {
  EnvConfig c;
  c.market.n_buyers = 4;
  c.market.n_sellers = 5;
  c.timesteps = 30;
  c.epochs = 7;
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

}  // namespace

TEST_SUITE("run_log") {
  TEST_CASE("logs read back exactly") {
    test::TempDir dir("runlog");
    for (auto mode : {EnvMode::fee_setting, EnvMode::matching}) {
      auto c = small();
      c.mode = mode;
      c.regime = RegulationRegime::tax(TaxCategory::referrals, 0.2);
      PlatformEnv probe(c);
      const auto rec = run_episode(c, random_policy(5, probe.action_count()), 21);
      const auto sink = dir.path() / to_string(mode);
      const auto id = log_run(rec, c, sink);
      CHECK(id == "seed-21");
      const auto back = read_run(sink / id);
      CHECK(back.seed == 21);
      CHECK(back.mode == mode);
      CHECK(back.config_hash == hex64(config_hash(c)));
      CHECK(dump_config(back.config) == dump_config(c));
      CHECK(back.code_version == version());
      REQUIRE(back.ledgers.size() == rec.epochs.size());
      for (std::size_t k = 0; k < rec.epochs.size(); ++k) {
        CAPTURE(k);
        CHECK(back.ledgers[k] == rec.epochs[k].ledger);
        CHECK(back.epochs[k].ledger_digest == hex64(ledger_digest(rec.epochs[k].ledger)));
        CHECK(back.epochs[k].reward == rec.epochs[k].reward.total);
        CHECK(back.epochs[k].tax == rec.epochs[k].welfare.tax);
        CHECK(back.epochs[k].stage == rec.epochs[k].stage);
        CHECK(back.epochs[k].strategy == rec.epochs[k].strategy);
      }
      CHECK(back.epochs.front().stage == ShockStage::warm_up);
      CHECK(back.sellers.size() == rec.epochs.size() * 5);
    }
  }

  TEST_CASE("identical runs give identical files") {
    test::TempDir a("runlog-a");
    test::TempDir b("runlog-b");
    const auto c = small();
    PlatformEnv probe(c);
    log_run(run_episode(c, random_policy(1, probe.action_count()), 3), c, a.path());
    log_run(run_episode(c, random_policy(1, probe.action_count()), 3), c, b.path());
    for (const char* f : {"transactions.csv", "buyers.csv", "sellers.csv", "epochs.csv", "manifest.json"}) {
      CAPTURE(f);
      CHECK(slurp(a.path() / "seed-3" / f) == slurp(b.path() / "seed-3" / f));
    }
  }

  TEST_CASE("epochs file has one row per epoch plus the warm-up") {
    test::TempDir dir("runlog-rows");
    const auto c = small();
    PlatformEnv env(c);
    env.reset(2);
    // not stepped: only the warm-up
    log_run(env.record(), c, dir.path());
    const auto back = read_run(dir.path() / "seed-2");
    CHECK(back.epochs.size() == 1);
    CHECK(back.ledgers.size() == 1);
  }

  TEST_CASE("listing runs") {
    test::TempDir dir("runlog-list");
    const auto c = small();
    for (std::uint64_t s : {4, 2, 9}) log_run(run_episode(c, constant_policy(0), s), c, dir.path() / "group");
    const auto runs = list_runs(dir.path());
    REQUIRE(runs.size() == 3);
    CHECK(runs[0].filename() == "seed-2");
    CHECK(runs[2].filename() == "seed-9");
    CHECK_THROWS_AS(list_runs(dir.path() / "nothing"), RunLogError);
  }

  TEST_CASE("errors carry the path") {
    test::TempDir dir("runlog-err");
    try {
      read_run(dir.path() / "absent");
      FAIL("expected RunLogError");
    } catch (const RunLogError& e) {
      CHECK(std::string(e.what()).find("absent") != std::string::npos);
    }
    const auto c = small();
    log_run(run_episode(c, constant_policy(0), 1), c, dir.path());
    std::ofstream(dir.path() / "seed-1" / "epochs.csv") << "epoch,stage\n1,nowhere\n";
    try {
      read_run(dir.path() / "seed-1");
      FAIL("expected RunLogError");
    } catch (const RunLogError& e) {
      CHECK(std::string(e.what()).find("epochs.csv") != std::string::npos);
    }
  }

  TEST_CASE("a tampered log fails the digest check") {
    test::TempDir dir("runlog-digest");
    const auto c = small();
    log_run(run_episode(c, constant_policy(0), 1), c, dir.path());
    const auto path = dir.path() / "seed-1" / "transactions.csv";
    std::string text = slurp(path);
    REQUIRE(text.size() > 2);
    text.pop_back();  // trailing newline
    text.erase(text.rfind('\n') + 1);
    std::ofstream(path, std::ios::binary) << text;
    try {
      read_run(dir.path() / "seed-1");
      FAIL("expected RunLogError");
    } catch (const RunLogError& e) {
      CHECK(std::string(e.what()).find("digest") != std::string::npos);
    }
  }
}
