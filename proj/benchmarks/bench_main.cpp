#include <benchmark/benchmark.h>

#include <random>

#include "platsim/matching.hpp"
#include "platsim/oracle.hpp"
#include "platsim/platform_env.hpp"
#include "platsim/protocol.hpp"

using namespace platsim;

namespace {

EnvConfig sized(int n) {
  EnvConfig c;
  c.market.n_buyers = n;
  c.market.n_sellers = n;
  return c;
}

void BM_FeeEpisode(benchmark::State& state) {
  const auto c = sized(static_cast<int>(state.range(0)));
  const int actions = PlatformEnv(c).action_count();
  std::uint64_t seed = 0;
  for (auto _ : state) {
    auto ep = run_episode(c, random_policy(seed, actions), seed);
    benchmark::DoNotOptimize(ep);
    ++seed;
  }
}
BENCHMARK(BM_FeeEpisode)->Arg(5)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_MatchingEpisode(benchmark::State& state) {
  auto c = sized(10);
  c.mode = EnvMode::matching;
  std::uint64_t seed = 0;
  for (auto _ : state) {
    auto ep = run_episode(c, random_policy(seed, kMatchingActionCount), seed);
    benchmark::DoNotOptimize(ep);
    ++seed;
  }
}
BENCHMARK(BM_MatchingEpisode)->Unit(benchmark::kMillisecond);

void BM_EnvStep(benchmark::State& state) {
  const auto c = sized(10);
  PlatformEnv env(c);
  std::uint64_t seed = 0;
  env.reset(seed);
  for (auto _ : state) {
    if (env.done()) {
      state.PauseTiming();
      env.reset(++seed);
      state.ResumeTiming();
    }
    benchmark::DoNotOptimize(env.step(static_cast<int>(seed % 100)));
  }
}
BENCHMARK(BM_EnvStep)->Unit(benchmark::kMicrosecond);

void BM_Recommend(benchmark::State& state) {
  const auto c = sized(10);
  const Market market = sample_env_market(c, SeedSet::from_root(1));
  std::vector<AgentId> candidates;
  for (const auto& s : market.sellers) candidates.push_back(s.id);
  SellerPlatformSurplusTracker tracker(market.sellers.size());
  const FeeSchedule fees{1.2, 2.0, 0.1};
  const MatchingStrategy strategy{MatchingRule::seller_aware, static_cast<int>(state.range(0))};
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (auto _ : state) {
    const LatentPoint q{unif(rng), unif(rng)};
    benchmark::DoNotOptimize(recommend(q, market.sellers, candidates, strategy, tracker, fees, market.kernel));
  }
}
BENCHMARK(BM_Recommend)->Arg(3)->Arg(10);

void BM_SolveCase(benchmark::State& state) {
  const auto e = oracle::ToyEconomy::make(oracle::Rational(100), oracle::Rational(1, 100));
  for (auto _ : state) {
    benchmark::DoNotOptimize(oracle::solve_case(e, oracle::ToyCase::revenue_rational_matching));
  }
}
BENCHMARK(BM_SolveCase)->Unit(benchmark::kMillisecond);

void BM_ProtocolStateRoundTrip(benchmark::State& state) {
  protocol::State s;
  s.observation.assign(309, 0.0);
  for (std::size_t i = 0; i < s.observation.size(); ++i) s.observation[i] = 0.001 * static_cast<double>(i * i);
  s.reward = 12.5;
  s.info.stage = "shock";
  s.info.ledger_digest = "0123456789abcdef";
  for (auto _ : state) {
    const auto line = protocol::serialize(s);
    benchmark::DoNotOptimize(protocol::parse(line));
  }
}
BENCHMARK(BM_ProtocolStateRoundTrip)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
