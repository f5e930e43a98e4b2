#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace platsim {

using Rng = std::mt19937_64;

/// Child seed for a named stream. Pure function of (root, label).
std::uint64_t derive_seed(std::uint64_t root, std::string_view label);

/// Independent seeds for the market draw, the knowledge matrix, the shock
/// schedule and the per-episode stochastic stream (queries, wake-ups, logit
/// draws). Changing one leaves the others untouched.
struct SeedSet {
  std::uint64_t market = 0;
  std::uint64_t knowledge = 0;
  std::uint64_t shock = 0;
  std::uint64_t episode = 0;

  static SeedSet from_root(std::uint64_t root);
};

}  // namespace platsim
