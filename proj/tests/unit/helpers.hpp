#pragma once

#include <atomic>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "platsim/dynamics.hpp"
#include "platsim/platform_env.hpp"

namespace platsim::test {

inline BuyerSpec buyer(AgentId id, LatentPoint at, std::vector<AgentId> known, double budget = 10.0) {
  BuyerSpec b;
  b.id = id;
  b.location = at;
  b.known_sellers = std::move(known);
  b.epoch_budget = budget;
  return b;
}

inline SellerSpec seller(AgentId id, LatentPoint at, double cost = 0.3) {
  SellerSpec s;
  s.id = id;
  s.location = at;
  s.cost_fraction = cost;
  return s;
}

inline Market market(std::vector<BuyerSpec> buyers, std::vector<SellerSpec> sellers) {
  Market m;
  m.buyers = std::move(buyers);
  m.sellers = std::move(sellers);
  m.kernel = UtilityKernel::exponential(2.0);
  m.validate();
  return m;
}

/// Generated market with knowledge, as an environment would sample it.
inline Market random_market(std::uint64_t seed, int n_buyers = 10, int n_sellers = 10, double rho = 0.5,
                            StructureKind structure = StructureKind::core_and_niche) {
  EnvConfig c;
  c.market.structure = structure;
  c.market.n_buyers = n_buyers;
  c.market.n_sellers = n_sellers;
  c.market.rho = rho;
  return sample_env_market(c, SeedSet::from_root(seed));
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("platsim-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace platsim::test
