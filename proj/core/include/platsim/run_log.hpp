#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "platsim/market_gen.hpp"
#include "platsim/platform_env.hpp"

namespace platsim {

inline constexpr int kRunLogFormat = 1;

const char* version();

/// I/O or format failure; the message starts with the offending path.
class RunLogError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// "seed-<seed>".
std::string run_id(const EpisodeRecord& record);

/// Writes <sink>/<run id>/ with
///   transactions.csv  one row per arrival
///   buyers.csv        per-epoch buyer ledger rows
///   sellers.csv       per-epoch seller ledger rows, with the seller's class
///   epochs.csv        fees, strategy, friction, welfare decomposition, reward,
///                     subscriptions and bankruptcies; row 0 is the warm-up
///   manifest.json     config and its hash, seeds, code version
/// Doubles are written with 17 significant digits. Returns the run id.
std::string log_run(const EpisodeRecord& record, const EnvConfig& config, const std::filesystem::path& sink);

struct EpochRow {
  int epoch = 0;
  ShockStage stage = ShockStage::warm_up;
  double friction = 0.0;
  FeeSchedule fees;
  MatchingStrategy strategy;
  RevenueBreakdown revenue;
  double buyer_surplus = 0.0;
  double seller_surplus = 0.0;
  double platform_revenue = 0.0;
  double tax = 0.0;
  double welfare = 0.0;
  double reward = 0.0;
  double surplus_bonus = 0.0;
  int buyers_on = 0;
  int sellers_on = 0;
  int sellers_bankrupt = 0;  // after close-out
  std::string ledger_digest;
};

struct SellerRow {
  int epoch = 0;
  AgentId seller = 0;
  SellerClass seller_class = SellerClass::other;
  bool bankrupt_after = false;
};

struct LoggedRun {
  std::string run_id;
  std::uint64_t seed = 0;
  SeedSet seeds;
  EnvMode mode = EnvMode::fee_setting;
  std::string config_hash;
  EnvConfig config;
  std::string code_version;
  std::vector<EpochRow> epochs;
  std::vector<SellerRow> sellers;
  /// Ledgers rebuilt from the CSV files, transactions included.
  std::vector<EpochLedger> ledgers;
};

LoggedRun read_run(const std::filesystem::path& run_dir);

/// Run directories under `sink` (anything holding a manifest.json), sorted.
std::vector<std::filesystem::path> list_runs(const std::filesystem::path& sink);

}  // namespace platsim
