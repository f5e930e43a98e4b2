#include "platsim/run_log.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "platsim/config.hpp"
#include "platsim/protocol.hpp"

#ifndef PLATSIM_VERSION
#define PLATSIM_VERSION "unknown"
#endif

namespace platsim {

namespace fs = std::filesystem;
using nlohmann::json;

const char* version() { return PLATSIM_VERSION; }

namespace {

const char* kTransactionsHeader =
    "epoch,t,buyer,buyer_on_platform,query_taste,query_price,world_best,world_best_utility,world_candidate,"
    "world_surplus,recommended,recommended_utility,platform_candidate,platform_utility,chosen,channel,"
    "buyer_surplus,seller_surplus,price";
const char* kBuyersHeader = "epoch,buyer,on_platform,arrivals,surplus_world,surplus_platform,platform_tx,world_tx";
const char* kSellersHeader =
    "epoch,seller,class,active,on_platform,surplus_world,surplus_platform,fixed_cost,platform_tx,world_tx,"
    "bankrupt_after";
const char* kEpochsHeader =
    "epoch,stage,friction,P_B,P_S,P_R,rule,eta_tick,buyer_subscriptions,seller_subscriptions,referrals,"
    "buyer_surplus,seller_surplus,platform_revenue,tax,welfare,reward,surplus_bonus,buyers_on,sellers_on,"
    "sellers_bankrupt,ledger_digest";

class Row {
 public:
  Row& operator<<(double v) { return put(protocol::format_double(v)); }
  Row& operator<<(int v) { return put(std::to_string(v)); }
  Row& operator<<(bool v) { return put(v ? "1" : "0"); }
  Row& operator<<(const std::string& v) { return put(v); }
  Row& operator<<(const char* v) { return put(v); }
  Row& operator<<(const std::optional<AgentId>& v) { return put(v ? std::to_string(*v) : std::string()); }

  const std::string& str() const { return s_; }

 private:
  Row& put(const std::string& v) {
    if (!first_) s_ += ',';
    first_ = false;
    s_ += v;
    return *this;
  }
  std::string s_;
  bool first_ = true;
};

class CsvOut {
 public:
  CsvOut(const fs::path& path, const char* header) : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw RunLogError(path.string() + ": cannot open for writing");
    out_ << header << '\n';
  }
  void write(const Row& row) { out_ << row.str() << '\n'; }
  void close() {
    out_.close();
    if (!out_) throw RunLogError(path_.string() + ": write failed");
  }

 private:
  fs::path path_;
  std::ofstream out_;
};

class CsvIn {
 public:
  CsvIn(const fs::path& path, const char* header) : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw RunLogError(path.string() + ": cannot open");
    std::string line;
    if (!std::getline(in_, line) || line != header) throw RunLogError(path.string() + ": unexpected header");
    columns_ = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
  }

  bool next() {
    std::string line;
    if (!std::getline(in_, line)) return false;
    ++line_no_;
    cells_.clear();
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      cells_.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (cells_.size() != columns_) fail("expected " + std::to_string(columns_) + " fields");
    col_ = 0;
    return true;
  }

  const std::string& text() { return cells_.at(col_++); }
  double real() {
    const auto& c = text();
    char* end = nullptr;
    const double v = std::strtod(c.c_str(), &end);
    if (c.empty() || *end != '\0') fail("bad number '" + c + "'");
    return v;
  }
  int integer() {
    const auto& c = text();
    int v = 0;
    auto [p, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
    if (ec != std::errc() || p != c.data() + c.size()) fail("bad integer '" + c + "'");
    return v;
  }
  bool flag() { return integer() != 0; }
  std::optional<AgentId> id() {
    if (cells_.at(col_).empty()) {
      ++col_;
      return std::nullopt;
    }
    return integer();
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw RunLogError(path_.string() + ":" + std::to_string(line_no_ + 1) + ": " + what);
  }

 private:
  fs::path path_;
  std::ifstream in_;
  std::vector<std::string> cells_;
  std::size_t columns_ = 0;
  std::size_t col_ = 0;
  int line_no_ = 0;
};

template <class E>
E enum_named(CsvIn& in, std::initializer_list<E> values) {
  const auto& name = in.text();
  for (E v : values) {
    if (name == to_string(v)) return v;
  }
  in.fail("unknown name '" + name + "'");
}

std::string seed_string(std::uint64_t v) { return std::to_string(v); }

std::uint64_t seed_value(const json& j, const std::string& key, const fs::path& path) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number_unsigned()) throw RunLogError(path.string() + ": missing or bad '" + key + "'");
  return it->get<std::uint64_t>();
}

}  // namespace

std::string run_id(const EpisodeRecord& record) { return "seed-" + seed_string(record.seed); }

std::string log_run(const EpisodeRecord& record, const EnvConfig& config, const fs::path& sink) {
  if (record.epochs.empty()) throw std::invalid_argument("log_run: episode has no warm-up epoch");
  const std::string id = run_id(record);
  const fs::path dir = sink / id;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw RunLogError(dir.string() + ": " + ec.message());

  const auto structure = MarketStructure::of(config.market.structure);
  std::vector<SellerClass> classes;
  for (const auto& s : record.market.sellers) {
    classes.push_back(seller_class(s, structure, record.market.buyers, record.market.sellers));
  }

  CsvOut tx(dir / "transactions.csv", kTransactionsHeader);
  CsvOut buyers(dir / "buyers.csv", kBuyersHeader);
  CsvOut sellers(dir / "sellers.csv", kSellersHeader);
  CsvOut epochs(dir / "epochs.csv", kEpochsHeader);

  for (std::size_t k = 0; k < record.epochs.size(); ++k) {
    const auto& rec = record.epochs[k];
    const auto& l = rec.ledger;
    for (const auto& t : l.transactions) {
      Row r;
      r << t.epoch << t.t << t.buyer << t.buyer_on_platform << t.query.taste << t.query.price_level << t.world_best
        << t.world_best_utility << t.world_candidate << t.world_surplus << t.recommended << t.recommended_utility
        << t.platform_candidate << t.platform_utility << t.chosen << to_string(t.channel) << t.buyer_surplus
        << t.seller_surplus << t.price;
      tx.write(r);
    }
    int buyers_on = 0;
    for (std::size_t b = 0; b < l.buyers.size(); ++b) {
      const auto& e = l.buyers[b];
      buyers_on += e.on_platform;
      Row r;
      r << l.epoch << static_cast<int>(b) << e.on_platform << e.arrivals << e.surplus_world << e.surplus_platform
        << e.platform_tx << e.world_tx;
      buyers.write(r);
    }
    int sellers_on = 0;
    int bankrupt = 0;
    for (std::size_t s = 0; s < l.sellers.size(); ++s) {
      const auto& e = l.sellers[s];
      const bool gone = s < rec.seller_bankrupt.size() && rec.seller_bankrupt[s];
      sellers_on += e.on_platform;
      bankrupt += gone;
      Row r;
      r << l.epoch << static_cast<int>(s) << to_string(classes.at(s)) << e.active << e.on_platform << e.surplus_world
        << e.surplus_platform << e.fixed_cost << e.platform_tx << e.world_tx << gone;
      sellers.write(r);
    }
    const auto totals = epoch_totals(l);
    Row r;
    r << l.epoch << to_string(rec.stage) << l.friction << l.fees.buyer_subscription << l.fees.seller_subscription
      << l.fees.referral_rate << to_string(rec.strategy.rule) << rec.strategy.threshold_tick
      << l.revenue.buyer_subscriptions << l.revenue.seller_subscriptions << l.revenue.referrals << totals.buyer_surplus
      << totals.seller_surplus << totals.platform_revenue << rec.welfare.tax << totals.welfare << rec.reward.total
      << rec.reward.surplus_bonus << buyers_on << sellers_on << bankrupt << hex64(ledger_digest(l));
    epochs.write(r);
  }
  tx.close();
  buyers.close();
  sellers.close();
  epochs.close();

  json manifest;
  manifest["format"] = kRunLogFormat;
  manifest["run_id"] = id;
  manifest["code_version"] = version();
  manifest["seed"] = record.seed;
  manifest["seeds"] = {{"market", record.seeds.market},
                       {"knowledge", record.seeds.knowledge},
                       {"shock", record.seeds.shock},
                       {"episode", record.seeds.episode}};
  manifest["mode"] = to_string(record.mode);
  manifest["epochs"] = static_cast<int>(record.epochs.size());
  manifest["config_hash"] = hex64(config_hash(config));
  manifest["config"] = json::parse(dump_config(config));
  const fs::path mpath = dir / "manifest.json";
  std::ofstream m(mpath, std::ios::binary);
  if (!m) throw RunLogError(mpath.string() + ": cannot open for writing");
  m << manifest.dump(2) << '\n';
  m.close();
  if (!m) throw RunLogError(mpath.string() + ": write failed");
  return id;
}

LoggedRun read_run(const fs::path& run_dir) {
  LoggedRun run;
  const fs::path mpath = run_dir / "manifest.json";
  std::ifstream m(mpath, std::ios::binary);
  if (!m) throw RunLogError(mpath.string() + ": cannot open");
  json manifest;
  try {
    m >> manifest;
    if (manifest.at("format").get<int>() != kRunLogFormat) throw RunLogError(mpath.string() + ": unsupported format");
    run.run_id = manifest.at("run_id").get<std::string>();
    run.code_version = manifest.at("code_version").get<std::string>();
    run.config_hash = manifest.at("config_hash").get<std::string>();
    const auto mode = parse_env_mode(manifest.at("mode").get<std::string>());
    if (!mode) throw RunLogError(mpath.string() + ": unknown mode");
    run.mode = *mode;
    run.config = parse_config(manifest.at("config").dump());
  } catch (const json::exception& e) {
    throw RunLogError(mpath.string() + ": " + e.what());
  } catch (const ConfigError& e) {
    throw RunLogError(mpath.string() + ": " + e.what());
  }
  run.seed = seed_value(manifest, "seed", mpath);
  const auto& seeds = manifest.at("seeds");
  run.seeds = {seed_value(seeds, "market", mpath), seed_value(seeds, "knowledge", mpath),
               seed_value(seeds, "shock", mpath), seed_value(seeds, "episode", mpath)};

  CsvIn epochs(run_dir / "epochs.csv", kEpochsHeader);
  while (epochs.next()) {
    EpochRow r;
    r.epoch = epochs.integer();
    r.stage = enum_named(epochs, {ShockStage::warm_up, ShockStage::pre, ShockStage::shock, ShockStage::post});
    r.friction = epochs.real();
    r.fees.buyer_subscription = epochs.real();
    r.fees.seller_subscription = epochs.real();
    r.fees.referral_rate = epochs.real();
    r.strategy.rule = enum_named(epochs, {MatchingRule::seller_aware, MatchingRule::profit_driven});
    r.strategy.threshold_tick = epochs.integer();
    r.revenue.buyer_subscriptions = epochs.real();
    r.revenue.seller_subscriptions = epochs.real();
    r.revenue.referrals = epochs.real();
    r.buyer_surplus = epochs.real();
    r.seller_surplus = epochs.real();
    r.platform_revenue = epochs.real();
    r.tax = epochs.real();
    r.welfare = epochs.real();
    r.reward = epochs.real();
    r.surplus_bonus = epochs.real();
    r.buyers_on = epochs.integer();
    r.sellers_on = epochs.integer();
    r.sellers_bankrupt = epochs.integer();
    r.ledger_digest = epochs.text();
    if (r.epoch != static_cast<int>(run.epochs.size())) epochs.fail("epochs out of order");
    run.epochs.push_back(r);

    EpochLedger l;
    l.epoch = r.epoch;
    l.fees = r.fees;
    l.friction = r.friction;
    l.revenue = r.revenue;
    l.finalized = true;
    run.ledgers.push_back(std::move(l));
  }
  auto ledger_for = [&](CsvIn& in, int epoch) -> EpochLedger& {
    if (epoch < 0 || epoch >= static_cast<int>(run.ledgers.size())) in.fail("epoch " + std::to_string(epoch));
    return run.ledgers[static_cast<std::size_t>(epoch)];
  };

  CsvIn buyers(run_dir / "buyers.csv", kBuyersHeader);
  while (buyers.next()) {
    const int epoch = buyers.integer();
    auto& l = ledger_for(buyers, epoch);
    if (buyers.integer() != static_cast<int>(l.buyers.size())) buyers.fail("buyers out of order");
    BuyerEpoch b;
    b.on_platform = buyers.flag();
    b.arrivals = buyers.integer();
    b.surplus_world = buyers.real();
    b.surplus_platform = buyers.real();
    b.platform_tx = buyers.integer();
    b.world_tx = buyers.integer();
    l.buyers.push_back(b);
  }

  CsvIn sellers(run_dir / "sellers.csv", kSellersHeader);
  while (sellers.next()) {
    const int epoch = sellers.integer();
    auto& l = ledger_for(sellers, epoch);
    SellerRow row;
    row.epoch = epoch;
    row.seller = sellers.integer();
    if (row.seller != static_cast<int>(l.sellers.size())) sellers.fail("sellers out of order");
    row.seller_class = enum_named(sellers, {SellerClass::core, SellerClass::niche, SellerClass::cheap,
                                            SellerClass::other});
    SellerEpoch s;
    s.active = sellers.flag();
    s.on_platform = sellers.flag();
    s.surplus_world = sellers.real();
    s.surplus_platform = sellers.real();
    s.fixed_cost = sellers.real();
    s.platform_tx = sellers.integer();
    s.world_tx = sellers.integer();
    row.bankrupt_after = sellers.flag();
    l.sellers.push_back(s);
    run.sellers.push_back(row);
  }

  CsvIn tx(run_dir / "transactions.csv", kTransactionsHeader);
  while (tx.next()) {
    TransactionRecord t;
    t.epoch = tx.integer();
    t.t = tx.integer();
    t.buyer = tx.integer();
    t.buyer_on_platform = tx.flag();
    t.query.taste = tx.real();
    t.query.price_level = tx.real();
    t.world_best = tx.id();
    t.world_best_utility = tx.real();
    t.world_candidate = tx.id();
    t.world_surplus = tx.real();
    t.recommended = tx.id();
    t.recommended_utility = tx.real();
    t.platform_candidate = tx.id();
    t.platform_utility = tx.real();
    t.chosen = tx.id();
    t.channel = enum_named(tx, {Channel::none, Channel::world, Channel::platform});
    t.buyer_surplus = tx.real();
    t.seller_surplus = tx.real();
    t.price = tx.real();
    ledger_for(tx, t.epoch).transactions.push_back(t);
  }

  for (std::size_t k = 0; k < run.ledgers.size(); ++k) {
    if (hex64(ledger_digest(run.ledgers[k])) != run.epochs[k].ledger_digest) {
      throw RunLogError((run_dir / "epochs.csv").string() + ": ledger digest mismatch at epoch " + std::to_string(k));
    }
  }
  return run;
}

std::vector<fs::path> list_runs(const fs::path& sink) {
  std::vector<fs::path> out;
  std::error_code ec;
  if (fs::exists(sink / "manifest.json", ec)) out.push_back(sink);
  if (!fs::is_directory(sink, ec)) throw RunLogError(sink.string() + ": not a directory");
  for (const auto& entry : fs::recursive_directory_iterator(sink, ec)) {
    if (entry.is_regular_file() && entry.path().filename() == "manifest.json" && entry.path().parent_path() != sink) {
      out.push_back(entry.path().parent_path());
    }
  }
  if (ec) throw RunLogError(sink.string() + ": " + ec.message());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace platsim
