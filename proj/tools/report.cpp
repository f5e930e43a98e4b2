#include "report.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "cli.hpp"
#include "platsim/config.hpp"
#include "platsim/protocol.hpp"
#include "platsim/run_log.hpp"

namespace platsim::cli {

namespace fs = std::filesystem;

const char* to_string(ReportKind kind) {
  switch (kind) {
    case ReportKind::fees_by_stage: return "fees_by_stage";
    case ReportKind::agents_by_stage: return "agents_by_stage";
    case ReportKind::bankruptcy_by_class: return "bankruptcy_by_class";
    case ReportKind::welfare_by_stage: break;
  }
  return "welfare_by_stage";
}

std::optional<ReportKind> parse_report_kind(std::string_view name) {
  for (auto k : {ReportKind::welfare_by_stage, ReportKind::fees_by_stage, ReportKind::agents_by_stage,
                 ReportKind::bankruptcy_by_class}) {
    if (name == to_string(k)) return k;
  }
  return std::nullopt;
}

namespace {

struct Group {
  std::string label;
  std::vector<LoggedRun> runs;
};

struct Metric {
  const char* name;
  std::function<double(const EpochRow&)> value;
};

std::vector<Metric> metrics_for(ReportKind kind) {
  switch (kind) {
    case ReportKind::welfare_by_stage:
      return {{"buyer_surplus", [](const EpochRow& r) { return r.buyer_surplus; }},
              {"seller_surplus", [](const EpochRow& r) { return r.seller_surplus; }},
              {"platform_net_revenue", [](const EpochRow& r) { return r.platform_revenue - r.tax; }},
              {"tax", [](const EpochRow& r) { return r.tax; }},
              {"welfare", [](const EpochRow& r) { return r.welfare; }}};
    case ReportKind::fees_by_stage:
      return {{"P_B", [](const EpochRow& r) { return r.fees.buyer_subscription; }},
              {"P_S", [](const EpochRow& r) { return r.fees.seller_subscription; }},
              {"P_R", [](const EpochRow& r) { return r.fees.referral_rate; }},
              {"eta", [](const EpochRow& r) { return r.strategy.threshold(); }}};
    case ReportKind::agents_by_stage:
      return {{"buyers_on", [](const EpochRow& r) { return static_cast<double>(r.buyers_on); }},
              {"sellers_on", [](const EpochRow& r) { return static_cast<double>(r.sellers_on); }},
              {"sellers_bankrupt", [](const EpochRow& r) { return static_cast<double>(r.sellers_bankrupt); }}};
    case ReportKind::bankruptcy_by_class: break;
  }
  return {};
}

// Settings every group must share for a comparison to be meaningful.
std::uint64_t frame_hash(const EnvConfig& c) {
  EnvConfig f;
  f.market = c.market;
  f.shock = c.shock;
  f.epochs = c.epochs;
  f.timesteps = c.timesteps;
  f.warmup_friction = c.warmup_friction;
  f.subscription = c.subscription;
  f.inertia_bound = c.inertia_bound;
  return config_hash(f);
}

std::vector<Group> load_groups(const std::vector<fs::path>& run_dirs) {
  if (run_dirs.empty()) throw std::invalid_argument("report: no run directories");
  std::vector<Group> groups;
  std::optional<std::uint64_t> frame;
  for (const auto& dir : run_dirs) {
    Group g;
    g.label = dir.filename().empty() ? dir.parent_path().filename().string() : dir.filename().string();
    for (const auto& run_dir : list_runs(dir)) g.runs.push_back(read_run(run_dir));
    if (g.runs.empty()) throw std::invalid_argument("report: " + dir.string() + " holds no runs");
    for (const auto& r : g.runs) {
      if (r.config_hash != g.runs.front().config_hash) {
        throw std::invalid_argument("report: incompatible configs within " + dir.string() + " (" +
                                    g.runs.front().config_hash + " vs " + r.config_hash + ")");
      }
    }
    const auto h = frame_hash(g.runs.front().config);
    if (frame && *frame != h) {
      throw std::invalid_argument("report: " + dir.string() +
                                  " uses different market, shock or dynamics settings than " +
                                  run_dirs.front().string());
    }
    frame = h;
    groups.push_back(std::move(g));
  }
  return groups;
}

std::string cell(const Stat& s) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f (%.4f)", s.mean, s.se);
  return buf;
}

std::string num(double v) { return protocol::format_double(v); }

class Table {
 public:
  explicit Table(std::vector<std::string> header) { rows_.push_back(std::move(header)); }
  void add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }

  std::string render() const {
    std::vector<std::size_t> width(rows_.front().size(), 0);
    for (const auto& r : rows_) {
      for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
    }
    std::ostringstream os;
    for (const auto& r : rows_) {
      for (std::size_t i = 0; i < r.size(); ++i) {
        os << r[i];
        if (i + 1 < r.size()) os << std::string(width[i] - r[i].size() + 2, ' ');
      }
      os << '\n';
    }
    return os.str();
  }

 private:
  std::vector<std::vector<std::string>> rows_;
};

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw RunLogError(path.string() + ": cannot open for writing");
  f << text;
  f.close();
  if (!f) throw RunLogError(path.string() + ": write failed");
}

constexpr ShockStage kStages[] = {ShockStage::pre, ShockStage::shock, ShockStage::post};

struct Outputs {
  std::string table;
  std::string csv;
  std::string by_epoch_csv;
};

Outputs stage_report(ReportKind kind, const std::vector<Group>& groups) {
  const auto metrics = metrics_for(kind);
  std::vector<std::string> header{"group", "stage", "episodes"};
  for (const auto& m : metrics) header.push_back(m.name);
  Table table(header);
  std::string csv = "group,stage,metric,mean,se,n\n";
  std::string by_epoch = "group,epoch,stage,metric,mean,se,n\n";

  for (const auto& g : groups) {
    for (ShockStage stage : kStages) {
      // values[metric] = per-episode stage means
      std::vector<std::vector<double>> values(metrics.size());
      for (const auto& run : g.runs) {
        std::vector<double> sum(metrics.size(), 0.0);
        int count = 0;
        for (const auto& row : run.epochs) {
          if (row.stage != stage) continue;
          for (std::size_t i = 0; i < metrics.size(); ++i) sum[i] += metrics[i].value(row);
          ++count;
        }
        if (count == 0) continue;
        for (std::size_t i = 0; i < metrics.size(); ++i) values[i].push_back(sum[i] / count);
      }
      if (values.front().empty()) continue;
      std::vector<std::string> row{g.label, to_string(stage), std::to_string(values.front().size())};
      for (std::size_t i = 0; i < metrics.size(); ++i) {
        const Stat s = summarize(values[i]);
        row.push_back(cell(s));
        csv += g.label + "," + to_string(stage) + "," + metrics[i].name + "," + num(s.mean) + "," + num(s.se) + "," +
               std::to_string(s.n) + "\n";
      }
      table.add(row);
    }

    const std::size_t n_epochs = g.runs.front().epochs.size();
    for (std::size_t k = 1; k < n_epochs; ++k) {
      for (const auto& m : metrics) {
        std::vector<double> v;
        for (const auto& run : g.runs) {
          if (k < run.epochs.size()) v.push_back(m.value(run.epochs[k]));
        }
        const Stat s = summarize(v);
        by_epoch += g.label + "," + std::to_string(k) + "," + to_string(g.runs.front().epochs[k].stage) + "," +
                    m.name + "," + num(s.mean) + "," + num(s.se) + "," + std::to_string(s.n) + "\n";
      }
    }
  }
  return {table.render(), csv, by_epoch};
}

Outputs bankruptcy_report(const std::vector<Group>& groups) {
  const std::vector<std::pair<std::string, std::optional<SellerClass>>> classes{
      {"core", SellerClass::core}, {"niche", SellerClass::niche}, {"cheap", SellerClass::cheap},
      {"other", SellerClass::other}, {"all", std::nullopt}};
  Table table({"group", "class", "episodes", "sellers_per_episode", "bankrupt_fraction"});
  std::string csv = "group,class,episodes,sellers_per_episode,mean,se\n";
  for (const auto& g : groups) {
    for (const auto& [name, cls] : classes) {
      std::vector<double> fractions;
      double sellers = 0.0;
      for (const auto& run : g.runs) {
        const int last = static_cast<int>(run.epochs.size()) - 1;
        int n = 0;
        int gone = 0;
        for (const auto& s : run.sellers) {
          if (s.epoch != last || (cls && s.seller_class != *cls)) continue;
          ++n;
          gone += s.bankrupt_after;
        }
        if (n == 0) continue;
        fractions.push_back(static_cast<double>(gone) / n);
        sellers += n;
      }
      if (fractions.empty()) continue;
      const Stat s = summarize(fractions);
      const double per = sellers / static_cast<double>(fractions.size());
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.2f", per);
      table.add({g.label, name, std::to_string(s.n), buf, cell(s)});
      csv += g.label + "," + name + "," + std::to_string(s.n) + "," + num(per) + "," + num(s.mean) + "," + num(s.se) +
             "\n";
    }
  }
  return {table.render(), csv, {}};
}

}  // namespace

void write_report(ReportKind kind, const std::vector<fs::path>& run_dirs, const std::optional<fs::path>& out_dir,
                  std::ostream& out) {
  const auto groups = load_groups(run_dirs);
  const Outputs o = kind == ReportKind::bankruptcy_by_class ? bankruptcy_report(groups) : stage_report(kind, groups);
  out << o.table;
  if (!out_dir) return;
  std::error_code ec;
  fs::create_directories(*out_dir, ec);
  if (ec) throw RunLogError(out_dir->string() + ": " + ec.message());
  const std::string name = to_string(kind);
  write_file(*out_dir / (name + ".txt"), o.table);
  write_file(*out_dir / (name + ".csv"), o.csv);
  if (!o.by_epoch_csv.empty()) write_file(*out_dir / (name + "_by_epoch.csv"), o.by_epoch_csv);
}

}  // namespace platsim::cli
