#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace platsim::cli {

enum class ReportKind { welfare_by_stage, fees_by_stage, agents_by_stage, bankruptcy_by_class };

const char* to_string(ReportKind kind);
std::optional<ReportKind> parse_report_kind(std::string_view name);

/// Aggregates every run found under each directory. Each directory is one
/// group and must hold runs of a single config; groups must share the market,
/// shock and dynamics settings. Stage tables report the mean over episodes of
/// each episode's per-epoch stage mean, with standard errors over episodes.
///
/// Writes <kind>.txt and <kind>.csv (long format) to `out_dir` when given, plus
/// <kind>_by_epoch.csv for the stage kinds. Prints the table to `out`.
/// Throws std::invalid_argument on incompatible groups.
void write_report(ReportKind kind, const std::vector<std::filesystem::path>& run_dirs,
                  const std::optional<std::filesystem::path>& out_dir, std::ostream& out);

}  // namespace platsim::cli
