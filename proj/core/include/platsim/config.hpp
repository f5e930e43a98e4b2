#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "platsim/platform_env.hpp"

namespace platsim {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// JSON document with one section per module:
///
///   market       structure, n_buyers, n_sellers, rho, utility_scale, query_variance
///   shock        enabled, pre, post, intensity_min, intensity_max, base_friction, constant_friction
///   dynamics     epochs, timesteps, warmup_friction
///   subscription p_wake, sleepers_accrue_inertia, decision_mode, inertia_bound
///   platform     mode, enabled, strategy{rule, threshold_tick}, fees{P_B, P_S, P_R},
///                tracker_update, time_features, discount
///   regulation   kind, alpha, tax_category, tax_rate, caps{P_B, P_S, P_R}, frozen{P_B, P_S, P_R}
///
/// Missing keys keep their defaults; unknown keys are rejected. A null cap
/// means uncapped. The result is validated.
EnvConfig parse_config(std::string_view json_text);

/// Every key, sorted, two-space indent.
std::string dump_config(const EnvConfig& config);

/// Reads and parses a file; errors carry the path.
EnvConfig load_config(const std::filesystem::path& path);
void save_config(const EnvConfig& config, const std::filesystem::path& path);

/// Applies "section.key=value" assignments in order. The value is read as JSON
/// and falls back to a plain string, so `market.structure=uniform` works.
EnvConfig apply_overrides(const EnvConfig& config, std::span<const std::string> overrides);

/// FNV-1a over the compact canonical dump.
std::uint64_t config_hash(const EnvConfig& config);
std::string hex64(std::uint64_t value);

}  // namespace platsim
