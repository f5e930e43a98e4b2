#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "platsim/platform_env.hpp"

namespace platsim::cli {

/// Entry point behind the platsim binary. Exit codes: 0 success, 1 runtime
/// failure, 2 usage or configuration error.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

inline const std::vector<std::string>& case_names() {
  static const std::vector<std::string> names{"laissez_faire", "no_platform", "surplus_aware",
                                              "tax",           "fee_cap",     "fee_freeze"};
  return names;
}

/// Rewrites the regime (or disables the platform) for an intervention case.
/// Parameters such as the tax rate come from the config. Throws
/// std::invalid_argument listing the allowed names.
EnvConfig apply_case(EnvConfig config, const std::string& name);

/// "fixed:P_B=1.2,P_S=2.0,P_R=0.1,rule=seller_aware,eta=1.0"; every key optional.
struct FixedPolicy {
  std::optional<FeeSchedule> fees;
  std::optional<MatchingStrategy> strategy;
};

enum class PolicySource { fixed, grid_optimal, external_server };

struct PolicySpec {
  PolicySource source = PolicySource::fixed;
  FixedPolicy fixed;
};

/// Throws std::invalid_argument.
PolicySpec parse_policy(const std::string& text);

/// Folds a fixed policy into the config and returns the constant action for
/// the adaptive surface. Throws std::invalid_argument when the regime rejects
/// the fees.
int fixed_action(EnvConfig& config, const FixedPolicy& policy);

struct Stat {
  double mean = 0.0;
  double se = 0.0;  // sample standard deviation / sqrt(n); 0 when n < 2
  int n = 0;
};

Stat summarize(std::span<const double> values);

}  // namespace platsim::cli
