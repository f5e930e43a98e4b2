#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <boost/rational.hpp>

namespace platsim::oracle {

using Rational = boost::rational<std::int64_t>;

/// Parses "3", "-2/7" or "0.015" exactly. Throws std::invalid_argument.
Rational parse_rational(std::string_view text);
std::string to_string(const Rational& r);
double to_double(const Rational& r);

/// Query groups of the two-buyer, two-seller economy. Buyer 0 issues m
/// queries of Q11 and m of Q12; buyer 1 issues 2m queries of Q2.
enum class Group { q11 = 0, q12 = 1, q2 = 2 };
constexpr int kGroups = 3;

/// Agent order used by subscription profiles: B1, B2, S1, S2.
constexpr int kAgents = 4;

/// Points on a line; u(q, s) = 2 - |q - s|, friction 1, fixed cost m,
/// seller surplus 1 per transaction. Buyer 0 knows only S2, buyer 1 knows both.
struct ToyEconomy {
  Rational m{1};
  Rational epsilon{1, 100};

  /// Throws std::invalid_argument unless m > 0 and 0 < epsilon < 1/8.
  static ToyEconomy make(Rational m, Rational epsilon);

  Rational seller_position(int s) const;  // S1 = -2, S2 = 0
  Rational query_position(Group g) const; // Q11 = -2+eps, Q12 = -1+eps, Q2 = 1+eps
  Rational distance(Group g, int s) const;
  Rational utility(Group g, int s) const { return Rational(2) - distance(g, s); }
  Rational group_size(Group g) const { return g == Group::q2 ? 2 * m : m; }
  static int buyer_of(Group g) { return g == Group::q2 ? 1 : 0; }
  static bool knows(int buyer, int seller) { return buyer == 1 || seller == 1; }
};

enum class ToyCase { no_platform, revenue_myopic, revenue_rational_matching, surplus_aware, ideal };

const char* to_string(ToyCase c);
std::optional<ToyCase> parse_toy_case(std::string_view name);

/// Lower end of the open alpha interval in which the surplus-aware platform
/// brings every agent on board: 1/2 + 2eps/(1+2eps).
Rational surplus_aware_threshold(const Rational& epsilon);

/// Number of queries of each group routed to S1 when both sellers are on the
/// platform; the rest go to S2. Empty means myopic.
struct Routing {
  std::optional<std::array<Rational, kGroups>> to_s1;

  bool myopic() const { return !to_s1.has_value(); }
};

struct ToyFees {
  Rational buyer{0};
  Rational seller{0};

  friend bool operator==(const ToyFees&, const ToyFees&) = default;
};

/// Counts are query masses; the table is [group][seller].
struct ToyOutcome {
  std::array<bool, kAgents> on{};
  std::array<bool, 2> bankrupt{};
  std::array<std::array<Rational, 2>, kGroups> platform_tx{};
  std::array<std::array<Rational, 2>, kGroups> world_tx{};
  std::array<Rational, 2> buyer_gross{};   // before fees
  std::array<Rational, 2> seller_gross{};  // transactions minus fixed cost, before fees

  Rational seller_queries(int s) const;
};

struct EquilibriumResult {
  ToyCase which = ToyCase::no_platform;
  bool platform = false;
  ToyFees fees;
  Routing routing;
  ToyOutcome outcome;
  std::array<Rational, 2> buyer_surplus{};
  std::array<Rational, 2> seller_surplus{};  // zero for bankrupt sellers
  Rational revenue{0};
  Rational welfare{0};
  Rational objective{0};
  std::optional<Rational> alpha;
};

/// Follower outcome for a subscription profile. Off-platform sellers whose
/// transactions do not cover the fixed cost go bankrupt (iterated to a fixed
/// point) and vanish from buyers' world options.
ToyOutcome toy_outcome(const ToyEconomy& economy, const std::array<bool, kAgents>& on, const Routing& routing,
                       bool platform = true, const Rational& friction = Rational(1), bool everyone_known = false);

/// Value the agent compares when deciding to subscribe: buyer surplus, or a
/// seller's surplus floored at zero (shutting down).
Rational decision_value(const ToyOutcome& outcome, const ToyFees& fees, int agent);

/// Every subscription profile that is a Nash equilibrium among the followers
/// at fixed fees and routing, as profile bitmasks (bit i = agent i on).
std::vector<int> follower_equilibria(const ToyEconomy& economy, const ToyFees& fees, const Routing& routing);

/// Platform-preferred follower equilibrium at fixed fees under myopic matching
/// and the revenue objective; nullopt if no pure equilibrium exists.
std::optional<EquilibriumResult> follower_equilibrium(const ToyEconomy& economy, const ToyFees& fees);

/// Stackelberg solution by enumeration of subscription profiles, boundary fee
/// values and (for rational matching) routings on the grid j*m/64.
/// `alpha` is required for surplus_aware and must lie strictly between
/// surplus_aware_threshold and 1; otherwise std::invalid_argument reports the
/// threshold.
EquilibriumResult solve_case(const ToyEconomy& economy, ToyCase which, std::optional<Rational> alpha = std::nullopt);

struct EngineCheck {
  std::string quantity;
  double expected = 0.0;
  double actual = 0.0;
  double error = 0.0;  // |actual - expected| / max(|expected|, m)
};

struct EngineReport {
  ToyCase which = ToyCase::no_platform;
  bool ok = true;
  double max_error = 0.0;
  std::string first_divergence;  // empty when ok
  std::vector<EngineCheck> checks;
};

/// Replays the oracle's equilibrium on the simulation engine (one epoch, one
/// dimension, linear kernel, scripted queries) and compares per-agent
/// surpluses, revenue and welfare. For platform cases every unilateral
/// subscription flip is replayed too and must reproduce the oracle's
/// deviation value without improving on the equilibrium. Requires integer m.
EngineReport verify_against_engine(const ToyEconomy& economy, ToyCase which, std::optional<Rational> alpha = std::nullopt,
                                   double tolerance = 1e-9);

/// Table of welfare, per-agent surplus and matches, revenue and fees for all five cases.
std::string format_report(const ToyEconomy& economy, const Rational& alpha);

}  // namespace platsim::oracle
