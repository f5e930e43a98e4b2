#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "platsim/observation.hpp"
#include "platsim/platform_env.hpp"

namespace platsim::protocol {

inline constexpr int kProtocolVersion = 1;

// Requests.
struct Hello {
  int protocol_version = kProtocolVersion;
  friend bool operator==(const Hello&, const Hello&) = default;
};

struct Reset {
  std::string config_ref;  // "" or "default" for the server's default config
  std::uint64_t seed = 0;
  std::optional<EnvMode> mode;  // overrides the config's mode when present
  friend bool operator==(const Reset&, const Reset&) = default;
};

struct Step {
  std::int64_t action = 0;
  friend bool operator==(const Step&, const Step&) = default;
};

struct Close {
  friend bool operator==(const Close&, const Close&) = default;
};

// Responses.
struct LayoutField {
  std::string name;
  int offset = 0;
  int length = 0;
  friend bool operator==(const LayoutField&, const LayoutField&) = default;
};

/// Answer to hello (layout of the default config, no observation) and to reset
/// (layout of the chosen config plus the first observation).
struct Ready {
  int protocol_version = kProtocolVersion;
  EnvMode mode = EnvMode::fee_setting;
  int action_count = 0;
  int observation_length = 0;
  std::vector<LayoutField> fields;
  std::vector<double> observation;
  friend bool operator==(const Ready&, const Ready&) = default;
};

struct StepInfo {
  int epoch = 0;  // epoch that was just simulated
  std::string stage;
  double friction = 0.0;
  double buyer_subscriptions = 0.0;
  double seller_subscriptions = 0.0;
  double referrals = 0.0;
  double tax = 0.0;
  double surplus_bonus = 0.0;
  double welfare = 0.0;
  std::string ledger_digest;  // 16 hex digits
  friend bool operator==(const StepInfo&, const StepInfo&) = default;
};

struct State {
  std::vector<double> observation;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
  friend bool operator==(const State&, const State&) = default;
};

/// code is one of "parse", "order", "action", "config", "version".
struct Error {
  std::string code;
  std::string detail;
  friend bool operator==(const Error&, const Error&) = default;
};

using Message = std::variant<Hello, Reset, Step, Close, Ready, State, Error>;

/// Malformed line; `code()` is always "parse".
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One JSON object without a trailing newline. "type" comes first, then the
/// fields in declaration order. Doubles use 17 significant digits and always
/// carry a '.' or exponent. Throws std::invalid_argument on non-finite values.
std::string serialize(const Message& message);

/// Inverse of serialize. Field order is not enforced on input; unknown fields
/// and missing required fields are ParseErrors.
Message parse(std::string_view line);

const char* type_name(const Message& message);

Ready make_ready(const ObservationLayout& layout, EnvMode mode, int action_count, std::vector<double> observation = {});
StepInfo make_info(const PlatformEnv& env, const StepResult& result);

/// %.17g, with ".0" appended when the result looks like an integer.
std::string format_double(double value);

}  // namespace platsim::protocol
