#include "platsim/session.hpp"

#include "platsim/config.hpp"

namespace platsim {

using namespace protocol;

EnvConfig resolve_config(const SessionOptions& options, const std::string& config_ref) {
  if (config_ref.empty() || config_ref == "default") return options.default_config;
  if (config_ref.find_first_of("/\\") != std::string::npos || config_ref.find("..") != std::string::npos) {
    throw ConfigError("config_ref '" + config_ref + "' must be a plain name");
  }
  if (options.config_dir.empty()) throw ConfigError("config_ref '" + config_ref + "': no config directory");
  auto path = options.config_dir / config_ref;
  if (path.extension() != ".json") path += ".json";
  if (!std::filesystem::exists(path)) throw ConfigError("config_ref '" + config_ref + "': " + path.string() + " not found");
  return load_config(path);
}

Session::Session(SessionOptions options) : options_(std::move(options)) {}

std::optional<std::string> Session::handle(std::string_view line) {
  std::optional<Message> response;
  try {
    response = handle(parse(line));
  } catch (const ParseError& e) {
    response = Error{"parse", e.what()};
  }
  if (!response) return std::nullopt;
  return serialize(*response);
}

std::optional<Message> Session::handle(const Message& request) {
  if (closed_) return Error{"order", "session is closed"};
  if (std::holds_alternative<Close>(request)) {
    closed_ = true;
    return std::nullopt;
  }
  if (const auto* hello = std::get_if<Hello>(&request)) {
    if (greeted_) return Error{"order", "hello already received"};
    if (hello->protocol_version != kProtocolVersion) {
      return Error{"version", "unsupported protocol_version " + std::to_string(hello->protocol_version) +
                                  " (server speaks " + std::to_string(kProtocolVersion) + ")"};
    }
    greeted_ = true;
    const auto& c = options_.default_config;
    PlatformEnv probe(c);
    return make_ready(probe.layout(), c.mode, probe.action_count());
  }
  if (!greeted_) return Error{"order", "expected hello first"};

  if (const auto* reset = std::get_if<Reset>(&request)) {
    EnvConfig config;
    try {
      config = resolve_config(options_, reset->config_ref);
      if (reset->mode) config.mode = *reset->mode;
      config.validate();
    } catch (const std::exception& e) {
      return Error{"config", e.what()};
    }
    env_ = std::make_unique<PlatformEnv>(config);
    auto obs = env_->reset(reset->seed);
    return make_ready(env_->layout(), config.mode, env_->action_count(), std::move(obs.values));
  }
  if (const auto* step = std::get_if<Step>(&request)) {
    if (!env_) return Error{"order", "step before reset"};
    if (env_->done()) return Error{"order", "step after done"};
    if (step->action < 0 || step->action >= env_->action_count()) {
      return Error{"action", "action " + std::to_string(step->action) + " outside [0, " +
                                 std::to_string(env_->action_count()) + ")"};
    }
    StepResult r;
    try {
      r = env_->step(static_cast<int>(step->action));
    } catch (const ActionError& e) {
      return Error{"action", e.what()};
    }
    State s;
    s.info = make_info(*env_, r);
    s.observation = std::move(r.observation.values);
    s.reward = r.reward;
    s.done = r.done;
    return s;
  }
  return Error{"order", std::string("'") + type_name(request) + "' is a response, not a request"};
}

}  // namespace platsim
