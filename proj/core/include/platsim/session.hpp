#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "platsim/platform_env.hpp"
#include "platsim/protocol.hpp"

namespace platsim {

struct SessionOptions {
  /// Directory searched for "<config_ref>.json". Empty disables named configs.
  std::filesystem::path config_dir;
  EnvConfig default_config;
};

/// Resolves a reset's config_ref: "" and "default" give the default config,
/// anything else names a JSON file in the config directory. Refs containing
/// path separators or ".." are rejected. Throws ConfigError.
EnvConfig resolve_config(const SessionOptions& options, const std::string& config_ref);

/// Protocol state machine for one client. Owns one environment.
///
/// hello must come first and only once; step needs a reset and a live episode;
/// reset may be repeated. Errors leave the session usable.
class Session {
 public:
  explicit Session(SessionOptions options);

  /// Response line for one request line, or nullopt after close.
  std::optional<std::string> handle(std::string_view line);
  std::optional<protocol::Message> handle(const protocol::Message& request);

  bool closed() const { return closed_; }
  /// Null before the first successful reset.
  const PlatformEnv* env() const { return env_.get(); }

 private:
  SessionOptions options_;
  bool greeted_ = false;
  bool closed_ = false;
  std::unique_ptr<PlatformEnv> env_;
};

}  // namespace platsim
