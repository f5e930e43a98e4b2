#pragma once

#include <atomic>
#include <cstdint>
#include <iosfwd>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "platsim/session.hpp"

namespace platsim {

/// Newline-delimited session over a stream pair; returns on close or EOF.
void serve_stream(std::istream& in, std::ostream& out, const SessionOptions& options);

/// TCP listener with one thread and one Session per connection.
class TcpServer {
 public:
  /// Binds 127.0.0.1:port (0 picks a free port). Throws std::system_error.
  TcpServer(SessionOptions options, std::uint16_t port);
  ~TcpServer();
  TcpServer(const TcpServer&) = delete;
  TcpServer& operator=(const TcpServer&) = delete;

  std::uint16_t port() const { return port_; }
  /// Accepts until stop(); joins connection threads before returning.
  void run();
  /// Safe from any thread. Open connections are shut down.
  void stop();

 private:
  void serve_connection(int fd);

  SessionOptions options_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::mutex mutex_;
  std::vector<int> open_fds_;
  std::vector<std::thread> workers_;
};

/// Blocking line client, for tests and tooling.
class LineClient {
 public:
  /// Throws std::system_error.
  LineClient(const std::string& host, std::uint16_t port);
  ~LineClient();
  LineClient(const LineClient&) = delete;
  LineClient& operator=(const LineClient&) = delete;

  void send(const std::string& line);
  /// Next line without the newline; nullopt on EOF.
  std::optional<std::string> receive();
  std::string request(const std::string& line);

 private:
  int fd_ = -1;
  std::string buffer_;
};

/// Reads lines from `fd` into `buffer`; nullopt on EOF or error.
std::optional<std::string> read_line(int fd, std::string& buffer);
/// Throws std::system_error on failure.
void write_all(int fd, const std::string& data);

}  // namespace platsim
