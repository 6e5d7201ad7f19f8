#pragma once

#include <optional>
#include <string>
#include <sys/types.h>
#include <vector>

namespace cascade_trace {

/// A trace server running as a child process (`<exe> serve --port 0 ...`).
/// The child prints its URL on the first stdout line.
class ServerProcess {
 public:
  /// Throws TransportError when the child cannot be started or never reports a port.
  explicit ServerProcess(const std::string& executable, std::vector<std::string> extra_args = {});
  ~ServerProcess();
  ServerProcess(const ServerProcess&) = delete;
  ServerProcess& operator=(const ServerProcess&) = delete;

  const std::string& url() const { return url_; }
  int port() const { return port_; }
  pid_t pid() const { return pid_; }
  /// VmRSS of the child in KiB, absent if /proc is unavailable.
  std::optional<long> rss_kib() const;
  /// SIGTERM and reap. Idempotent.
  void stop();

 private:
  pid_t pid_ = -1;
  int port_ = -1;
  std::string url_;
};

/// Path of the running executable.
std::string self_executable();

}  // namespace cascade_trace
