#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "cascade_trace/error.hpp"
#include "cascade_trace/trace_store.hpp"

namespace httplib {
class Server;
}

namespace cascade_trace {

inline constexpr int kDefaultPort = 9411;

class AddressInUse : public Error {
 public:
  using Error::Error;
};

struct ServerConfig {
  std::string host = "127.0.0.1";
  int port = kDefaultPort;  // 0 picks an ephemeral port
  /// When set, a background task prunes the graph to this size.
  std::optional<std::size_t> max_graph_nodes;
  std::chrono::milliseconds prune_interval{1000};
  std::size_t ancestor_limit = kDefaultAncestorLimit;
};

/// HTTP+JSON front end over a TraceStore.
///
///   POST /v1/mergelogs           -> 204
///   GET  /v1/mergelogs[?cpid=]   -> 200 array, 404 unknown filter
///   POST /v1/spans               -> 204
///   GET  /v1/spans[?cpid=]       -> 200 array, 404 unknown filter
///   GET  /v1/related?cpid=       -> 200 {"cpids": [...]}, 404 unknown
///   POST /v1/prune               -> 200 {"removed": [...]}
///   GET  /v1/graph               -> 200 {"nodes": [...], "edges": [...]}
///   GET  /v1/config              -> 200 {"n_ancestors": N, "max_graph_nodes": M|null}
class TraceServer {
 public:
  explicit TraceServer(ServerConfig config);
  ~TraceServer();
  TraceServer(const TraceServer&) = delete;
  TraceServer& operator=(const TraceServer&) = delete;

  /// Binds the listening socket and returns the bound port. Throws AddressInUse.
  int bind();
  /// Serves on a background thread (binds first if needed).
  void start();
  /// Serves on the calling thread until stop().
  void run();
  void stop();

  int port() const { return port_; }
  TraceStore& store() { return store_; }

 private:
  void install_routes();
  void prune_loop();

  ServerConfig config_;
  TraceStore store_;
  std::unique_ptr<httplib::Server> http_;
  int port_ = -1;
  std::thread serve_thread_;

  std::mutex prune_mutex_;
  std::condition_variable prune_cv_;
  bool stopping_ = false;
  std::thread prune_thread_;
};

}  // namespace cascade_trace
