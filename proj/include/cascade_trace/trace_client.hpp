#pragma once

#include <condition_variable>
#include <cstddef>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <variant>

#include "cascade_trace/trace_store.hpp"

namespace httplib {
class Client;
}

namespace cascade_trace {

inline constexpr const char* kDefaultServerUrl = "http://127.0.0.1:9411";

/// Blocking HTTP client for the trace server API. Thread-safe.
///
/// Connection failures raise TransportError; 404 raises NotFound; 400 raises
/// MalformedContext; 409 raises CycleRejected.
class HttpTraceClient final : public TraceQuery {
 public:
  explicit HttpTraceClient(const std::string& url);
  ~HttpTraceClient() override;

  void post_mergelog(const Mergelog& log);
  void post_span(const Span& span);

  std::vector<Mergelog> list_mergelogs(const std::optional<Cpid>& filter) override;
  std::vector<Span> list_spans(const std::optional<Cpid>& filter) override;
  std::vector<Cpid> related(const Cpid& cpid) override;
  GraphSnapshot graph() override;
  std::vector<Cpid> prune(std::size_t max_nodes) override;

  /// The server's configured ancestor bound.
  std::size_t server_ancestor_limit();

  const std::string& url() const { return url_; }

 private:
  std::string get(const std::string& path);
  std::string post(const std::string& path, const std::string& body, int expected_status);

  std::string url_;
  std::mutex mutex_;
  std::unique_ptr<httplib::Client> http_;
};

/// Ships mergelogs and spans to the trace server from a background thread so
/// that controllers never block on the network. Delivery order is preserved.
class HttpTraceSink final : public TraceSink {
 public:
  explicit HttpTraceSink(const std::string& url, int max_attempts = 3);
  ~HttpTraceSink() override;

  void send_mergelog(const Mergelog& log) override;
  void send_span(const Span& span) override;
  void flush() override;

  /// Messages given up on after exhausting retries.
  std::size_t dropped() const;

 private:
  using Message = std::variant<Mergelog, Span>;
  void enqueue(Message m);
  void worker();

  HttpTraceClient client_;
  int max_attempts_;
  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::condition_variable idle_cv_;
  std::deque<Message> queue_;
  bool busy_ = false;
  bool stopping_ = false;
  std::size_t dropped_ = 0;
  std::thread thread_;
};

}  // namespace cascade_trace
