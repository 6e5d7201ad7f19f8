#include "cascade_trace/trace_client.hpp"

#include <httplib.h>

#include "cascade_trace/error.hpp"
#include "cascade_trace/json_codec.hpp"

namespace cascade_trace {

using nlohmann::json;

namespace {

std::string with_filter(std::string path, const std::optional<Cpid>& filter) {
  if (filter) path += "?cpid=" + filter->str();
  return path;
}

[[noreturn]] void raise_for_status(const httplib::Result& res, const std::string& what) {
  if (!res) throw TransportError(what + ": " + httplib::to_string(res.error()));
  std::string message = res->body;
  try {
    message = json::parse(res->body).at("error").get<std::string>();
  } catch (const json::exception&) {
  }
  switch (res->status) {
    case 404: throw NotFound(message);
    case 400: throw MalformedContext(message);
    case 409: throw CycleRejected(message);
    default: throw TransportError(what + ": HTTP " + std::to_string(res->status) + " " + message);
  }
}

}  // namespace

HttpTraceClient::HttpTraceClient(const std::string& url)
    : url_(url), http_(std::make_unique<httplib::Client>(url)) {
  if (url.rfind("http://", 0) != 0 || !http_->is_valid()) throw TransportError("invalid server URL '" + url + "'");
  http_->set_keep_alive(true);
  http_->set_tcp_nodelay(true);
  http_->set_connection_timeout(std::chrono::seconds(2));
  http_->set_read_timeout(std::chrono::seconds(30));
}

HttpTraceClient::~HttpTraceClient() = default;

std::string HttpTraceClient::get(const std::string& path) {
  std::lock_guard lock(mutex_);
  auto res = http_->Get(path);
  if (!res || res->status != 200) raise_for_status(res, "GET " + path);
  return res->body;
}

std::string HttpTraceClient::post(const std::string& path, const std::string& body, int expected_status) {
  std::lock_guard lock(mutex_);
  auto res = http_->Post(path, body, "application/json");
  if (!res || res->status != expected_status) raise_for_status(res, "POST " + path);
  return res->body;
}

void HttpTraceClient::post_mergelog(const Mergelog& log) { post("/v1/mergelogs", to_json(log).dump(), 204); }

void HttpTraceClient::post_span(const Span& span) { post("/v1/spans", to_json(span).dump(), 204); }

std::vector<Mergelog> HttpTraceClient::list_mergelogs(const std::optional<Cpid>& filter) {
  std::vector<Mergelog> out;
  for (const auto& j : json::parse(get(with_filter("/v1/mergelogs", filter)))) out.push_back(mergelog_from_json(j));
  return out;
}

std::vector<Span> HttpTraceClient::list_spans(const std::optional<Cpid>& filter) {
  std::vector<Span> out;
  for (const auto& j : json::parse(get(with_filter("/v1/spans", filter)))) out.push_back(span_from_json(j));
  return out;
}

std::vector<Cpid> HttpTraceClient::related(const Cpid& cpid) {
  return cpids_from_json(json::parse(get("/v1/related?cpid=" + cpid.str())).at("cpids"));
}

GraphSnapshot HttpTraceClient::graph() { return graph_from_json(json::parse(get("/v1/graph"))); }

std::vector<Cpid> HttpTraceClient::prune(std::size_t max_nodes) {
  const auto body = post("/v1/prune", json{{"max_nodes", max_nodes}}.dump(), 200);
  return cpids_from_json(json::parse(body).at("removed"));
}

std::size_t HttpTraceClient::server_ancestor_limit() {
  return json::parse(get("/v1/config")).at("n_ancestors").get<std::size_t>();
}

HttpTraceSink::HttpTraceSink(const std::string& url, int max_attempts)
    : client_(url), max_attempts_(max_attempts), thread_([this] { worker(); }) {}

HttpTraceSink::~HttpTraceSink() {
  flush();
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  cv_.notify_all();
  thread_.join();
}

void HttpTraceSink::send_mergelog(const Mergelog& log) { enqueue(log); }

void HttpTraceSink::send_span(const Span& span) { enqueue(span); }

void HttpTraceSink::enqueue(Message m) {
  {
    std::lock_guard lock(mutex_);
    queue_.push_back(std::move(m));
  }
  cv_.notify_one();
}

void HttpTraceSink::flush() {
  std::unique_lock lock(mutex_);
  idle_cv_.wait(lock, [this] { return queue_.empty() && !busy_; });
}

std::size_t HttpTraceSink::dropped() const {
  std::lock_guard lock(mutex_);
  return dropped_;
}

void HttpTraceSink::worker() {
  std::unique_lock lock(mutex_);
  while (true) {
    cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
    if (queue_.empty()) return;
    Message m = std::move(queue_.front());
    queue_.pop_front();
    busy_ = true;
    lock.unlock();

    bool delivered = false;
    for (int attempt = 0; attempt < max_attempts_ && !delivered; ++attempt) {
      try {
        std::visit([this](const auto& msg) {
          if constexpr (std::is_same_v<std::decay_t<decltype(msg)>, Mergelog>) {
            client_.post_mergelog(msg);
          } else {
            client_.post_span(msg);
          }
        }, m);
        delivered = true;
      } catch (const TransportError&) {
        std::this_thread::sleep_for(std::chrono::milliseconds(50 * (attempt + 1)));
      } catch (const Error&) {
        break;  // rejected by the server; retrying will not help
      }
    }

    lock.lock();
    if (!delivered) ++dropped_;
    busy_ = false;
    if (queue_.empty()) idle_cv_.notify_all();
  }
}

}  // namespace cascade_trace
