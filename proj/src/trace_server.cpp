#include "cascade_trace/trace_server.hpp"

#include <httplib.h>

#include "cascade_trace/json_codec.hpp"

namespace cascade_trace {

using nlohmann::json;

namespace {

void reply_error(httplib::Response& res, int status, const std::string& message) {
  res.status = status;
  res.set_content(json{{"error", message}}.dump(), "application/json");
}

void reply_json(httplib::Response& res, const json& body) {
  res.status = 200;
  res.set_content(body.dump(), "application/json");
}

std::optional<Cpid> cpid_param(const httplib::Request& req) {
  if (!req.has_param("cpid")) return std::nullopt;
  return Cpid::from_string(req.get_param_value("cpid"));
}

// Runs a handler body and maps library errors onto HTTP statuses.
template <typename F>
httplib::Server::Handler guarded(F&& body) {
  return [body = std::forward<F>(body)](const httplib::Request& req, httplib::Response& res) {
    try {
      body(req, res);
    } catch (const NotFound& e) {
      reply_error(res, 404, e.what());
    } catch (const CycleRejected& e) {
      reply_error(res, 409, e.what());
    } catch (const MalformedContext& e) {
      reply_error(res, 400, e.what());
    } catch (const json::exception& e) {
      reply_error(res, 400, e.what());
    }
  };
}

}  // namespace

TraceServer::TraceServer(ServerConfig config)
    : config_(std::move(config)), http_(std::make_unique<httplib::Server>()) {
  http_->set_tcp_nodelay(true);
  // httplib defaults to SO_REUSEPORT, which lets a second server share the port silently
  http_->set_socket_options([](socket_t sock) {
    int yes = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  install_routes();
}

TraceServer::~TraceServer() { stop(); }

void TraceServer::install_routes() {
  auto& srv = *http_;

  srv.Post("/v1/mergelogs", guarded([this](const httplib::Request& req, httplib::Response& res) {
             store_.ingest_mergelog(mergelog_from_json(json::parse(req.body)));
             res.status = 204;
           }));

  srv.Get("/v1/mergelogs", guarded([this](const httplib::Request& req, httplib::Response& res) {
            json out = json::array();
            for (const auto& m : store_.list_mergelogs(cpid_param(req))) out.push_back(to_json(m));
            reply_json(res, out);
          }));

  srv.Post("/v1/spans", guarded([this](const httplib::Request& req, httplib::Response& res) {
             store_.ingest_span(span_from_json(json::parse(req.body)));
             res.status = 204;
           }));

  srv.Get("/v1/spans", guarded([this](const httplib::Request& req, httplib::Response& res) {
            json out = json::array();
            for (const auto& s : store_.list_spans(cpid_param(req))) out.push_back(to_json(s));
            reply_json(res, out);
          }));

  srv.Get("/v1/related", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const auto cpid = cpid_param(req);
            if (!cpid) throw MalformedContext("missing 'cpid' query parameter");
            reply_json(res, json{{"cpids", to_json(store_.related(*cpid))}});
          }));

  srv.Post("/v1/prune", guarded([this](const httplib::Request& req, httplib::Response& res) {
             const json body = json::parse(req.body);
             const auto it = body.find("max_nodes");
             if (it == body.end() || !it->is_number_integer() || it->get<long long>() < 0)
               throw MalformedContext("'max_nodes' must be a non-negative integer");
             const auto removed = store_.prune(it->get<std::size_t>());
             reply_json(res, json{{"removed", to_json(removed)}});
           }));

  srv.Get("/v1/graph", guarded([this](const httplib::Request&, httplib::Response& res) {
            reply_json(res, to_json(store_.graph()));
          }));

  srv.Get("/v1/config", guarded([this](const httplib::Request&, httplib::Response& res) {
            reply_json(res, json{{"n_ancestors", config_.ancestor_limit},
                                 {"max_graph_nodes", config_.max_graph_nodes
                                                         ? json(*config_.max_graph_nodes)
                                                         : json(nullptr)}});
          }));
}

int TraceServer::bind() {
  if (port_ >= 0) return port_;
  if (config_.port == 0) {
    port_ = http_->bind_to_any_port(config_.host);
  } else {
    port_ = http_->bind_to_port(config_.host, config_.port) ? config_.port : -1;
  }
  if (port_ < 0)
    throw AddressInUse("cannot listen on " + config_.host + ":" + std::to_string(config_.port));
  return port_;
}

void TraceServer::start() {
  bind();
  if (config_.max_graph_nodes) prune_thread_ = std::thread([this] { prune_loop(); });
  serve_thread_ = std::thread([this] { http_->listen_after_bind(); });
  http_->wait_until_ready();
}

void TraceServer::run() {
  bind();
  if (config_.max_graph_nodes) prune_thread_ = std::thread([this] { prune_loop(); });
  http_->listen_after_bind();
}

void TraceServer::stop() {
  {
    std::lock_guard lock(prune_mutex_);
    stopping_ = true;
  }
  prune_cv_.notify_all();
  http_->stop();
  if (serve_thread_.joinable()) serve_thread_.join();
  if (prune_thread_.joinable()) prune_thread_.join();
}

void TraceServer::prune_loop() {
  std::unique_lock lock(prune_mutex_);
  while (!prune_cv_.wait_for(lock, config_.prune_interval, [this] { return stopping_; })) {
    if (store_.node_count() > *config_.max_graph_nodes) store_.prune(*config_.max_graph_nodes);
  }
}

}  // namespace cascade_trace
