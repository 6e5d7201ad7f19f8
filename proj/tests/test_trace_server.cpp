#include <doctest.h>

#include <httplib.h>

#include <json.hpp>
#include <thread>

#include "cascade_trace/error.hpp"
#include "cascade_trace/json_codec.hpp"
#include "cascade_trace/trace_client.hpp"
#include "cascade_trace/trace_server.hpp"
#include "support.hpp"

using namespace cascade_trace;
using nlohmann::json;
using testing::at_ms;
using testing::mlog;
using testing::u;

namespace {

struct Running {
  explicit Running(ServerConfig c = {}) : server([&] {
    c.port = 0;
    return c;
  }()) {
    server.start();
    url = "http://127.0.0.1:" + std::to_string(server.port());
  }
  TraceServer server;
  std::string url;
};

Span span(const Cpid& c, unsigned id) {
  return Span{c, u(5000 + id).str(), std::nullopt, "svc", "op", at_ms(1), at_ms(3)};
}

}  // namespace

TEST_CASE("empty server answers") {
  Running r;
  httplib::Client http(r.url);
  auto res = http.Get("/v1/graph");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(json::parse(res->body) == json{{"nodes", json::array()}, {"edges", json::array()}});
  res = http.Get("/v1/mergelogs");
  REQUIRE(res);
  CHECK(json::parse(res->body) == json::array());
  res = http.Get("/v1/config");
  REQUIRE(res);
  CHECK(json::parse(res->body) == json{{"n_ancestors", 5}, {"max_graph_nodes", nullptr}});
}

TEST_CASE("status codes") {
  Running r;
  httplib::Client http(r.url);
  const std::string ok = to_json(mlog(u(1), {}, at_ms(1))).dump();
  auto res = http.Post("/v1/mergelogs", ok, "application/json");
  REQUIRE(res);
  CHECK(res->status == 204);

  res = http.Post("/v1/mergelogs", "{not json", "application/json");
  CHECK(res->status == 400);
  res = http.Post("/v1/mergelogs", R"({"new_cpid":"bad","source_cpids":[],"timestamp":"2024-01-01T00:00:00Z"})",
                  "application/json");
  CHECK(res->status == 400);
  CHECK(r.server.store().node_count() == 1);

  res = http.Post("/v1/mergelogs", to_json(mlog(u(2), {u(1)})).dump(), "application/json");
  CHECK(res->status == 204);
  res = http.Post("/v1/mergelogs", to_json(mlog(u(1), {u(2)})).dump(), "application/json");
  CHECK(res->status == 409);

  CHECK(http.Get("/v1/related?cpid=" + u(9).str())->status == 404);
  CHECK(http.Get("/v1/mergelogs?cpid=" + u(9).str())->status == 404);
  CHECK(http.Get("/v1/spans?cpid=" + u(9).str())->status == 404);
  CHECK(http.Get("/v1/related?cpid=garbage")->status == 400);
  CHECK(http.Get("/v1/related")->status == 400);

  res = http.Post("/v1/spans", to_json(span(u(1), 1)).dump(), "application/json");
  CHECK(res->status == 204);
  res = http.Post("/v1/spans", R"({"cpid": 3})", "application/json");
  CHECK(res->status == 400);

  res = http.Post("/v1/prune", R"({"max_nodes": -1})", "application/json");
  CHECK(res->status == 400);
  res = http.Post("/v1/prune", R"({"max_nodes": 100})", "application/json");
  REQUIRE(res->status == 200);
  CHECK(json::parse(res->body) == json{{"removed", json::array()}});
}

TEST_CASE("client round trip") {
  Running r;
  HttpTraceClient client(r.url);
  const Cpid alpha = u(1), beta = u(2), gamma = u(3);
  client.post_mergelog(mlog(alpha, {}, at_ms(1)));
  client.post_mergelog(mlog(beta, {}, at_ms(2)));
  client.post_mergelog(mlog(gamma, {alpha, beta}, at_ms(3)));
  client.post_span(span(gamma, 1));

  CHECK(client.related(alpha) == std::vector<Cpid>{alpha, gamma});
  const auto logs = client.list_mergelogs(alpha);
  REQUIRE(logs.size() == 2);
  CHECK(logs[1] == mlog(gamma, {alpha, beta}, at_ms(3)));
  CHECK(client.list_mergelogs(std::nullopt).size() == 3);
  CHECK(client.list_spans(beta) == std::vector<Span>{span(gamma, 1)});

  const auto g = client.graph();
  CHECK(g.nodes.size() == 3);
  CHECK(g.edges.size() == 2);
  CHECK(client.server_ancestor_limit() == 5);

  CHECK_THROWS_AS(client.related(u(42)), NotFound);
  CHECK_THROWS_AS(client.post_mergelog(mlog(alpha, {gamma})), CycleRejected);

  CHECK(client.prune(2) == std::vector<Cpid>{alpha});
  CHECK(client.list_mergelogs(std::nullopt).size() == 2);
}

TEST_CASE("unreachable server") {
  HttpTraceClient client("http://127.0.0.1:1");
  CHECK_THROWS_AS(client.graph(), TransportError);
  CHECK_THROWS_AS(HttpTraceClient("not a url"), TransportError);
}

TEST_CASE("second server on the same port") {
  Running r;
  ServerConfig c;
  c.port = r.server.port();
  TraceServer again(c);
  CHECK_THROWS_AS(again.bind(), AddressInUse);
}

TEST_CASE("async sink delivers in order") {
  Running r;
  HttpTraceSink sink(r.url);
  for (unsigned i = 1; i <= 50; ++i) {
    sink.send_mergelog(mlog(u(i), i > 1 ? std::vector<Cpid>{u(i - 1)} : std::vector<Cpid>{}, at_ms(i)));
    sink.send_span(span(u(i), i));
  }
  sink.flush();
  CHECK(sink.dropped() == 0);
  CHECK(r.server.store().mergelog_count() == 50);
  CHECK(r.server.store().span_count() == 50);
  CHECK(r.server.store().related(u(1)).size() == 50);
}

TEST_CASE("sink does not retry rejected messages") {
  Running r;
  HttpTraceSink sink(r.url);
  sink.send_mergelog(mlog(u(2), {u(1)}));
  sink.send_mergelog(mlog(u(1), {u(2)}));  // cycle
  sink.flush();
  CHECK(sink.dropped() == 1);
}

TEST_CASE("periodic prune honors max_graph_nodes") {
  ServerConfig c;
  c.max_graph_nodes = 3;
  c.prune_interval = std::chrono::milliseconds(20);
  Running r(c);
  HttpTraceClient client(r.url);
  for (unsigned i = 1; i <= 10; ++i) client.post_mergelog(mlog(u(i), {}, at_ms(i)));
  for (int i = 0; i < 200 && r.server.store().node_count() > 3; ++i)
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  CHECK(r.server.store().node_count() == 3);
  CHECK(client.related(u(10)) == std::vector<Cpid>{u(10)});
  CHECK_THROWS_AS(client.related(u(1)), NotFound);
}

TEST_CASE("concurrent clients") {
  Running r;
  std::vector<std::thread> threads;
  for (unsigned t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      HttpTraceClient client(r.url);
      for (unsigned i = 1; i <= 40; ++i) {
        client.post_mergelog(mlog(u(t * 1000 + i), {}, at_ms(i)));
        client.post_span(span(u(t * 1000 + i), t * 1000 + i));
      }
    });
  }
  for (auto& th : threads) th.join();
  CHECK(r.server.store().mergelog_count() == 160);
  CHECK(r.server.store().span_count() == 160);
}
