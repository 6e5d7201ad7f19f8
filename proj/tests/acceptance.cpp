// Acceptance checks. One PASS/FAIL line per criterion; exit status is the
// number of failures. argv[1], when given, is the cascade-trace executable
// used to start trace servers as child processes.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cascade_trace/error.hpp"
#include "cascade_trace/graph_shape.hpp"
#include "cascade_trace/merge_graph.hpp"
#include "cascade_trace/sim/scenario.hpp"
#include "cascade_trace/sweep.hpp"
#include "cascade_trace/trace_context.hpp"
#include "cascade_trace/trace_store.hpp"
#include "support.hpp"

using namespace cascade_trace;
using testing::at_ms;
using testing::mlog;
using testing::u;

namespace {

std::string cli_path;

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Keeps the first failure plus a summary line that is printed either way.
class Check {
 public:
  void fail(const std::string& why) {
    if (first_failure_.empty()) first_failure_ = why;
    pass_ = false;
  }
  void expect(bool ok, const std::string& why) {
    if (!ok) fail(why);
  }
  void note(const std::string& text) { note_ = text; }
  bool passing() const { return pass_; }
  Outcome result() const {
    if (pass_) return {true, note_};
    return {false, note_.empty() ? first_failure_ : first_failure_ + "; " + note_};
  }

 private:
  bool pass_ = true;
  std::string first_failure_;
  std::string note_;
};

std::string join(const std::vector<Cpid>& cpids, const std::map<Cpid, int>& label) {
  std::string out = "[";
  for (std::size_t i = 0; i < cpids.size(); ++i) out += (i ? "," : "") + std::to_string(label.at(cpids[i]));
  return out + "]";
}

std::unique_ptr<SweepBackend> make_backend(std::size_t n) {
  if (cli_path.empty()) return std::make_unique<InProcessBackend>();
  return std::make_unique<ServerProcessBackend>(cli_path, n);
}

sim::SimConfig deterministic(std::size_t n, std::uint64_t seed = 1) {
  sim::SimConfig c;
  c.ancestor_limit = n;
  c.seed = seed;
  return c;
}

// --- 1 ----------------------------------------------------------------------

Outcome reference_graph() {
  Check c;
  TraceStore store;
  std::map<Cpid, int> label;
  for (int i = 1; i <= 8; ++i) label[u(i)] = i;
  for (unsigned i : {1u, 2u, 4u, 6u, 8u}) store.ingest_mergelog(mlog(u(i), {}, at_ms(i)));
  store.ingest_mergelog(mlog(u(3), {u(1), u(2)}, at_ms(3)));
  store.ingest_mergelog(mlog(u(5), {u(3), u(4)}, at_ms(5)));
  store.ingest_mergelog(mlog(u(7), {u(2), u(4), u(6)}, at_ms(7)));

  // expected related sets
  const std::map<int, std::set<int>> rows{{1, {1, 3, 5}}, {2, {2, 3, 5, 7}}, {3, {3, 5}}, {4, {4, 5, 7}},
                                          {5, {5}},       {6, {6, 7}},       {7, {7}},    {8, {8}}};
  // breadth-first layers, lexicographic within a layer
  const std::map<int, std::vector<int>> ordered{{1, {1, 3, 5}}, {2, {2, 3, 7, 5}}, {3, {3, 5}}, {4, {4, 5, 7}},
                                                {5, {5}},       {6, {6, 7}},       {7, {7}},    {8, {8}}};
  for (const auto& [row, want] : rows) {
    const auto got = store.related(u(row));
    std::set<int> as_set;
    std::vector<int> as_list;
    for (const auto& g : got) {
      as_set.insert(label.at(g));
      as_list.push_back(label.at(g));
    }
    c.expect(as_set == want, "row " + std::to_string(row) + " got " + join(got, label));
    c.expect(as_list == ordered.at(row), "row " + std::to_string(row) + " order " + join(got, label));
  }
  c.note("8 rows match");
  return c.result();
}

// --- 2 ----------------------------------------------------------------------

Outcome fig5() {
  Check c;
  auto backend = make_backend(kDefaultAncestorLimit);
  const auto report = sim::run_scenario(sim::builtin_scenario("fig5-service"), deterministic(5), backend->sink(),
                                        backend->query());
  const auto logs = backend->query().list_mergelogs(std::nullopt);
  std::size_t registrations = 0, two_source = 0, other = 0;
  std::optional<Cpid> merged;
  for (const auto& l : logs) {
    if (l.source_cpids.empty()) {
      ++registrations;
    } else if (l.source_cpids.size() == 2) {
      ++two_source;
      merged = l.new_cpid;
    } else {
      ++other;
    }
  }
  c.expect(registrations == 2, "root registrations: " + std::to_string(registrations));
  c.expect(two_source == 1, "two-source merges: " + std::to_string(two_source));
  c.expect(other == 0, "other mergelogs: " + std::to_string(other));
  c.expect(report.root_cpids.size() == 2, "roots reported: " + std::to_string(report.root_cpids.size()));
  for (const auto& root : report.root_cpids) {
    if (!merged) break;
    const auto rel = backend->query().related(root);
    c.expect(std::find(rel.begin(), rel.end(), *merged) != rel.end(), "merged CPID not related to " + root.str());
    const auto spans = backend->query().list_spans(root);
    const bool endpoints = std::any_of(spans.begin(), spans.end(), [](const Span& s) {
      return s.service == "endpoints-controller";
    });
    c.expect(endpoints, "no endpoints-controller spans under " + root.str());
  }
  c.note("2 registrations, 1 merge of 2 sources, " + std::to_string(report.span_count) + " spans");
  return c.result();
}

// --- 3 ----------------------------------------------------------------------

std::size_t downstream_merges(const sim::ScenarioReport& r) {
  std::size_t n = 0;
  for (const auto& name : {"deployment-controller", "replicaset-controller"}) {
    const auto it = r.mergelogs_by_component.find(name);
    if (it != r.mergelogs_by_component.end()) n += it->second;
  }
  return n;
}

Outcome replacement() {
  Check c;
  std::ostringstream detail;
  for (std::size_t n : {0, 1, 2, 3, 5}) {
    auto backend = make_backend(n);
    const auto r = sim::run_scenario(sim::builtin_scenario("repeated-update"), deterministic(n), backend->sink(),
                                     backend->query());
    const auto merges = downstream_merges(r);
    detail << "N=" << n << ":" << merges << " ";
    if (n == 0) {
      c.expect(merges >= 1, "N=0 produced no downstream merge");
    } else {
      c.expect(merges == 0, "N=" + std::to_string(n) + " produced " + std::to_string(merges) + " downstream merges");
    }
  }
  c.note("deployment+replicaset mergelogs " + detail.str());
  return c.result();
}

// --- 4 ----------------------------------------------------------------------

Outcome n_sweep() {
  Check c;
  SweepOptions options;
  options.n_values = {0, 1, 2, 3, 5, 10, 15, 20, 30};
  options.repeats = 3;
  const auto summary = summarize(run_sweep(options, make_backend));
  std::map<std::size_t, double> mean;
  std::ostringstream detail;
  for (const auto& s : summary) {
    mean[s.n] = s.mean;
    detail << s.n << ":" << s.mean << " ";
  }
  for (std::size_t i = 1; i < summary.size(); ++i)
    c.expect(summary[i].mean <= summary[i - 1].mean,
             "increase from N=" + std::to_string(summary[i - 1].n) + " to N=" + std::to_string(summary[i].n));
  c.expect(mean[15] == mean[20] && mean[20] == mean[30], "no plateau over N=15,20,30");
  c.expect(mean[0] > 0 && mean[10] / mean[0] < 0.5, "count(10)/count(0) not below 0.5");
  c.note("means " + detail.str());
  return c.result();
}

// --- 5 ----------------------------------------------------------------------

// Random mergelog sequence over at most `max_nodes` CPIDs. Every new node
// either registers as a root or merges 1-3 earlier nodes, so the result is a DAG.
std::vector<Mergelog> random_history(std::mt19937& rng, int max_nodes) {
  std::vector<Mergelog> logs;
  const int count = std::uniform_int_distribution<int>(1, max_nodes)(rng);
  std::vector<int> order(count);
  for (int i = 0; i < count; ++i) order[i] = i + 1;
  std::shuffle(order.begin(), order.end(), rng);  // CPID order unrelated to time
  for (int i = 0; i < count; ++i) {
    std::vector<Cpid> sources;
    if (i > 0 && std::bernoulli_distribution(0.6)(rng)) {
      const int k = std::uniform_int_distribution<int>(1, std::min(3, i))(rng);
      std::vector<int> pick(i);
      for (int j = 0; j < i; ++j) pick[j] = j;
      std::shuffle(pick.begin(), pick.end(), rng);
      for (int j = 0; j < k; ++j) sources.push_back(u(order[pick[j]]));
    }
    const long ts = std::uniform_int_distribution<long>(0, 3)(rng) + i;  // ties happen
    logs.push_back(mlog(u(order[i]), std::move(sources), at_ms(ts)));
  }
  return logs;
}

Outcome prune_safety() {
  Check c;
  std::mt19937 rng(20240101);
  std::size_t prunes = 0;
  for (int trial = 0; trial < 500 && c.passing(); ++trial) {
    MergeGraph base;
    std::multimap<Cpid, Cpid> edges;
    for (const auto& log : random_history(rng, 12)) {
      base.apply(log);
      for (const auto& s : log.source_cpids) edges.emplace(s, log.new_cpid);
    }
    std::map<Cpid, std::set<Cpid>> before;
    for (const auto& node : base.snapshot().nodes) before[node.cpid] = testing::reachable(edges, node.cpid);

    for (std::size_t max = 0; max <= base.size(); ++max) {
      ++prunes;
      MergeGraph g = base;
      const auto removed = g.prune(max);
      const std::string where = "trial " + std::to_string(trial) + " max_nodes " + std::to_string(max);

      // replay removals: each one must have no in-edge from a node still present
      std::set<Cpid> gone;
      for (const auto& r : removed) {
        for (const auto& [from, to] : edges)
          if (to == r && !gone.contains(from)) c.fail(where + ": removed " + r.str() + " with in-degree >= 1");
        gone.insert(r);
      }
      c.expect(g.size() <= max || std::none_of(g.snapshot().nodes.begin(), g.snapshot().nodes.end(),
                                               [&](const GraphNode& n) { return g.in_degree(n.cpid) == 0; }),
               where + ": stopped early");

      // acyclic: Kahn's algorithm consumes every node
      const auto snap = g.snapshot();
      std::map<Cpid, int> indeg;
      for (const auto& n : snap.nodes) indeg[n.cpid] = 0;
      for (const auto& e : snap.edges) ++indeg[e.to];
      std::vector<Cpid> ready;
      for (const auto& [k, d] : indeg)
        if (d == 0) ready.push_back(k);
      std::size_t seen = 0;
      while (!ready.empty()) {
        const Cpid cur = ready.back();
        ready.pop_back();
        ++seen;
        for (const auto& e : snap.edges)
          if (e.from == cur && --indeg[e.to] == 0) ready.push_back(e.to);
      }
      c.expect(seen == snap.nodes.size(), where + ": cycle");

      for (const auto& n : snap.nodes) {
        if (g.in_degree(n.cpid) != 0) continue;
        const auto rel = g.related(n.cpid);
        c.expect(std::set<Cpid>(rel.begin(), rel.end()) == before.at(n.cpid),
                 where + ": related set of surviving root " + n.cpid.str() + " changed");
      }
    }
  }
  c.note(std::to_string(prunes) + " prunes over 500 graphs");
  return c.result();
}

// --- 6 ----------------------------------------------------------------------

// Contexts reachable by a random history of root creations and merges with a
// random ancestor bound; inputs are drawn from that pool with repetition.
std::vector<TraceContext> random_inputs(std::mt19937& rng, UuidGenerator& gen) {
  const std::size_t limit = std::uniform_int_distribution<std::size_t>(0, 6)(rng);
  std::vector<TraceContext> pool;
  const int roots = std::uniform_int_distribution<int>(1, 4)(rng);
  for (int i = 0; i < roots; ++i) pool.push_back(new_root_context(gen));
  const int steps = std::uniform_int_distribution<int>(0, 8)(rng);
  for (int i = 0; i < steps; ++i) {
    std::vector<TraceContext> in;
    const int k = std::uniform_int_distribution<int>(1, 3)(rng);
    for (int j = 0; j < k; ++j) in.push_back(pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)]);
    pool.push_back(merge(in, limit, gen, at_ms(i)).context);
  }
  std::vector<TraceContext> out;
  const int k = std::uniform_int_distribution<int>(1, 6)(rng);
  for (int j = 0; j < k; ++j) out.push_back(pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)]);
  return out;
}

// Input CPIDs that no other input names as an ancestor, directly or through
// the ancestor lists carried by the inputs.
std::set<Cpid> oracle_sources(const std::vector<TraceContext>& inputs) {
  std::multimap<Cpid, Cpid> edges;  // ancestor -> descendant
  for (const auto& t : inputs)
    for (const auto& a : t.ancestors) edges.emplace(a, t.cpid);
  std::set<Cpid> cpids;
  for (const auto& t : inputs) cpids.insert(t.cpid);
  std::set<Cpid> sources;
  for (const auto& c : cpids) {
    bool covered = false;
    for (const auto& other : cpids) {
      if (other == c) continue;
      const auto down = testing::reachable(edges, c);
      if (down.contains(other)) covered = true;
    }
    if (!covered) sources.insert(c);
  }
  return sources;
}

Outcome root_oracle() {
  Check c;
  std::mt19937 rng(7);
  UuidGenerator gen(7);
  std::size_t mismatches = 0, merging = 0;
  std::string first;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto inputs = random_inputs(rng, gen);
    const auto graph = build_cpid_graph(inputs);
    const auto want = oracle_sources(inputs);
    std::set<Cpid> keys;
    for (const auto& [k, _] : graph) keys.insert(k);
    const auto result = merge(inputs, kDefaultAncestorLimit, gen, at_ms(0));
    if (result.mergelog) ++merging;
    const bool ok = graph.size() == want.size() && result.mergelog.has_value() == (graph.size() >= 2);
    if (!ok) {
      if (mismatches++ == 0)
        first = "trial " + std::to_string(trial) + ": " + std::to_string(graph.size()) + " roots vs oracle " +
                std::to_string(want.size());
    }
  }
  c.expect(mismatches == 0, std::to_string(mismatches) + " mismatches, first " + first);
  c.note("1000 inputs, " + std::to_string(merging) + " of them needing a merge");
  return c.result();
}

// --- 7 ----------------------------------------------------------------------

Outcome non_instrumented() {
  Check c;
  GraphSnapshot graphs[2];
  std::size_t kubelet_writes = 0, pods_checked = 0;
  for (int with_kubelet = 0; with_kubelet < 2; ++with_kubelet) {
    TraceStore store;
    StoreSink sink(store);
    auto config = deterministic(5);
    config.kubelet = with_kubelet == 1;

    // last stored state of every Pod, to compare against the kubelet's write
    std::map<std::string, sim::SimObject> last;
    sim::RunHooks hooks;
    hooks.before = [&](sim::ControlPlane& cp) {
      cp.store().watch(sim::Kind::Pod, [&](const sim::WatchEvent& ev) {
        if (ev.type == sim::EventType::Deleted) {
          last.erase(ev.object.name);
          return;
        }
        const auto prev = last.find(ev.object.name);
        if (config.kubelet && prev != last.end() &&
            prev->second.as<sim::PodSpec>().phase == sim::PodPhase::Scheduled &&
            ev.object.as<sim::PodSpec>().phase == sim::PodPhase::Ready) {
          ++kubelet_writes;
          if (ev.object.annotations != prev->second.annotations)
            c.fail("kubelet changed annotations of pod " + ev.object.name);
        }
        last[ev.object.name] = ev.object;
      });
    };
    hooks.after = [&](sim::ControlPlane& cp) {
      for (const auto& pod : cp.store().list(sim::Kind::Pod)) {
        ++pods_checked;
        c.expect(pod.as<sim::PodSpec>().phase == sim::PodPhase::Ready, "pod " + pod.name + " not Ready");
        c.expect(extract_lenient(pod.annotations, config.ancestor_limit).has_value(),
                 "pod " + pod.name + " lost its trace context");
      }
    };
    sim::run_scenario(sim::builtin_scenario("scale-up"), config, sink, store, nullptr, hooks);
    graphs[with_kubelet] = store.graph();
  }
  c.expect(kubelet_writes >= 50, "only " + std::to_string(kubelet_writes) + " kubelet writes observed");
  c.expect(isomorphic(graphs[0], graphs[1]),
           "graphs differ: " + std::to_string(graphs[0].nodes.size()) + "/" + std::to_string(graphs[0].edges.size()) +
               " vs " + std::to_string(graphs[1].nodes.size()) + "/" + std::to_string(graphs[1].edges.size()));
  c.note(std::to_string(graphs[1].nodes.size()) + " nodes, " + std::to_string(graphs[1].edges.size()) +
         " edges in both; " + std::to_string(kubelet_writes) + " kubelet writes kept annotations");
  return c.result();
}

// --- 8 ----------------------------------------------------------------------

Outcome one_cpid() {
  Check c;
  std::size_t runs = 0, writes = 0;
  for (const auto& name : sim::builtin_scenario_names()) {
    for (std::size_t n : {0, 1, 5, 15}) {
      for (bool kubelet : {true, false}) {
        TraceStore store;
        StoreSink sink(store);
        auto config = deterministic(n, 3);
        config.kubelet = kubelet;
        sim::RunHooks hooks;
        hooks.after = [&](sim::ControlPlane& cp) { writes += cp.audited_writes(); };
        const auto r = sim::run_scenario(sim::builtin_scenario(name), config, sink, store, nullptr, hooks);
        ++runs;
        for (const auto& v : r.audit_violations) c.fail(name + " N=" + std::to_string(n) + ": " + v);
      }
    }
  }
  {
    TraceStore store;
    StoreSink sink(store);
    auto config = deterministic(2);
    config.mode = sim::SimMode::Realistic;
    sim::RunHooks hooks;
    hooks.after = [&](sim::ControlPlane& cp) { writes += cp.audited_writes(); };
    const auto r = sim::run_scenario(sim::builtin_scenario("fig5-service"), config, sink, store, nullptr, hooks);
    ++runs;
    for (const auto& v : r.audit_violations) c.fail("realistic fig5-service: " + v);
  }
  c.expect(writes > 0, "audit hook saw no writes");
  c.note(std::to_string(runs) + " runs, " + std::to_string(writes) + " audited writes, 0 violations");
  return c.result();
}

// --- 9 ----------------------------------------------------------------------

Outcome overhead() {
  Check c;
  if (cli_path.empty()) {
    c.fail("no server executable given");
    return c.result();
  }
  const auto scenario = sim::builtin_scenario("scale-up");
  double traced = 0, untraced = 0;
  long rss = 0;
  constexpr int kRuns = 3;
  for (int i = 0; i < kRuns; ++i) {
    ServerProcessBackend backend(cli_path, kDefaultAncestorLimit);
    auto config = deterministic(5, 1 + i);
    config.mode = sim::SimMode::Realistic;
    config.tracing = false;
    untraced += sim::run_scenario(scenario, config, backend.sink(), backend.query()).wall_time_seconds;
    config.tracing = true;
    const auto r = sim::run_scenario(scenario, config, backend.sink(), backend.query());
    traced += r.wall_time_seconds;
    c.expect(r.mergelog_count > 0, "traced run recorded no mergelogs");
    rss = std::max(rss, backend.process().rss_kib().value_or(-1));
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "traced %.3fs, untraced %.3fs (%.2fx), server RSS %ld KiB", traced / kRuns,
                untraced / kRuns, traced / untraced, rss);
  c.expect(traced < 3 * untraced, std::string("too slow: ") + buf);
  c.expect(rss > 0 && rss < 128 * 1024, std::string("memory: ") + buf);
  c.note(buf);
  return c.result();
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) cli_path = argv[1];
  struct Criterion {
    const char* title;
    std::function<Outcome()> run;
    double budget_seconds;
  };
  const std::vector<Criterion> criteria{
      {"reference graph reachability", reference_graph, 1},
      {"fig5-service end to end", fig5, 10},
      {"ancestor CPID replacement", replacement, 10},
      {"N sweep trend", n_sweep, 300},
      {"prune safety", prune_safety, 30},
      {"merge root oracle", root_oracle, 10},
      {"non-instrumented kubelet", non_instrumented, 30},
      {"one CPID per object", one_cpid, 300},
      {"overhead and server memory", overhead, 120},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[i].run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (out.pass && secs > criteria[i].budget_seconds) {
      out.pass = false;
      out.detail += "; over time budget";
    }
    if (!out.pass) ++failures;
    std::printf("criterion %zu %s: %s (%s) [%.2fs]\n", i + 1, out.pass ? "PASS" : "FAIL", criteria[i].title,
                out.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures;
}
