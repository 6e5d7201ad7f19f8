// cascade-trace: trace server, scenario runner and investigation tool.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cascade_trace/error.hpp"
#include "cascade_trace/flame.hpp"
#include "cascade_trace/graph_export.hpp"
#include "cascade_trace/investigate.hpp"
#include "cascade_trace/json_codec.hpp"
#include "cascade_trace/server_process.hpp"
#include "cascade_trace/sim/scenario.hpp"
#include "cascade_trace/sweep.hpp"
#include "cascade_trace/trace_client.hpp"
#include "cascade_trace/trace_server.hpp"

namespace ct = cascade_trace;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitServer = 2;
constexpr int kExitNotFound = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void emit(const std::string& text, const std::string& output) {
  if (output.empty() || output == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(output);
  if (!out) throw UsageError("cannot write " + output);
  out << text;
}

ct::Cpid parse_cpid(const std::string& text) {
  auto c = ct::Cpid::parse(text);
  if (!c) throw UsageError("not a CPID: " + text);
  return *c;
}

struct Common {
  std::string server = ct::kDefaultServerUrl;
  std::size_t n_ancestors = ct::kDefaultAncestorLimit;
  std::uint64_t seed = 1;
  bool deterministic = false;
  std::string format;
  std::string log_file;
  std::string scenario;
  std::string output;
};

int cmd_serve(const std::string& host, int port, std::optional<std::size_t> max_nodes, std::size_t n) {
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  ct::ServerConfig config;
  config.host = host;
  config.port = port;
  config.max_graph_nodes = max_nodes;
  config.ancestor_limit = n;
  ct::TraceServer server(config);
  const int bound = server.bind();
  server.start();
  std::printf("listening on http://%s:%d\n", host.c_str(), bound);
  std::fflush(stdout);
  int sig = 0;
  sigwait(&signals, &sig);
  server.stop();
  return kExitOk;
}

std::string report_table(const ct::sim::ScenarioReport& r) {
  std::ostringstream os;
  os << "scenario        " << r.scenario << "\n"
     << "n_ancestors     " << r.n << "\n"
     << "seed            " << r.seed << "\n"
     << "mode            " << (r.deterministic ? "deterministic" : "realistic") << "\n"
     << "tracing         " << (r.tracing ? "on" : "off") << "\n"
     << "mergelogs       " << r.mergelog_count << "\n"
     << "spans           " << r.span_count << "\n"
     << "wall time       " << r.wall_time_seconds << " s\n";
  for (const auto& [c, k] : r.mergelogs_by_component) os << "  " << c << " mergelogs sent: " << k << "\n";
  if (!r.audit_violations.empty()) os << "audit violations " << r.audit_violations.size() << "\n";
  os << "root CPIDs (" << r.root_cpids.size() << "):\n";
  for (const auto& c : r.root_cpids) os << "  " << c.str() << "\n";
  return os.str();
}

int cmd_run(const Common& o, const std::string& scenario_file, bool no_trace) {
  ct::sim::Scenario scenario;
  try {
    scenario = scenario_file.empty() ? ct::sim::builtin_scenario(o.scenario) : ct::sim::load_scenario_file(scenario_file);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  ct::HttpTraceClient client(o.server);
  const std::size_t server_n = client.server_ancestor_limit();  // fails fast when unreachable
  if (server_n != o.n_ancestors)
    std::cerr << "note: server is configured with N=" << server_n << ", running with N=" << o.n_ancestors << "\n";
  ct::HttpTraceSink sink(o.server);

  ct::sim::SimConfig config;
  config.mode = o.deterministic ? ct::sim::SimMode::Deterministic : ct::sim::SimMode::Realistic;
  config.seed = o.seed;
  config.ancestor_limit = o.n_ancestors;
  config.tracing = !no_trace;
  std::unique_ptr<ct::sim::JsonlLogWriter> logs;
  if (!o.log_file.empty()) logs = std::make_unique<ct::sim::JsonlLogWriter>(o.log_file);

  const auto report = ct::sim::run_scenario(scenario, config, sink, client, logs.get());
  if (sink.dropped() > 0) std::cerr << "warning: " << sink.dropped() << " trace message(s) were not delivered\n";
  const std::string json = ct::sim::to_json(report).dump(2) + "\n";
  if (o.format == "json")
    emit(json, o.output);
  else
    emit(report_table(report) + "\n" + json, o.output);
  return report.audit_violations.empty() ? kExitOk : kExitServer;
}

int cmd_investigate(const Common& o, const std::string& cpid_text) {
  const ct::Cpid cpid = parse_cpid(cpid_text);
  ct::HttpTraceClient client(o.server);
  std::optional<std::string> log_path;
  if (!o.log_file.empty()) log_path = o.log_file;
  const auto result = ct::investigate(client, cpid, log_path);
  emit(o.format == "json" ? ct::to_json(result).dump(2) + "\n" : ct::render_table(result), o.output);
  return kExitOk;
}

int cmd_flame(const Common& o, const std::string& cpid_text) {
  const ct::Cpid cpid = parse_cpid(cpid_text);
  ct::HttpTraceClient client(o.server);
  const auto spans = client.list_spans(cpid);
  emit(o.format == "json" ? ct::span_tree(spans).dump(2) + "\n" : ct::folded_stacks(spans), o.output);
  return kExitOk;
}

int cmd_graph(const Common& o) {
  ct::HttpTraceClient client(o.server);
  const auto graph = client.graph();
  emit(o.format == "json" ? ct::to_json(graph).dump(2) + "\n" : ct::to_dot(graph), o.output);
  return kExitOk;
}

std::vector<std::size_t> parse_n_values(const std::string& text) {
  std::vector<std::size_t> out;
  std::istringstream in(text);
  for (std::string piece; std::getline(in, piece, ',');) {
    std::size_t used = 0;
    try {
      out.push_back(std::stoul(piece, &used));
    } catch (const std::logic_error&) {
      used = 0;
    }
    if (used == 0 || used != piece.size() || piece[0] == '-') throw UsageError("bad --n-values entry '" + piece + "'");
  }
  if (out.empty() || text.back() == ',') throw UsageError("--n-values needs a comma-separated list of integers");
  return out;
}

int cmd_sweep(const Common& o, const std::string& n_text, int repeats, bool in_process, const std::string& csv_path) {
  const auto n_values = parse_n_values(n_text);
  if (repeats < 1) throw UsageError("--repeats must be at least 1");
  ct::SweepOptions options;
  options.n_values = n_values;
  options.repeats = repeats;
  options.seed = o.seed;
  options.base.mode = o.deterministic ? ct::sim::SimMode::Deterministic : ct::sim::SimMode::Realistic;
  if (!o.scenario.empty()) options.scenario = o.scenario;
  const auto make_backend = [&](std::size_t n) -> std::unique_ptr<ct::SweepBackend> {
    if (in_process) return std::make_unique<ct::InProcessBackend>();
    return std::make_unique<ct::ServerProcessBackend>(ct::self_executable(), n);
  };
  std::vector<ct::SweepRow> rows;
  try {
    rows = ct::run_sweep(options, make_backend);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const std::string csv = ct::sweep_csv(rows);
  if (!csv_path.empty()) emit(csv, csv_path);
  emit(o.format == "csv" ? csv : ct::sweep_table(ct::summarize(rows)), o.output);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cascade-trace: tracing for cascading changes in declarative control planes"};
  app.require_subcommand(1);
  Common o;

  const auto add_server = [&](CLI::App* c) { c->add_option("--server", o.server, "Trace server URL")->capture_default_str(); };
  const auto add_n = [&](CLI::App* c) {
    c->add_option("--n-ancestors", o.n_ancestors, "Maximum ancestor CPIDs per object")->capture_default_str();
  };
  const auto add_output = [&](CLI::App* c) { c->add_option("-o,--output", o.output, "Write to a file instead of stdout"); };

  auto* serve = app.add_subcommand("serve", "Run the trace server until interrupted");
  std::string host = "127.0.0.1";
  int port = ct::kDefaultPort;
  std::optional<std::size_t> max_nodes;
  serve->add_option("--listen", host, "Listen address")->capture_default_str();
  serve->add_option("--port", port, "Port, 0 for ephemeral")->capture_default_str();
  serve->add_option("--max-graph-nodes", max_nodes, "Prune the merge graph to this many nodes");
  add_n(serve);

  auto* run = app.add_subcommand("run", "Run a scenario against the trace server");
  std::string scenario_file;
  bool no_trace = false;
  add_server(run);
  add_n(run);
  run->add_option("--scenario", o.scenario, "Built-in scenario name");
  run->add_option("--scenario-file", scenario_file, "Scenario JSON file")->check(CLI::ExistingFile);
  run->add_option("--seed", o.seed, "Seed")->capture_default_str();
  run->add_flag("--deterministic", o.deterministic, "Logical clock and seeded interleaving");
  run->add_flag("--no-trace", no_trace, "Disable instrumentation");
  run->add_option("--log-file", o.log_file, "Append controller logs (JSON Lines)");
  run->add_option("--format", o.format, "table or json")->check(CLI::IsMember({"table", "json"}));
  add_output(run);

  auto* inv = app.add_subcommand("investigate", "Related CPIDs, spans and logs for a CPID");
  std::string cpid;
  inv->add_option("cpid", cpid, "CPID")->required();
  add_server(inv);
  inv->add_option("--log-file", o.log_file, "JSON Lines log to scan");
  inv->add_option("--format", o.format, "table or json")->check(CLI::IsMember({"table", "json"}));
  add_output(inv);

  auto* flame = app.add_subcommand("flame", "Spans related to a CPID as folded stacks or a JSON tree");
  flame->add_option("cpid", cpid, "CPID")->required();
  add_server(flame);
  o.format = "";
  flame->add_option("--format", o.format, "folded or json")->check(CLI::IsMember({"folded", "json"}));
  add_output(flame);

  auto* graph = app.add_subcommand("graph", "Export the merge graph");
  add_server(graph);
  graph->add_option("--format", o.format, "dot or json")->check(CLI::IsMember({"dot", "json"}));
  add_output(graph);

  auto* sweep = app.add_subcommand("sweep", "Mergelog count against the ancestor limit");
  std::string n_values = "0,1,2,3,5,10,15,20,30";
  int repeats = 1;
  bool in_process = false;
  std::string csv_path;
  sweep->add_option("--n-values", n_values, "Comma-separated ancestor limits to try")->capture_default_str();
  sweep->add_option("--repeats", repeats, "Runs per N")->capture_default_str();
  sweep->add_option("--seed", o.seed, "Base seed; run r uses seed + r")->capture_default_str();
  sweep->add_flag("--deterministic", o.deterministic, "Logical clock and seeded interleaving");
  sweep->add_option("--scenario", o.scenario, "Built-in scenario name");
  sweep->add_flag("--in-process", in_process, "Use an in-process store instead of a server per run");
  sweep->add_option("--csv", csv_path, "Also write the per-run CSV here");
  sweep->add_option("--format", o.format, "table or csv")->check(CLI::IsMember({"table", "csv"}));
  add_output(sweep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*serve) return cmd_serve(host, port, max_nodes, o.n_ancestors);
    if (*run) {
      if (o.scenario.empty() == scenario_file.empty()) throw UsageError("give exactly one of --scenario or --scenario-file");
      return cmd_run(o, scenario_file, no_trace);
    }
    if (*inv) return cmd_investigate(o, cpid);
    if (*flame) return cmd_flame(o, cpid);
    if (*graph) return cmd_graph(o);
    if (*sweep) return cmd_sweep(o, n_values, repeats, in_process, csv_path);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ct::NotFound& e) {
    std::cerr << "error: unknown CPID " << (cpid.empty() ? std::string(e.what()) : cpid) << "\n";
    return kExitNotFound;
  } catch (const ct::AddressInUse& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitServer;
  } catch (const ct::TransportError& e) {
    std::cerr << "error: trace server: " << e.what() << "\n";
    return kExitServer;
  } catch (const ct::Timeout& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitServer;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitServer;
  }
  return kExitUsage;
}
