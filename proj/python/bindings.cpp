#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cascade_trace/error.hpp"
#include "cascade_trace/json_codec.hpp"
#include "cascade_trace/merge_graph.hpp"
#include "cascade_trace/sim/scenario.hpp"
#include "cascade_trace/trace_client.hpp"
#include "cascade_trace/trace_context.hpp"
#include "cascade_trace/trace_store.hpp"

namespace py = pybind11;
using namespace cascade_trace;

namespace {

// Python sees CPIDs as str and contexts as (cpid, [ancestors]).
using ContextPair = std::pair<std::string, std::vector<std::string>>;

std::vector<std::string> strs(const std::vector<Cpid>& cpids) {
  std::vector<std::string> out;
  for (const auto& c : cpids) out.push_back(c.str());
  return out;
}

std::vector<Cpid> cpids(const std::vector<std::string>& texts) {
  std::vector<Cpid> out;
  for (const auto& t : texts) out.push_back(Cpid::from_string(t));
  return out;
}

TraceContext to_context(const ContextPair& c) { return {Cpid::from_string(c.first), cpids(c.second)}; }
ContextPair from_context(const TraceContext& c) { return {c.cpid.str(), strs(c.ancestors)}; }

std::vector<TraceContext> to_contexts(const std::vector<ContextPair>& in) {
  std::vector<TraceContext> out;
  for (const auto& c : in) out.push_back(to_context(c));
  return out;
}

Mergelog make_log(const std::string& new_cpid, const std::vector<std::string>& sources, const std::string& ts) {
  return Mergelog{Cpid::from_string(new_cpid), cpids(sources), ts.empty() ? Timestamp{} : parse_rfc3339(ts)};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Change-propagation tracing: trace contexts, merge graphs and the control-plane simulator.";

  auto base = py::register_exception<Error>(m, "CascadeTraceError", PyExc_RuntimeError);
  py::register_exception<MalformedContext>(m, "MalformedContext", base.ptr());
  py::register_exception<EmptyInput>(m, "EmptyInput", base.ptr());
  py::register_exception<NotFound>(m, "NotFound", base.ptr());
  py::register_exception<CycleRejected>(m, "CycleRejected", base.ptr());
  py::register_exception<Timeout>(m, "Timeout", base.ptr());
  py::register_exception<TransportError>(m, "TransportError", base.ptr());

  m.attr("CPID_ANNOTATION") = std::string(kCpidAnnotation);
  m.attr("ANCESTORS_ANNOTATION") = std::string(kAncestorsAnnotation);
  m.attr("DEFAULT_ANCESTOR_LIMIT") = kDefaultAncestorLimit;

  m.def("is_uuid_v4", [](const std::string& s) { return is_uuid_v4(s); });
  m.def("new_cpid", [] {
    static UuidGenerator gen;
    return gen.next_string();
  });

  m.def("inject", [](Annotations annotations, const ContextPair& ctx) {
    inject(annotations, to_context(ctx));
    return annotations;
  }, py::arg("annotations"), py::arg("context"));
  m.def("extract", [](const Annotations& annotations, std::size_t n) -> std::optional<ContextPair> {
    const auto ctx = extract(annotations, n);
    if (!ctx) return std::nullopt;
    return from_context(*ctx);
  }, py::arg("annotations"), py::arg("ancestor_limit") = kDefaultAncestorLimit);

  m.def("build_cpid_graph", [](const std::vector<ContextPair>& contexts) {
    std::vector<std::pair<std::string, std::vector<std::string>>> out;
    for (const auto& [root, values] : build_cpid_graph(to_contexts(contexts))) out.emplace_back(root.str(), strs(values));
    return out;
  }, py::arg("contexts"));

  m.def("merge", [](const std::vector<ContextPair>& contexts, std::size_t n, std::uint64_t seed) {
    UuidGenerator gen(seed);
    const auto r = merge(to_contexts(contexts), n, gen, SystemClock{}.now());
    std::optional<std::pair<std::string, std::vector<std::string>>> log;
    if (r.mergelog) log.emplace(r.mergelog->new_cpid.str(), strs(r.mergelog->source_cpids));
    return std::make_pair(from_context(r.context), log);
  }, py::arg("contexts"), py::arg("ancestor_limit") = kDefaultAncestorLimit, py::arg("seed") = 1,
     "Returns (context, mergelog) where mergelog is (new_cpid, sources) or None.");

  py::class_<MergeGraph>(m, "MergeGraph")
      .def(py::init<>())
      .def("apply", [](MergeGraph& g, const std::string& new_cpid, const std::vector<std::string>& sources,
                       const std::string& timestamp) {
        return g.apply(make_log(new_cpid, sources, timestamp)) == ApplyOutcome::Applied;
      }, py::arg("new_cpid"), py::arg("sources") = std::vector<std::string>{}, py::arg("timestamp") = "",
         "Returns False for a duplicate mergelog.")
      .def("related", [](const MergeGraph& g, const std::string& c) { return strs(g.related(Cpid::from_string(c))); })
      .def("prune", [](MergeGraph& g, std::size_t max_nodes) { return strs(g.prune(max_nodes)); })
      .def("contains", [](const MergeGraph& g, const std::string& c) { return g.contains(Cpid::from_string(c)); })
      .def("__len__", &MergeGraph::size)
      .def("edge_count", &MergeGraph::edge_count)
      .def("to_json", [](const MergeGraph& g) { return to_json(g.snapshot()).dump(); });

  m.def("related", [](const std::string& server, const std::string& c) {
    return strs(HttpTraceClient(server).related(Cpid::from_string(c)));
  }, py::arg("server"), py::arg("cpid"));

  m.def("builtin_scenarios", &sim::builtin_scenario_names);

  m.def("run_scenario", [](const std::string& name, std::size_t n, std::uint64_t seed, bool deterministic,
                           bool tracing, bool kubelet, const std::optional<std::string>& server) {
    sim::SimConfig config;
    config.ancestor_limit = n;
    config.seed = seed;
    config.mode = deterministic ? sim::SimMode::Deterministic : sim::SimMode::Realistic;
    config.tracing = tracing;
    config.kubelet = kubelet;
    const auto scenario = sim::builtin_scenario(name);
    py::gil_scoped_release release;
    if (server) {
      HttpTraceSink sink(*server);
      HttpTraceClient client(*server);
      return to_json(sim::run_scenario(scenario, config, sink, client)).dump();
    }
    TraceStore store;
    StoreSink sink(store);
    return to_json(sim::run_scenario(scenario, config, sink, store)).dump();
  }, py::arg("name"), py::arg("ancestor_limit") = kDefaultAncestorLimit, py::arg("seed") = 1,
     py::arg("deterministic") = true, py::arg("tracing") = true, py::arg("kubelet") = true,
     py::arg("server") = std::nullopt, "Report as a JSON string. Without a server an in-process store is used.");
}
