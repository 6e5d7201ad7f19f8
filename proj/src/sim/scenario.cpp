#include "cascade_trace/sim/scenario.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

#include "cascade_trace/error.hpp"

namespace cascade_trace::sim {

namespace {

std::string_view op_name(StepOp op) {
  switch (op) {
    case StepOp::Create: return "create";
    case StepOp::Scale: return "scale";
    case StepOp::WaitReady: return "wait_ready";
  }
  return "?";
}

ScenarioStep create_deployment(const std::string& name, int replicas, bool traced = true) {
  return {StepOp::Create, Kind::Deployment, name, replicas, name, "", traced};
}

ScenarioStep scale(const std::string& name, int replicas, bool traced = true) {
  return {StepOp::Scale, Kind::Deployment, name, replicas, "", "", traced};
}

ScenarioStep wait_ready() { return {}; }

SimObject object_for(const ScenarioStep& s) {
  SimObject o;
  o.name = s.name;
  switch (s.kind) {
    case Kind::Deployment:
      o.spec = DeploymentSpec{s.replicas, s.label.empty() ? s.name : s.label, 0};
      break;
    case Kind::Service:
      o.spec = ServiceSpec{s.selector.empty() ? s.name : s.selector};
      break;
    default:
      throw std::invalid_argument("scenarios may only create Deployments and Services");
  }
  return o;
}

}  // namespace

Scenario scenario_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("steps") || !j["steps"].is_array())
    throw std::invalid_argument("scenario needs a \"steps\" array");
  Scenario out;
  out.name = j.value("name", "custom");
  for (const auto& js : j["steps"]) {
    if (!js.is_object() || !js.contains("op")) throw std::invalid_argument("scenario step needs an \"op\"");
    ScenarioStep s;
    const std::string op = js["op"].get<std::string>();
    s.traced = js.value("traced", true);
    if (op == "wait_ready") {
      s.op = StepOp::WaitReady;
    } else if (op == "create") {
      s.op = StepOp::Create;
      const auto kind = kind_from_string(js.value("kind", "Deployment"));
      if (!kind || (*kind != Kind::Deployment && *kind != Kind::Service))
        throw std::invalid_argument("create supports kind Deployment or Service");
      s.kind = *kind;
      s.name = js.at("name").get<std::string>();
      s.replicas = js.value("replicas", 1);
      s.label = js.value("label", s.name);
      s.selector = js.value("selector", s.name);
    } else if (op == "scale") {
      s.op = StepOp::Scale;
      s.name = js.at("name").get<std::string>();
      s.replicas = js.at("replicas").get<int>();
    } else {
      throw std::invalid_argument("unknown scenario op: " + op);
    }
    if (s.replicas < 0) throw std::invalid_argument("replicas must be non-negative");
    out.steps.push_back(std::move(s));
  }
  return out;
}

nlohmann::json to_json(const Scenario& scenario) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : scenario.steps) {
    nlohmann::json js{{"op", op_name(s.op)}};
    if (s.op == StepOp::Create) {
      js["kind"] = to_string(s.kind);
      js["name"] = s.name;
      if (s.kind == Kind::Deployment) {
        js["replicas"] = s.replicas;
        js["label"] = s.label;
      } else {
        js["selector"] = s.selector;
      }
    } else if (s.op == StepOp::Scale) {
      js["name"] = s.name;
      js["replicas"] = s.replicas;
    }
    if (s.op != StepOp::WaitReady) js["traced"] = s.traced;
    steps.push_back(std::move(js));
  }
  return {{"name", scenario.name}, {"steps", std::move(steps)}};
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open scenario file " + path);
  try {
    return scenario_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("bad scenario file " + path + ": " + e.what());
  }
}

std::vector<std::string> builtin_scenario_names() {
  return {"scale-up", "n-sweep-step", "fig5-service", "repeated-update"};
}

Scenario builtin_scenario(const std::string& name) {
  Scenario s{name, {}};
  if (name == "scale-up") {
    s.steps = {create_deployment("web", 10), wait_ready()};
    for (int r = 20; r <= 50; r += 10) {
      s.steps.push_back(scale("web", r));
      s.steps.push_back(wait_ready());
    }
  } else if (name == "n-sweep-step") {
    // five Deployments at 1 replica, then seven updates alternating 3 and 1
    constexpr int kDeployments = 5;
    for (int d = 0; d < kDeployments; ++d) s.steps.push_back(create_deployment("app-" + std::to_string(d), 1));
    s.steps.push_back(wait_ready());
    for (int u = 0; u < 7; ++u) {
      const int replicas = u % 2 == 0 ? 3 : 1;
      for (int d = 0; d < kDeployments; ++d) s.steps.push_back(scale("app-" + std::to_string(d), replicas));
      s.steps.push_back(wait_ready());
    }
  } else if (name == "fig5-service") {
    s.steps = {create_deployment("web", 2), wait_ready(),
               {StepOp::Create, Kind::Service, "web", 0, "", "web", true}, wait_ready()};
  } else if (name == "repeated-update") {
    // second update lands before the first has propagated
    s.steps = {create_deployment("web", 2), wait_ready(), scale("web", 3), scale("web", 4), wait_ready()};
  } else {
    throw std::invalid_argument("unknown scenario: " + name);
  }
  return s;
}

nlohmann::json to_json(const ScenarioReport& r) {
  nlohmann::json roots = nlohmann::json::array();
  for (const auto& c : r.root_cpids) roots.push_back(c.str());
  return {{"scenario", r.scenario},
          {"n", r.n},
          {"seed", r.seed},
          {"deterministic", r.deterministic},
          {"tracing", r.tracing},
          {"mergelog_count", r.mergelog_count},
          {"span_count", r.span_count},
          {"wall_time_seconds", r.wall_time_seconds},
          {"root_cpids", std::move(roots)},
          {"audit_violations", r.audit_violations},
          {"mergelogs_by_component", r.mergelogs_by_component},
          {"conflict_give_ups", r.conflict_give_ups}};
}

ScenarioReport run_scenario(const Scenario& scenario, const SimConfig& config, TraceSink& sink, TraceQuery& query,
                            LogSink* logs, const RunHooks& hooks) {
  ScenarioReport report;
  report.scenario = scenario.name;
  report.n = config.ancestor_limit;
  report.seed = config.seed;
  report.deterministic = config.mode == SimMode::Deterministic;
  report.tracing = config.tracing;

  const auto started = std::chrono::steady_clock::now();
  {
    ControlPlane plane(config, sink, logs);
    if (hooks.before) hooks.before(plane);
    for (const auto& step : scenario.steps) {
      switch (step.op) {
        case StepOp::WaitReady:
          plane.wait_ready();
          break;
        case StepOp::Create: {
          auto r = plane.kubectl().apply(object_for(step), step.traced);
          if (r.root) report.root_cpids.push_back(*r.root);
          break;
        }
        case StepOp::Scale: {
          auto r = plane.kubectl().scale(step.name, step.replicas, step.traced);
          if (r.root) report.root_cpids.push_back(*r.root);
          break;
        }
      }
    }
    plane.settle();
    report.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    if (hooks.after) hooks.after(plane);
    report.audit_violations = plane.audit_violations();
    report.mergelogs_by_component = plane.mergelogs_by_component();
    report.conflict_give_ups = plane.controller_give_ups();
  }
  sink.flush();

  std::set<Cpid> mergelogs;
  std::set<std::string> spans;
  for (const auto& root : report.root_cpids) {
    for (const auto& m : query.list_mergelogs(root)) mergelogs.insert(m.new_cpid);
    for (const auto& s : query.list_spans(root)) spans.insert(s.span_id);
  }
  report.mergelog_count = mergelogs.size();
  report.span_count = spans.size();
  return report;
}

}  // namespace cascade_trace::sim
