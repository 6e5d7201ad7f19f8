#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cascade_trace/sim/control_plane.hpp"

namespace cascade_trace::sim {

enum class StepOp { Create, Scale, WaitReady };

struct ScenarioStep {
  StepOp op = StepOp::WaitReady;
  Kind kind = Kind::Deployment;  // create only
  std::string name;
  int replicas = 0;              // Deployment create and scale
  std::string label;             // Deployment pod label; defaults to name
  std::string selector;          // Service create
  bool traced = true;
};

struct Scenario {
  std::string name;
  std::vector<ScenarioStep> steps;
};

/// JSON form:
///   {"name": "...", "steps": [
///     {"op": "create", "kind": "Deployment", "name": "web", "replicas": 3, "label": "web"},
///     {"op": "create", "kind": "Service", "name": "web", "selector": "web", "traced": true},
///     {"op": "scale", "name": "web", "replicas": 5},
///     {"op": "wait_ready"}]}
/// `traced` defaults to true. Throws std::invalid_argument.
Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Scenario& scenario);
Scenario load_scenario_file(const std::string& path);

std::vector<std::string> builtin_scenario_names();
/// Throws std::invalid_argument for an unknown name.
Scenario builtin_scenario(const std::string& name);

struct ScenarioReport {
  std::string scenario;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  bool deterministic = true;
  bool tracing = true;
  /// Distinct mergelogs and spans at the server related to any of this run's roots.
  std::size_t mergelog_count = 0;
  std::size_t span_count = 0;
  double wall_time_seconds = 0;
  std::vector<Cpid> root_cpids;
  std::vector<std::string> audit_violations;
  std::map<std::string, std::size_t> mergelogs_by_component;
  std::size_t conflict_give_ups = 0;
};

nlohmann::json to_json(const ScenarioReport& report);

struct RunHooks {
  /// Called after the control plane is built, before the first step.
  std::function<void(ControlPlane&)> before;
  /// Called after the last step, while the control plane is still alive.
  std::function<void(ControlPlane&)> after;
};

/// Executes the steps against a fresh control plane. Traces go to `sink`;
/// counts are read back through `query` once the sink is flushed.
ScenarioReport run_scenario(const Scenario& scenario, const SimConfig& config, TraceSink& sink, TraceQuery& query,
                            LogSink* logs = nullptr, const RunHooks& hooks = {});

}  // namespace cascade_trace::sim
