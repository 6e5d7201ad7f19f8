#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "cascade_trace/sim/controllers.hpp"
#include "cascade_trace/sim/runtime.hpp"

namespace cascade_trace::sim {

enum class SimMode { Deterministic, Realistic };

struct SimConfig {
  SimMode mode = SimMode::Deterministic;
  std::uint64_t seed = 1;
  std::size_t ancestor_limit = kDefaultAncestorLimit;
  /// Instrumentation on/off for every controller and kubectl.
  bool tracing = true;
  /// When false there is no kubelet in the path and the scheduler marks Pods
  /// Ready as it binds them.
  bool kubelet = true;
  std::chrono::microseconds readiness_delay = std::chrono::milliseconds(50);
  DeterministicRuntime::Costs costs{};
  std::chrono::milliseconds barrier_poll{100};
  std::chrono::milliseconds barrier_timeout{30'000};
  int conflict_retries = 5;
  std::vector<std::string> nodes{"node-0", "node-1", "node-2"};
};

/// Object store, controllers and runtime wired together.
class ControlPlane {
 public:
  ControlPlane(SimConfig config, TraceSink& sink, LogSink* logs = nullptr);
  ~ControlPlane();
  ControlPlane(const ControlPlane&) = delete;
  ControlPlane& operator=(const ControlPlane&) = delete;

  ObjectStore& store() { return store_; }
  KubectlSim& kubectl() { return *kubectl_; }
  Clock& clock() { return *clock_; }
  const SimConfig& config() const { return config_; }

  /// Every Deployment has its ReplicaSet and Pods at the declared count, all
  /// Ready and reflected in status; every Service has an up-to-date Endpoints.
  bool converged() const;
  /// Blocks until converged() holds with no work pending. Throws Timeout.
  void wait_ready();
  void settle();

  /// Trace-context invariant violations seen by the store audit hook.
  std::vector<std::string> audit_violations() const;
  std::size_t audited_writes() const;
  /// Mergelogs sent per instrumented component (kubectl included).
  std::map<std::string, std::size_t> mergelogs_by_component() const;
  std::size_t spans_sent() const;
  std::size_t controller_give_ups() const;

 private:
  void audit(const SimObject& object);

  SimConfig config_;
  std::unique_ptr<Clock> clock_;
  ObjectStore store_;
  std::shared_ptr<UuidGenerator> uuids_;
  std::vector<std::unique_ptr<Controller>> controllers_;
  std::unique_ptr<KubectlSim> kubectl_;
  std::unique_ptr<Runtime> runtime_;

  mutable std::mutex audit_mutex_;
  std::vector<std::string> violations_;
  std::size_t audited_ = 0;
};

}  // namespace cascade_trace::sim
