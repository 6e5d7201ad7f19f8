#pragma once

#include <atomic>
#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "cascade_trace/sim/log_sink.hpp"
#include "cascade_trace/sim/object_store.hpp"
#include "cascade_trace/tracer.hpp"

namespace cascade_trace::sim {

/// Shared wiring handed to every controller.
struct ControllerEnv {
  ObjectStore* store = nullptr;
  Clock* clock = nullptr;
  std::shared_ptr<UuidGenerator> uuids;
  TraceSink* sink = nullptr;
  LogSink* logs = nullptr;  // optional
  std::size_t ancestor_limit = kDefaultAncestorLimit;
  bool tracing = true;
  int conflict_retries = 5;
};

class Controller {
 public:
  Controller(std::string name, ControllerEnv env, bool instrumented);
  virtual ~Controller() = default;
  Controller(const Controller&) = delete;
  Controller& operator=(const Controller&) = delete;

  const std::string& name() const { return name_; }
  virtual std::vector<Kind> watched_kinds() const = 0;
  /// Work-queue keys affected by an event.
  virtual std::vector<std::string> keys_for(const WatchEvent& event) = 0;
  /// How long a key enqueued for `event` waits before it becomes due.
  virtual std::chrono::microseconds delay_for(const WatchEvent&) const { return {}; }

  /// One reconcile pass for `key`. A Conflict re-reads and retries the whole
  /// pass; returns false once the retry budget is exhausted.
  bool reconcile(const std::string& key);

  /// Null when the controller is not instrumented or tracing is off.
  Tracer* tracer() { return tracer_ ? &*tracer_ : nullptr; }
  const ControllerEnv& env() const { return env_; }
  void log(const std::string& cpid, std::string msg, std::map<std::string, std::string> fields = {});
  std::size_t give_ups() const { return give_ups_.load(); }

 protected:
  virtual void reconcile_once(const std::string& key) = 0;

  ControllerEnv env_;

 private:
  std::string name_;
  std::optional<Tracer> tracer_;
  std::atomic<std::size_t> give_ups_{0};
};

/// Bookkeeping for one traced reconcile pass: collects the contexts of every
/// object read, merges them once for the first write, and wraps writes in
/// child spans under a root span started with the triggering object's CPID.
class ReconcilePass {
 public:
  ReconcilePass(Controller& controller, const SimObject& trigger, std::string root_span = "reconcile");
  ~ReconcilePass();
  ReconcilePass(const ReconcilePass&) = delete;
  ReconcilePass& operator=(const ReconcilePass&) = delete;

  void observe(const SimObject& object);
  /// Merged context for written objects; absent when nothing observed is traced.
  const std::optional<TraceContext>& write_context();

  SimObject create(SimObject object, std::string span_name);
  SimObject update(SimObject object, std::string span_name);
  void remove(const SimObject& object, std::string span_name);
  void log(std::string msg, std::map<std::string, std::string> fields = {});

 private:
  template <typename Op>
  auto traced_write(SimObject& object, std::string span_name, Op&& op);

  Controller& controller_;
  Tracer* tracer_;
  std::optional<SpanHandle> root_;
  std::vector<TraceContext> observed_;
  std::optional<TraceContext> write_ctx_;
  bool merged_ = false;
};

/// Keeps each Deployment's single ReplicaSet at the declared replica count and
/// mirrors its readiness into the Deployment status.
class DeploymentController final : public Controller {
 public:
  explicit DeploymentController(ControllerEnv env);
  std::vector<Kind> watched_kinds() const override { return {Kind::Deployment, Kind::ReplicaSet}; }
  std::vector<std::string> keys_for(const WatchEvent& event) override;

 protected:
  void reconcile_once(const std::string& key) override;
};

/// Creates or deletes Pods to match a ReplicaSet and reports ready replicas.
class ReplicaSetController final : public Controller {
 public:
  explicit ReplicaSetController(ControllerEnv env);
  std::vector<Kind> watched_kinds() const override { return {Kind::ReplicaSet, Kind::Pod}; }
  std::vector<std::string> keys_for(const WatchEvent& event) override;

 protected:
  void reconcile_once(const std::string& key) override;

 private:
  std::mutex mutex_;
  std::map<std::string, int> next_index_;
};

/// Binds pending Pods to nodes round-robin. With `bind_ready` the binding also
/// marks the Pod Ready, which stands in for a control plane without a kubelet.
class Scheduler final : public Controller {
 public:
  Scheduler(ControllerEnv env, std::vector<std::string> nodes, bool bind_ready);
  std::vector<Kind> watched_kinds() const override { return {Kind::Pod}; }
  std::vector<std::string> keys_for(const WatchEvent& event) override;

 protected:
  void reconcile_once(const std::string& key) override;

 private:
  std::vector<std::string> nodes_;
  bool bind_ready_;
  std::atomic<std::size_t> next_node_{0};
};

/// Not instrumented: flips Scheduled Pods to Ready after a delay and writes
/// them back without touching annotations.
class Kubelet final : public Controller {
 public:
  Kubelet(ControllerEnv env, std::chrono::microseconds readiness_delay);
  std::vector<Kind> watched_kinds() const override { return {Kind::Pod}; }
  std::vector<std::string> keys_for(const WatchEvent& event) override;
  std::chrono::microseconds delay_for(const WatchEvent& event) const override;

 protected:
  void reconcile_once(const std::string& key) override;

 private:
  std::chrono::microseconds delay_;
};

/// Maintains one Endpoints object per Service listing its Ready Pods.
class EndpointsController final : public Controller {
 public:
  explicit EndpointsController(ControllerEnv env);
  std::vector<Kind> watched_kinds() const override { return {Kind::Service, Kind::Pod, Kind::Endpoints}; }
  std::vector<std::string> keys_for(const WatchEvent& event) override;

 protected:
  void reconcile_once(const std::string& key) override;

 private:
  std::mutex mutex_;
  std::map<std::string, std::string> selectors_;  // service -> selector, fed by watch events
};

/// Operator command line: applies objects and, when traced, starts a new root
/// CPID that is returned to the caller.
class KubectlSim {
 public:
  explicit KubectlSim(ControllerEnv env);

  struct Result {
    SimObject object;
    std::optional<Cpid> root;
  };

  /// Creates the object, or replaces the spec of an existing one (status
  /// fields are kept). A traced update merges the object's current context
  /// with the new root.
  Result apply(SimObject desired, bool traced);
  Result scale(const std::string& deployment, int replicas, bool traced);

  Tracer* tracer() { return tracer_ ? &*tracer_ : nullptr; }

 private:
  ControllerEnv env_;
  std::optional<Tracer> tracer_;
};

}  // namespace cascade_trace::sim
