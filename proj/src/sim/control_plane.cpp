#include "cascade_trace/sim/control_plane.hpp"

#include <algorithm>

namespace cascade_trace::sim {

ControlPlane::ControlPlane(SimConfig config, TraceSink& sink, LogSink* logs) : config_(std::move(config)) {
  const bool deterministic = config_.mode == SimMode::Deterministic;
  if (deterministic) {
    clock_ = std::make_unique<LogicalClock>();
    uuids_ = std::make_shared<UuidGenerator>(config_.seed);
  } else {
    clock_ = std::make_unique<SystemClock>();
    uuids_ = std::make_shared<UuidGenerator>();
  }

  store_.set_audit_hook([this](const SimObject& o) { audit(o); });

  ControllerEnv env{&store_, clock_.get(), uuids_, &sink, logs, config_.ancestor_limit, config_.tracing,
                    config_.conflict_retries};
  controllers_.push_back(std::make_unique<DeploymentController>(env));
  controllers_.push_back(std::make_unique<ReplicaSetController>(env));
  controllers_.push_back(std::make_unique<Scheduler>(env, config_.nodes, !config_.kubelet));
  if (config_.kubelet) controllers_.push_back(std::make_unique<Kubelet>(env, config_.readiness_delay));
  controllers_.push_back(std::make_unique<EndpointsController>(env));
  kubectl_ = std::make_unique<KubectlSim>(env);

  if (deterministic) {
    runtime_ = std::make_unique<DeterministicRuntime>(store_, static_cast<LogicalClock&>(*clock_), config_.seed,
                                                      config_.costs);
  } else {
    runtime_ = std::make_unique<ThreadedRuntime>(store_);
  }
  for (auto& c : controllers_) runtime_->attach(*c);
  runtime_->start();
}

ControlPlane::~ControlPlane() { runtime_->stop(); }

void ControlPlane::audit(const SimObject& object) {
  std::lock_guard lock(audit_mutex_);
  ++audited_;
  const std::string where = std::string(to_string(object.kind())) + "/" + object.name + "@" +
                            std::to_string(object.resource_version);
  std::size_t trace_keys = 0;
  for (const auto& [k, _] : object.annotations) {
    if (k.starts_with("cascade-trace/")) {
      ++trace_keys;
      if (k != kCpidAnnotation && k != kAncestorsAnnotation) violations_.push_back(where + ": unexpected key " + k);
    }
  }
  if (trace_keys == 0) return;
  try {
    if (!extract(object.annotations, config_.ancestor_limit))
      violations_.push_back(where + ": ancestors without a CPID");
  } catch (const std::exception& e) {
    violations_.push_back(where + ": " + e.what());
  }
}

bool ControlPlane::converged() const {
  const auto pods = store_.list(Kind::Pod);
  for (const auto& d : store_.list(Kind::Deployment)) {
    const auto& dspec = d.as<DeploymentSpec>();
    const auto rs = store_.try_get(Kind::ReplicaSet, replicaset_name(d.name));
    if (!rs) return false;
    const auto& rspec = rs->as<ReplicaSetSpec>();
    if (rspec.replicas != dspec.replicas || rspec.ready_replicas != dspec.replicas ||
        dspec.ready_replicas != dspec.replicas)
      return false;
    int owned = 0;
    for (const auto& p : pods) {
      if (p.as<PodSpec>().owner != rs->name) continue;
      ++owned;
      if (p.as<PodSpec>().phase != PodPhase::Ready) return false;
    }
    if (owned != dspec.replicas) return false;
  }
  for (const auto& s : store_.list(Kind::Service)) {
    const auto ep = store_.try_get(Kind::Endpoints, s.name);
    if (!ep) return false;
    std::vector<std::string> ready;
    for (const auto& p : pods) {
      if (p.as<PodSpec>().label == s.as<ServiceSpec>().selector && p.as<PodSpec>().phase == PodPhase::Ready)
        ready.push_back(p.name);
    }
    std::sort(ready.begin(), ready.end());
    if (ep->as<EndpointsSpec>().ready_pods != ready) return false;
  }
  return true;
}

void ControlPlane::wait_ready() {
  runtime_->wait_until([this] { return converged(); }, config_.barrier_poll, config_.barrier_timeout);
}

void ControlPlane::settle() { runtime_->settle(config_.barrier_timeout); }

std::vector<std::string> ControlPlane::audit_violations() const {
  std::lock_guard lock(audit_mutex_);
  return violations_;
}

std::size_t ControlPlane::audited_writes() const {
  std::lock_guard lock(audit_mutex_);
  return audited_;
}

std::map<std::string, std::size_t> ControlPlane::mergelogs_by_component() const {
  std::map<std::string, std::size_t> out;
  for (const auto& c : controllers_) {
    if (auto* t = c->tracer()) out[c->name()] = t->mergelogs_sent();
  }
  if (auto* t = kubectl_->tracer()) out["kubectl"] = t->mergelogs_sent();
  return out;
}

std::size_t ControlPlane::spans_sent() const {
  std::size_t total = 0;
  for (const auto& c : controllers_) {
    if (auto* t = c->tracer()) total += t->spans_sent();
  }
  if (auto* t = kubectl_->tracer()) total += t->spans_sent();
  return total;
}

std::size_t ControlPlane::controller_give_ups() const {
  std::size_t total = 0;
  for (const auto& c : controllers_) total += c->give_ups();
  return total;
}

}  // namespace cascade_trace::sim
