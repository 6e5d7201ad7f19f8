#include "cascade_trace/sim/controllers.hpp"

#include <algorithm>

#include "cascade_trace/error.hpp"

namespace cascade_trace::sim {

namespace {

int pod_index(const std::string& pod_name) {
  const auto dash = pod_name.rfind('-');
  try {
    return dash == std::string::npos ? 0 : std::stoi(pod_name.substr(dash + 1));
  } catch (const std::exception&) {
    return 0;
  }
}

std::vector<SimObject> pods_owned_by(const ObjectStore& store, const std::string& owner) {
  auto pods = store.list(Kind::Pod);
  std::erase_if(pods, [&](const SimObject& p) { return p.as<PodSpec>().owner != owner; });
  return pods;
}

}  // namespace

Controller::Controller(std::string name, ControllerEnv env, bool instrumented)
    : env_(std::move(env)), name_(std::move(name)) {
  if (instrumented && env_.tracing)
    tracer_.emplace(name_, env_.ancestor_limit, env_.uuids, *env_.sink, *env_.clock);
}

bool Controller::reconcile(const std::string& key) {
  for (int attempt = 0; attempt < env_.conflict_retries; ++attempt) {
    try {
      reconcile_once(key);
      return true;
    } catch (const Conflict&) {
      // re-read on the next attempt
    } catch (const NotFound&) {
      return true;  // object vanished mid-pass; a later event will bring it back
    }
  }
  ++give_ups_;
  log("", "giving up after conflicts", {{"key", key}, {"level", "error"}});
  return false;
}

void Controller::log(const std::string& cpid, std::string msg, std::map<std::string, std::string> fields) {
  if (!env_.logs) return;
  env_.logs->write(LogRecord{env_.clock->now(), name_, cpid, std::move(msg), std::move(fields)});
}

ReconcilePass::ReconcilePass(Controller& controller, const SimObject& trigger, std::string root_span)
    : controller_(controller), tracer_(controller.tracer()) {
  if (!tracer_) return;
  if (auto ctx = tracer_->extract(trigger.annotations)) root_ = tracer_->start_span(ctx->cpid, std::move(root_span));
}

ReconcilePass::~ReconcilePass() {
  if (tracer_ && root_) tracer_->end_span(*root_);
}

void ReconcilePass::observe(const SimObject& object) {
  if (!tracer_) return;
  if (auto ctx = tracer_->extract(object.annotations)) observed_.push_back(*std::move(ctx));
}

const std::optional<TraceContext>& ReconcilePass::write_context() {
  if (!merged_ && tracer_ && !observed_.empty()) {
    // Objects are observed trigger first. Merging the written objects' own
    // (older) contexts first lets step 1 absorb them and append their
    // ancestors at the old end. The other way round they are prepended ahead
    // of newer ones and truncation to N loses CPIDs that live objects carry.
    std::vector<TraceContext> oldest_first(observed_.rbegin(), observed_.rend());
    write_ctx_ = tracer_->merge(oldest_first);
  }
  merged_ = true;
  return write_ctx_;
}

template <typename Op>
auto ReconcilePass::traced_write(SimObject& object, std::string span_name, Op&& op) {
  const auto& ctx = write_context();
  if (!ctx) return op(object);
  inject(object.annotations, *ctx);
  const SpanHandle span = tracer_->start_span(ctx->cpid, std::move(span_name), root_ ? &*root_ : nullptr);
  auto result = op(object);
  tracer_->end_span(span);
  return result;
}

SimObject ReconcilePass::create(SimObject object, std::string span_name) {
  return traced_write(object, std::move(span_name),
                      [&](SimObject& o) { return controller_.env().store->create(std::move(o)); });
}

SimObject ReconcilePass::update(SimObject object, std::string span_name) {
  return traced_write(object, std::move(span_name),
                      [&](SimObject& o) { return controller_.env().store->update(std::move(o)); });
}

void ReconcilePass::remove(const SimObject& object, std::string span_name) {
  // Deletions carry no context; the span is tagged with the triggering change.
  std::optional<SpanHandle> span;
  if (tracer_ && root_) span = tracer_->start_span(root_->cpid, std::move(span_name), &*root_);
  controller_.env().store->remove(object.kind(), object.name, object.resource_version);
  if (span) tracer_->end_span(*span);
}

void ReconcilePass::log(std::string msg, std::map<std::string, std::string> fields) {
  std::string cpid;
  if (write_ctx_) {
    cpid = write_ctx_->cpid.str();
  } else if (root_) {
    cpid = root_->cpid.str();
  }
  controller_.log(cpid, std::move(msg), std::move(fields));
}

// --- Deployment -------------------------------------------------------------

DeploymentController::DeploymentController(ControllerEnv env)
    : Controller("deployment-controller", std::move(env), true) {}

std::vector<std::string> DeploymentController::keys_for(const WatchEvent& event) {
  if (event.object.kind() == Kind::Deployment) return {event.object.name};
  return {event.object.as<ReplicaSetSpec>().owner};
}

void DeploymentController::reconcile_once(const std::string& key) {
  ObjectStore& store = *env_.store;
  auto deployment = store.try_get(Kind::Deployment, key);
  if (!deployment) return;
  const auto& dspec = deployment->as<DeploymentSpec>();

  ReconcilePass pass(*this, *deployment);
  pass.observe(*deployment);
  auto rs = store.try_get(Kind::ReplicaSet, replicaset_name(key));
  if (rs) pass.observe(*rs);

  int ready = 0;
  if (!rs) {
    SimObject created{replicaset_name(key), ReplicaSetSpec{dspec.replicas, key, dspec.template_label, 0}, {}, 0};
    pass.create(std::move(created), "create_replicaset");
    pass.log("created replicaset", {{"replicaset", replicaset_name(key)}, {"replicas", std::to_string(dspec.replicas)}});
  } else {
    auto& rspec = rs->as<ReplicaSetSpec>();
    ready = rspec.ready_replicas;
    if (rspec.replicas != dspec.replicas || rspec.template_label != dspec.template_label) {
      const int before = rspec.replicas;
      rspec.replicas = dspec.replicas;
      rspec.template_label = dspec.template_label;
      pass.update(*std::move(rs), "scale_replicaset");
      pass.log("scaled replicaset", {{"replicaset", replicaset_name(key)},
                                     {"from", std::to_string(before)},
                                     {"to", std::to_string(dspec.replicas)}});
    }
  }

  if (dspec.ready_replicas != ready) {
    SimObject updated = *deployment;
    updated.as<DeploymentSpec>().ready_replicas = ready;
    pass.update(std::move(updated), "update_status");
    pass.log("updated deployment status", {{"ready_replicas", std::to_string(ready)}});
  }
}

// --- ReplicaSet -------------------------------------------------------------

ReplicaSetController::ReplicaSetController(ControllerEnv env)
    : Controller("replicaset-controller", std::move(env), true) {}

std::vector<std::string> ReplicaSetController::keys_for(const WatchEvent& event) {
  if (event.object.kind() == Kind::ReplicaSet) return {event.object.name};
  return {event.object.as<PodSpec>().owner};
}

void ReplicaSetController::reconcile_once(const std::string& key) {
  ObjectStore& store = *env_.store;
  auto rs = store.try_get(Kind::ReplicaSet, key);
  if (!rs) return;
  const auto& rspec = rs->as<ReplicaSetSpec>();

  ReconcilePass pass(*this, *rs);
  pass.observe(*rs);
  auto pods = pods_owned_by(store, key);
  for (const auto& p : pods) pass.observe(p);

  const int diff = rspec.replicas - static_cast<int>(pods.size());
  if (diff > 0) {
    for (int i = 0; i < diff; ++i) {
      int index;
      {
        std::lock_guard lock(mutex_);
        index = next_index_[key]++;
      }
      SimObject pod{key + "-" + std::to_string(index), PodSpec{key, rspec.template_label, std::nullopt, PodPhase::Pending},
                    {}, 0};
      pods.push_back(pass.create(std::move(pod), "create_pod"));
    }
    pass.log("created pods", {{"replicaset", key}, {"count", std::to_string(diff)}});
  } else if (diff < 0) {
    // Not-ready pods go first, then the newest.
    std::sort(pods.begin(), pods.end(), [](const SimObject& a, const SimObject& b) {
      const bool ra = a.as<PodSpec>().phase == PodPhase::Ready;
      const bool rb = b.as<PodSpec>().phase == PodPhase::Ready;
      if (ra != rb) return !ra;
      return pod_index(a.name) > pod_index(b.name);
    });
    for (int i = 0; i < -diff; ++i) pass.remove(pods[i], "delete_pod");
    pods.erase(pods.begin(), pods.begin() + (-diff));
    pass.log("deleted pods", {{"replicaset", key}, {"count", std::to_string(-diff)}});
  }

  const int ready = static_cast<int>(std::count_if(pods.begin(), pods.end(), [](const SimObject& p) {
    return p.as<PodSpec>().phase == PodPhase::Ready;
  }));
  if (rspec.ready_replicas != ready) {
    SimObject updated = *rs;
    updated.as<ReplicaSetSpec>().ready_replicas = ready;
    pass.update(std::move(updated), "update_status");
    pass.log("updated replicaset status", {{"ready_replicas", std::to_string(ready)}});
  }
}

// --- Scheduler --------------------------------------------------------------

Scheduler::Scheduler(ControllerEnv env, std::vector<std::string> nodes, bool bind_ready)
    : Controller("scheduler", std::move(env), true), nodes_(std::move(nodes)), bind_ready_(bind_ready) {
  if (nodes_.empty()) throw std::invalid_argument("scheduler needs at least one node");
}

std::vector<std::string> Scheduler::keys_for(const WatchEvent& event) {
  if (event.type == EventType::Deleted) return {};
  const auto& spec = event.object.as<PodSpec>();
  if (spec.node_name || spec.phase != PodPhase::Pending) return {};
  return {event.object.name};
}

void Scheduler::reconcile_once(const std::string& key) {
  auto pod = env_.store->try_get(Kind::Pod, key);
  if (!pod) return;
  auto& spec = pod->as<PodSpec>();
  if (spec.node_name || spec.phase != PodPhase::Pending) return;

  ReconcilePass pass(*this, *pod, "schedule");
  pass.observe(*pod);
  const std::string node = nodes_[next_node_++ % nodes_.size()];
  spec.node_name = node;
  spec.phase = bind_ready_ ? PodPhase::Ready : PodPhase::Scheduled;
  pass.update(*std::move(pod), "bind");
  pass.log("bound pod", {{"pod", key}, {"node", node}});
}

// --- Kubelet ----------------------------------------------------------------

Kubelet::Kubelet(ControllerEnv env, std::chrono::microseconds readiness_delay)
    : Controller("kubelet", std::move(env), false), delay_(readiness_delay) {}

std::vector<std::string> Kubelet::keys_for(const WatchEvent& event) {
  if (event.type == EventType::Deleted || event.object.as<PodSpec>().phase != PodPhase::Scheduled) return {};
  return {event.object.name};
}

std::chrono::microseconds Kubelet::delay_for(const WatchEvent&) const { return delay_; }

void Kubelet::reconcile_once(const std::string& key) {
  auto pod = env_.store->try_get(Kind::Pod, key);
  if (!pod || pod->as<PodSpec>().phase != PodPhase::Scheduled) return;
  pod->as<PodSpec>().phase = PodPhase::Ready;
  env_.store->update(*std::move(pod));
}

// --- Endpoints --------------------------------------------------------------

EndpointsController::EndpointsController(ControllerEnv env)
    : Controller("endpoints-controller", std::move(env), true) {}

std::vector<std::string> EndpointsController::keys_for(const WatchEvent& event) {
  std::lock_guard lock(mutex_);
  switch (event.object.kind()) {
    case Kind::Service:
      if (event.type == EventType::Deleted) {
        selectors_.erase(event.object.name);
      } else {
        selectors_[event.object.name] = event.object.as<ServiceSpec>().selector;
      }
      return {event.object.name};
    case Kind::Endpoints:
      return {event.object.name};
    case Kind::Pod: {
      std::vector<std::string> keys;
      for (const auto& [svc, selector] : selectors_) {
        if (selector == event.object.as<PodSpec>().label) keys.push_back(svc);
      }
      return keys;
    }
    default:
      return {};
  }
}

void EndpointsController::reconcile_once(const std::string& key) {
  ObjectStore& store = *env_.store;
  auto service = store.try_get(Kind::Service, key);
  if (!service) return;
  const std::string selector = service->as<ServiceSpec>().selector;

  ReconcilePass pass(*this, *service);
  pass.observe(*service);
  std::vector<std::string> ready;
  for (const auto& pod : store.list(Kind::Pod)) {
    const auto& spec = pod.as<PodSpec>();
    if (spec.label != selector) continue;
    pass.observe(pod);
    if (spec.phase == PodPhase::Ready) ready.push_back(pod.name);
  }
  std::sort(ready.begin(), ready.end());

  auto endpoints = store.try_get(Kind::Endpoints, key);
  if (endpoints) pass.observe(*endpoints);

  if (!endpoints) {
    pass.create(SimObject{key, EndpointsSpec{ready}, {}, 0}, "create_endpoints");
    pass.log("created endpoints", {{"service", key}, {"ready", std::to_string(ready.size())}});
  } else if (endpoints->as<EndpointsSpec>().ready_pods != ready) {
    endpoints->as<EndpointsSpec>().ready_pods = ready;
    pass.update(*std::move(endpoints), "update_endpoints");
    pass.log("updated endpoints", {{"service", key}, {"ready", std::to_string(ready.size())}});
  }
}

// --- kubectl ----------------------------------------------------------------

KubectlSim::KubectlSim(ControllerEnv env) : env_(std::move(env)) {
  if (env_.tracing) tracer_.emplace("kubectl", env_.ancestor_limit, env_.uuids, *env_.sink, *env_.clock);
}

namespace {

// Replaces the declared part of `current` with `desired`, keeping status.
void merge_spec(SimObject& current, const SimObject& desired) {
  if (current.kind() != desired.kind()) throw std::invalid_argument("kind mismatch in apply");
  if (current.kind() == Kind::Deployment) {
    const int ready = current.as<DeploymentSpec>().ready_replicas;
    current.spec = desired.spec;
    current.as<DeploymentSpec>().ready_replicas = ready;
  } else if (current.kind() == Kind::ReplicaSet) {
    const int ready = current.as<ReplicaSetSpec>().ready_replicas;
    current.spec = desired.spec;
    current.as<ReplicaSetSpec>().ready_replicas = ready;
  } else {
    current.spec = desired.spec;
  }
  for (const auto& [k, v] : desired.annotations) current.annotations[k] = v;
}

}  // namespace

KubectlSim::Result KubectlSim::apply(SimObject desired, bool traced) {
  ObjectStore& store = *env_.store;
  Tracer* tracer = traced ? this->tracer() : nullptr;

  for (int attempt = 0; attempt < env_.conflict_retries; ++attempt) {
    auto existing = store.try_get(desired.kind(), desired.name);
    SimObject target = existing ? *existing : desired;
    if (existing) merge_spec(target, desired);
    if (!tracer) {
      try {
        return Result{existing ? store.update(std::move(target)) : store.create(std::move(target)), std::nullopt};
      } catch (const Conflict&) {
        continue;
      }
    }

    const TraceContext root = tracer->new_root();
    const SpanHandle apply_span = tracer->start_span(root.cpid, "apply");
    TraceContext ctx = root;
    if (existing) {
      if (auto previous = tracer->extract(existing->annotations)) {
        const std::vector<TraceContext> observed{*previous, root};
        ctx = tracer->merge(observed);
      }
    }
    inject(target.annotations, ctx);
    const SpanHandle write_span = tracer->start_span(ctx.cpid, existing ? "update" : "create", &apply_span);
    try {
      SimObject written = existing ? store.update(std::move(target)) : store.create(std::move(target));
      tracer->end_span(write_span);
      tracer->end_span(apply_span);
      if (env_.logs) {
        env_.logs->write(LogRecord{env_.clock->now(), "kubectl", ctx.cpid.str(),
                                   existing ? "updated object" : "created object",
                                   {{"kind", std::string(to_string(written.kind()))},
                                    {"name", written.name},
                                    {"root_cpid", root.cpid.str()}}});
      }
      return Result{std::move(written), root.cpid};
    } catch (const Conflict&) {
      tracer->end_span(write_span);
      tracer->end_span(apply_span);
    }
  }
  throw Conflict("kubectl apply of " + desired.name + " kept conflicting");
}

KubectlSim::Result KubectlSim::scale(const std::string& deployment, int replicas, bool traced) {
  SimObject desired = env_.store->get(Kind::Deployment, deployment);
  desired.as<DeploymentSpec>().replicas = replicas;
  desired.annotations.clear();
  return apply(std::move(desired), traced);
}

}  // namespace cascade_trace::sim
