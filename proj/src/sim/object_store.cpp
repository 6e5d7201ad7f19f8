#include "cascade_trace/sim/object_store.hpp"

#include "cascade_trace/error.hpp"

namespace cascade_trace::sim {

namespace {

std::string describe(Kind kind, const std::string& name) {
  return std::string(to_string(kind)) + "/" + name;
}

}  // namespace

void ObjectStore::observe(StoreOp op) const {
  if (observer_) observer_(op);
}

void ObjectStore::notify(EventType type, const SimObject& object) {
  if (audit_ && type != EventType::Deleted) audit_(object);
  for (const auto& [_, entry] : watchers_) {
    if (entry.first == object.kind()) entry.second(WatchEvent{type, object});
  }
}

SimObject ObjectStore::create(SimObject object) {
  std::lock_guard lock(mutex_);
  observe(StoreOp::Write);
  ObjectKey key{object.kind(), object.name};
  if (objects_.contains(key)) throw Conflict(describe(key.kind, key.name) + " already exists");
  object.resource_version = 1;
  const auto& stored = objects_.emplace(std::move(key), std::move(object)).first->second;
  notify(EventType::Added, stored);
  return stored;
}

SimObject ObjectStore::update(SimObject object) {
  std::lock_guard lock(mutex_);
  observe(StoreOp::Write);
  const auto it = objects_.find(ObjectKey{object.kind(), object.name});
  if (it == objects_.end()) throw NotFound(describe(object.kind(), object.name) + " not found");
  if (it->second.resource_version != object.resource_version) {
    throw Conflict(describe(object.kind(), object.name) + ": resource version " +
                   std::to_string(object.resource_version) + " is stale (current " +
                   std::to_string(it->second.resource_version) + ")");
  }
  object.resource_version = it->second.resource_version + 1;
  it->second = std::move(object);
  notify(EventType::Modified, it->second);
  return it->second;
}

void ObjectStore::remove(Kind kind, const std::string& name, std::optional<std::uint64_t> expected_version) {
  std::lock_guard lock(mutex_);
  observe(StoreOp::Write);
  const auto it = objects_.find(ObjectKey{kind, name});
  if (it == objects_.end()) throw NotFound(describe(kind, name) + " not found");
  if (expected_version && *expected_version != it->second.resource_version)
    throw Conflict(describe(kind, name) + ": stale resource version on delete");
  SimObject gone = std::move(it->second);
  objects_.erase(it);
  notify(EventType::Deleted, gone);
}

std::optional<SimObject> ObjectStore::try_get(Kind kind, const std::string& name) const {
  std::lock_guard lock(mutex_);
  observe(StoreOp::Read);
  const auto it = objects_.find(ObjectKey{kind, name});
  if (it == objects_.end()) return std::nullopt;
  return it->second;
}

SimObject ObjectStore::get(Kind kind, const std::string& name) const {
  auto obj = try_get(kind, name);
  if (!obj) throw NotFound(describe(kind, name) + " not found");
  return *std::move(obj);
}

std::vector<SimObject> ObjectStore::list(Kind kind) const {
  std::lock_guard lock(mutex_);
  observe(StoreOp::Read);
  std::vector<SimObject> out;
  for (auto it = objects_.lower_bound(ObjectKey{kind, ""}); it != objects_.end() && it->first.kind == kind; ++it)
    out.push_back(it->second);
  return out;
}

int ObjectStore::watch(Kind kind, Watcher watcher) {
  std::lock_guard lock(mutex_);
  const int handle = next_handle_++;
  watchers_.emplace(handle, std::make_pair(kind, std::move(watcher)));
  return handle;
}

void ObjectStore::unwatch(int handle) {
  std::lock_guard lock(mutex_);
  watchers_.erase(handle);
}

void ObjectStore::set_audit_hook(AuditHook hook) {
  std::lock_guard lock(mutex_);
  audit_ = std::move(hook);
}

void ObjectStore::set_op_observer(OpObserver observer) {
  std::lock_guard lock(mutex_);
  observer_ = std::move(observer);
}

}  // namespace cascade_trace::sim
