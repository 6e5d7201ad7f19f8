#pragma once

#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "cascade_trace/sim/object.hpp"

namespace cascade_trace::sim {

enum class StoreOp { Read, Write };

/// In-memory versioned object store with optimistic concurrency and watches,
/// standing in for the API server.
///
/// Watch callbacks run synchronously inside the mutation, under the store
/// lock, so every watcher sees events for one object in resource_version
/// order. Callbacks must not call back into the store.
class ObjectStore {
 public:
  using Watcher = std::function<void(const WatchEvent&)>;
  using AuditHook = std::function<void(const SimObject&)>;
  using OpObserver = std::function<void(StoreOp)>;

  /// resource_version of the stored copy starts at 1. Throws Conflict if the
  /// object already exists.
  SimObject create(SimObject object);

  /// `object.resource_version` must equal the stored one, otherwise Conflict.
  /// Throws NotFound if the object does not exist.
  SimObject update(SimObject object);

  void remove(Kind kind, const std::string& name, std::optional<std::uint64_t> expected_version = {});

  std::optional<SimObject> try_get(Kind kind, const std::string& name) const;
  SimObject get(Kind kind, const std::string& name) const;
  /// Sorted by name.
  std::vector<SimObject> list(Kind kind) const;

  /// Subscribes to one kind. Returns a handle for unwatch().
  int watch(Kind kind, Watcher watcher);
  void unwatch(int handle);

  /// Called with every object state written (create and update).
  void set_audit_hook(AuditHook hook);
  /// Called once per store operation; the deterministic runtime charges
  /// logical time here.
  void set_op_observer(OpObserver observer);

 private:
  void notify(EventType type, const SimObject& object);
  void observe(StoreOp op) const;

  mutable std::mutex mutex_;
  std::map<ObjectKey, SimObject> objects_;
  std::map<int, std::pair<Kind, Watcher>> watchers_;
  int next_handle_ = 0;
  AuditHook audit_;
  OpObserver observer_;
};

}  // namespace cascade_trace::sim
