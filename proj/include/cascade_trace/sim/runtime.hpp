#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <queue>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "cascade_trace/sim/controllers.hpp"

namespace cascade_trace::sim {

/// Drives controllers from store watch events.
class Runtime {
 public:
  virtual ~Runtime() = default;
  /// Subscribes the controller's watches. Call before start().
  virtual void attach(Controller& controller) = 0;
  virtual void start() {}
  virtual void stop() {}
  /// Returns once no work is queued, due or running. Throws Timeout.
  virtual void settle(std::chrono::milliseconds timeout) = 0;
  /// Returns once `condition` holds while idle. Throws Timeout.
  virtual void wait_until(const std::function<bool()>& condition, std::chrono::milliseconds poll,
                          std::chrono::milliseconds timeout) = 0;
};

/// Single-threaded discrete-event loop over a logical clock. Each store
/// operation costs logical time; ties between due work items are broken by a
/// seeded RNG, so a seed fully determines the interleaving.
class DeterministicRuntime final : public Runtime {
 public:
  struct Costs {
    std::chrono::microseconds read{100};
    std::chrono::microseconds write{1000};
  };

  DeterministicRuntime(ObjectStore& store, LogicalClock& clock, std::uint64_t seed, Costs costs);
  DeterministicRuntime(ObjectStore& store, LogicalClock& clock, std::uint64_t seed)
      : DeterministicRuntime(store, clock, seed, Costs{}) {}

  void attach(Controller& controller) override;
  void settle(std::chrono::milliseconds timeout) override;
  void wait_until(const std::function<bool()>& condition, std::chrono::milliseconds poll,
                  std::chrono::milliseconds timeout) override;

  std::size_t passes_run() const { return passes_; }

 private:
  struct Item {
    Timestamp due;
    std::uint64_t tiebreak;
    std::uint64_t seq;
    Controller* controller;
    std::string key;
    bool operator>(const Item& o) const {
      return std::tie(due, tiebreak, seq) > std::tie(o.due, o.tiebreak, o.seq);
    }
  };

  void enqueue(Controller& controller, const std::string& key, Timestamp due);

  ObjectStore& store_;
  LogicalClock& clock_;
  std::mt19937_64 rng_;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue_;
  std::set<std::pair<Controller*, std::string>> pending_;
  std::uint64_t seq_ = 0;
  std::size_t passes_ = 0;
};

/// Keyed work queue with per-key de-duplication and delayed adds.
class WorkQueue {
 public:
  using TimePoint = std::chrono::steady_clock::time_point;

  explicit WorkQueue(std::atomic<long>& outstanding) : outstanding_(outstanding) {}

  void add(const std::string& key, TimePoint due);
  /// Blocks for the next due key; empty after shutdown().
  std::optional<std::string> get();
  void done();
  void shutdown();

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  std::map<std::string, TimePoint> due_;
  bool shutdown_ = false;
  std::atomic<long>& outstanding_;
};

/// One worker thread per controller against the wall clock.
class ThreadedRuntime final : public Runtime {
 public:
  explicit ThreadedRuntime(ObjectStore& store);
  ~ThreadedRuntime() override;

  void attach(Controller& controller) override;
  void start() override;
  void stop() override;
  void settle(std::chrono::milliseconds timeout) override;
  void wait_until(const std::function<bool()>& condition, std::chrono::milliseconds poll,
                  std::chrono::milliseconds timeout) override;

 private:
  struct Worker {
    Controller* controller;
    std::unique_ptr<WorkQueue> queue;
    std::thread thread;
  };

  ObjectStore& store_;
  std::atomic<long> outstanding_{0};
  std::vector<std::unique_ptr<Worker>> workers_;
  bool started_ = false;
};

}  // namespace cascade_trace::sim
