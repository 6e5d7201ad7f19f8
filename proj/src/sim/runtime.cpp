#include "cascade_trace/sim/runtime.hpp"

#include "cascade_trace/error.hpp"

namespace cascade_trace::sim {

// --- deterministic ------------------------------------------------------------

DeterministicRuntime::DeterministicRuntime(ObjectStore& store, LogicalClock& clock, std::uint64_t seed,
                                           Costs costs)
    : store_(store), clock_(clock), rng_(seed ^ 0x9e3779b97f4a7c15ULL) {
  store_.set_op_observer([this, costs](StoreOp op) {
    clock_.advance(op == StoreOp::Read ? costs.read : costs.write);
  });
}

void DeterministicRuntime::attach(Controller& controller) {
  for (const Kind kind : controller.watched_kinds()) {
    store_.watch(kind, [this, &controller](const WatchEvent& event) {
      const Timestamp due = clock_.now() + controller.delay_for(event);
      for (const auto& key : controller.keys_for(event)) enqueue(controller, key, due);
    });
  }
}

void DeterministicRuntime::enqueue(Controller& controller, const std::string& key, Timestamp due) {
  if (!pending_.emplace(&controller, key).second) return;
  queue_.push(Item{due, rng_(), seq_++, &controller, key});
}

void DeterministicRuntime::settle(std::chrono::milliseconds timeout) {
  const Timestamp deadline = clock_.now() + timeout;
  while (!queue_.empty()) {
    Item item = queue_.top();
    queue_.pop();
    clock_.advance_to(item.due);
    if (clock_.now() > deadline) throw Timeout("simulation did not settle within the logical time budget");
    pending_.erase({item.controller, item.key});
    item.controller->reconcile(item.key);
    ++passes_;
  }
}

void DeterministicRuntime::wait_until(const std::function<bool()>& condition, std::chrono::milliseconds,
                                      std::chrono::milliseconds timeout) {
  settle(timeout);
  if (!condition()) throw Timeout("barrier condition does not hold after the simulation settled");
}

// --- threaded ---------------------------------------------------------------

void WorkQueue::add(const std::string& key, TimePoint due) {
  {
    std::lock_guard lock(mutex_);
    if (shutdown_) return;
    const auto [it, inserted] = due_.emplace(key, due);
    if (!inserted) {
      it->second = std::min(it->second, due);
    } else {
      ++outstanding_;
    }
  }
  cv_.notify_one();
}

std::optional<std::string> WorkQueue::get() {
  std::unique_lock lock(mutex_);
  while (true) {
    if (shutdown_) return std::nullopt;
    if (due_.empty()) {
      cv_.wait(lock);
      continue;
    }
    auto next = due_.begin();
    for (auto it = due_.begin(); it != due_.end(); ++it) {
      if (it->second < next->second) next = it;
    }
    if (next->second <= std::chrono::steady_clock::now()) {
      std::string key = next->first;
      due_.erase(next);
      return key;
    }
    cv_.wait_until(lock, next->second);
  }
}

void WorkQueue::done() { --outstanding_; }

void WorkQueue::shutdown() {
  {
    std::lock_guard lock(mutex_);
    shutdown_ = true;
    outstanding_ -= static_cast<long>(due_.size());
    due_.clear();
  }
  cv_.notify_all();
}

ThreadedRuntime::ThreadedRuntime(ObjectStore& store) : store_(store) {}

ThreadedRuntime::~ThreadedRuntime() { stop(); }

void ThreadedRuntime::attach(Controller& controller) {
  auto worker = std::make_unique<Worker>();
  worker->controller = &controller;
  worker->queue = std::make_unique<WorkQueue>(outstanding_);
  WorkQueue* queue = worker->queue.get();
  for (const Kind kind : controller.watched_kinds()) {
    store_.watch(kind, [queue, &controller](const WatchEvent& event) {
      const auto due = std::chrono::steady_clock::now() + controller.delay_for(event);
      for (const auto& key : controller.keys_for(event)) queue->add(key, due);
    });
  }
  workers_.push_back(std::move(worker));
}

void ThreadedRuntime::start() {
  if (started_) return;
  started_ = true;
  for (auto& w : workers_) {
    w->thread = std::thread([worker = w.get()] {
      while (auto key = worker->queue->get()) {
        try {
          worker->controller->reconcile(*key);
        } catch (const std::exception& e) {
          worker->controller->log("", std::string("reconcile failed: ") + e.what(), {{"key", *key}});
        }
        worker->queue->done();
      }
    });
  }
}

void ThreadedRuntime::stop() {
  for (auto& w : workers_) w->queue->shutdown();
  for (auto& w : workers_) {
    if (w->thread.joinable()) w->thread.join();
  }
}

void ThreadedRuntime::settle(std::chrono::milliseconds timeout) {
  wait_until([] { return true; }, std::chrono::milliseconds(5), timeout);
}

void ThreadedRuntime::wait_until(const std::function<bool()>& condition, std::chrono::milliseconds poll,
                                 std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (true) {
    if (outstanding_.load() == 0 && condition()) return;
    if (std::chrono::steady_clock::now() >= deadline)
      throw Timeout("barrier not reached within " + std::to_string(timeout.count()) + " ms");
    std::this_thread::sleep_for(poll);
  }
}

}  // namespace cascade_trace::sim
