#include "cascade_trace/trace_store.hpp"

#include <algorithm>
#include <mutex>

#include "cascade_trace/error.hpp"

namespace cascade_trace {

ApplyOutcome TraceStore::ingest_mergelog(const Mergelog& log) {
  std::unique_lock lock(log_mutex_);
  const ApplyOutcome outcome = graph_.apply(log);
  if (outcome == ApplyOutcome::Applied) mergelogs_.push_back(log);
  return outcome;
}

void TraceStore::ingest_span(const Span& span) {
  std::unique_lock lock(span_mutex_);
  // a resent span (client retry, rerun with the same seed) is stored once
  if (!span_ids_.insert(span.span_id).second) return;
  span_index_[span.cpid].push_back(spans_.size());
  spans_.push_back(span);
}

std::vector<Mergelog> TraceStore::list_mergelogs(const std::optional<Cpid>& filter) {
  std::shared_lock lock(log_mutex_);
  if (!filter) return mergelogs_;
  const auto related = graph_.related(*filter);
  const std::unordered_set<Cpid> wanted(related.begin(), related.end());
  std::vector<Mergelog> out;
  std::copy_if(mergelogs_.begin(), mergelogs_.end(), std::back_inserter(out),
               [&](const Mergelog& m) { return wanted.contains(m.new_cpid); });
  return out;
}

std::vector<Span> TraceStore::list_spans(const std::optional<Cpid>& filter) {
  if (!filter) {
    std::shared_lock lock(span_mutex_);
    return spans_;
  }
  const auto related = graph_.related(*filter);
  std::shared_lock lock(span_mutex_);
  std::vector<std::size_t> positions;
  for (const auto& c : related) {
    if (const auto it = span_index_.find(c); it != span_index_.end())
      positions.insert(positions.end(), it->second.begin(), it->second.end());
  }
  std::sort(positions.begin(), positions.end());
  std::vector<Span> out;
  out.reserve(positions.size());
  for (const auto p : positions) out.push_back(spans_[p]);
  return out;
}

std::vector<Cpid> TraceStore::related(const Cpid& cpid) { return graph_.related(cpid); }

GraphSnapshot TraceStore::graph() { return graph_.snapshot(); }

std::vector<Cpid> TraceStore::prune(std::size_t max_nodes) {
  std::unique_lock lock(log_mutex_);
  auto removed = graph_.prune(max_nodes);
  if (!removed.empty()) {
    const std::unordered_set<Cpid> gone(removed.begin(), removed.end());
    std::erase_if(mergelogs_, [&](const Mergelog& m) { return gone.contains(m.new_cpid); });
  }
  return removed;
}

std::size_t TraceStore::mergelog_count() const {
  std::shared_lock lock(log_mutex_);
  return mergelogs_.size();
}

std::size_t TraceStore::span_count() const {
  std::shared_lock lock(span_mutex_);
  return spans_.size();
}

}  // namespace cascade_trace
