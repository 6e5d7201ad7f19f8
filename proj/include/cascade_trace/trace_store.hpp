#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <shared_mutex>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "cascade_trace/merge_graph.hpp"
#include "cascade_trace/trace_context.hpp"

namespace cascade_trace {

/// Where controllers send mergelogs and spans.
class TraceSink {
 public:
  virtual ~TraceSink() = default;
  virtual void send_mergelog(const Mergelog& log) = 0;
  virtual void send_span(const Span& span) = 0;
  /// Blocks until everything sent so far has been delivered.
  virtual void flush() {}
};

class NullSink final : public TraceSink {
 public:
  void send_mergelog(const Mergelog&) override {}
  void send_span(const Span&) override {}
};

/// Query side of the trace server. Implemented in-process by TraceStore and
/// over HTTP by HttpTraceClient.
class TraceQuery {
 public:
  virtual ~TraceQuery() = default;
  /// Unfiltered: everything in ingestion order. Filtered: only mergelogs whose
  /// new CPID is related to `filter`. Throws NotFound for an unknown filter.
  virtual std::vector<Mergelog> list_mergelogs(const std::optional<Cpid>& filter) = 0;
  virtual std::vector<Span> list_spans(const std::optional<Cpid>& filter) = 0;
  virtual std::vector<Cpid> related(const Cpid& cpid) = 0;
  virtual GraphSnapshot graph() = 0;
  virtual std::vector<Cpid> prune(std::size_t max_nodes) = 0;
};

/// Trace server state: mergelog list, merge graph and span store.
class TraceStore final : public TraceQuery {
 public:
  /// Throws MalformedContext or CycleRejected; neither changes any state.
  ApplyOutcome ingest_mergelog(const Mergelog& log);
  /// A span whose span_id is already stored is ignored.
  void ingest_span(const Span& span);

  std::vector<Mergelog> list_mergelogs(const std::optional<Cpid>& filter) override;
  std::vector<Span> list_spans(const std::optional<Cpid>& filter) override;
  std::vector<Cpid> related(const Cpid& cpid) override;
  GraphSnapshot graph() override;
  /// Also drops stored mergelogs whose new CPID was removed.
  std::vector<Cpid> prune(std::size_t max_nodes) override;

  std::size_t mergelog_count() const;
  std::size_t span_count() const;
  std::size_t node_count() const { return graph_.size(); }

 private:
  mutable std::shared_mutex log_mutex_;  // guards mergelogs_ and graph_ mutations together
  std::vector<Mergelog> mergelogs_;
  MergeGraph graph_;

  mutable std::shared_mutex span_mutex_;
  std::vector<Span> spans_;
  std::unordered_map<Cpid, std::vector<std::size_t>> span_index_;
  std::unordered_set<std::string> span_ids_;
};

/// Delivers straight into an in-process TraceStore.
class StoreSink final : public TraceSink {
 public:
  explicit StoreSink(TraceStore& store) : store_(store) {}
  void send_mergelog(const Mergelog& log) override { store_.ingest_mergelog(log); }
  void send_span(const Span& span) override { store_.ingest_span(span); }

 private:
  TraceStore& store_;
};

}  // namespace cascade_trace
