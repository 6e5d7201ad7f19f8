#pragma once

#include <atomic>
#include <cstddef>
#include <memory>
#include <span>
#include <string>

#include "cascade_trace/trace_context.hpp"
#include "cascade_trace/trace_store.hpp"

namespace cascade_trace {

/// Per-controller instrumentation handle: generates CPIDs, merges observed
/// contexts and ships the resulting mergelogs and spans to a sink.
class Tracer {
 public:
  Tracer(std::string service, std::size_t ancestor_limit, std::shared_ptr<UuidGenerator> uuids,
         TraceSink& sink, Clock& clock);

  const std::string& service() const { return service_; }
  std::size_t ancestor_limit() const { return ancestor_limit_; }
  Clock& clock() { return clock_; }

  /// Fresh root context; its registration mergelog is sent.
  TraceContext new_root();

  /// merge() over the observed contexts; sends the mergelog if one is produced.
  TraceContext merge(std::span<const TraceContext> observed);

  std::optional<TraceContext> extract(const Annotations& annotations) const {
    return extract_lenient(annotations, ancestor_limit_);
  }

  SpanHandle start_span(const Cpid& cpid, std::string name, const SpanHandle* parent = nullptr);
  /// Closes and sends the span.
  Span end_span(const SpanHandle& handle);

  std::size_t mergelogs_sent() const { return mergelogs_sent_.load(); }
  std::size_t spans_sent() const { return spans_sent_.load(); }

 private:
  std::string service_;
  std::size_t ancestor_limit_;
  std::shared_ptr<UuidGenerator> uuids_;
  TraceSink& sink_;
  Clock& clock_;
  std::atomic<std::size_t> mergelogs_sent_{0};
  std::atomic<std::size_t> spans_sent_{0};
};

}  // namespace cascade_trace
