#include "cascade_trace/tracer.hpp"

namespace cascade_trace {

Tracer::Tracer(std::string service, std::size_t ancestor_limit, std::shared_ptr<UuidGenerator> uuids,
               TraceSink& sink, Clock& clock)
    : service_(std::move(service)),
      ancestor_limit_(ancestor_limit),
      uuids_(std::move(uuids)),
      sink_(sink),
      clock_(clock) {}

TraceContext Tracer::new_root() {
  TraceContext root = new_root_context(*uuids_);
  sink_.send_mergelog(root_registration(root.cpid, clock_.now()));
  ++mergelogs_sent_;
  return root;
}

TraceContext Tracer::merge(std::span<const TraceContext> observed) {
  MergeResult result = cascade_trace::merge(observed, ancestor_limit_, *uuids_, clock_.now());
  if (result.mergelog) {
    sink_.send_mergelog(*result.mergelog);
    ++mergelogs_sent_;
  }
  return std::move(result.context);
}

SpanHandle Tracer::start_span(const Cpid& cpid, std::string name, const SpanHandle* parent) {
  return cascade_trace::start_span(cpid, service_, std::move(name),
                                   parent ? std::optional(parent->span_id) : std::nullopt, *uuids_, clock_);
}

Span Tracer::end_span(const SpanHandle& handle) {
  Span span = cascade_trace::end_span(handle, clock_);
  sink_.send_span(span);
  ++spans_sent_;
  return span;
}

}  // namespace cascade_trace
