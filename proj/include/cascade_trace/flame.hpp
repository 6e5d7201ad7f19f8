#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "cascade_trace/trace_context.hpp"

namespace cascade_trace {

/// One line per span: the service of its root span, then the span names from
/// the root down to it, then its duration in microseconds:
///   scheduler;reconcile;bind 120
/// A span whose parent is not in `spans` is treated as a root.
std::string folded_stacks(const std::vector<Span>& spans);

/// Forest of spans linked by parent_id, children sorted by start time.
nlohmann::json span_tree(const std::vector<Span>& spans);

}  // namespace cascade_trace
