#pragma once

#include <string>

#include "cascade_trace/merge_graph.hpp"

namespace cascade_trace {

/// DOT digraph; merge-created CPIDs are drawn as boxes, others as ellipses.
std::string to_dot(const GraphSnapshot& graph);

}  // namespace cascade_trace
