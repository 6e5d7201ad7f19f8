#pragma once

#include "cascade_trace/merge_graph.hpp"

namespace cascade_trace {

/// Whether two merge graphs have the same shape: a bijection between their
/// nodes that preserves edges and the merge_created flag. CPID values and
/// timestamps are ignored.
///
/// Color refinement narrows candidates, then a backtracking search looks for
/// an explicit bijection.
bool isomorphic(const GraphSnapshot& a, const GraphSnapshot& b);

}  // namespace cascade_trace
