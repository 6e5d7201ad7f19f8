#pragma once

#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "cascade_trace/cpid.hpp"
#include "cascade_trace/trace_context.hpp"

namespace testing {

// Valid UUIDv4 whose lexicographic order follows `i`.
inline cascade_trace::Cpid u(unsigned i) {
  char buf[37];
  std::snprintf(buf, sizeof buf, "00000000-0000-4000-8000-%012x", i);
  return cascade_trace::Cpid::from_string(buf);
}

inline cascade_trace::Timestamp at_ms(long ms) {
  return cascade_trace::Timestamp{std::chrono::milliseconds{ms}};
}

inline cascade_trace::Mergelog mlog(cascade_trace::Cpid to, std::vector<cascade_trace::Cpid> from,
                                    cascade_trace::Timestamp ts = {}) {
  return {std::move(to), std::move(from), ts};
}

// Everything reachable from `start` over `edges` (from -> to), start included.
inline std::set<cascade_trace::Cpid> reachable(
    const std::multimap<cascade_trace::Cpid, cascade_trace::Cpid>& edges, const cascade_trace::Cpid& start) {
  std::set<cascade_trace::Cpid> seen{start};
  std::vector<cascade_trace::Cpid> stack{start};
  while (!stack.empty()) {
    const auto c = stack.back();
    stack.pop_back();
    auto [lo, hi] = edges.equal_range(c);
    for (auto it = lo; it != hi; ++it)
      if (seen.insert(it->second).second) stack.push_back(it->second);
  }
  return seen;
}

}  // namespace testing
