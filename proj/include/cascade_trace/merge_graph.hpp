#pragma once

#include <cstddef>
#include <set>
#include <shared_mutex>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cascade_trace/trace_context.hpp"

namespace cascade_trace {

struct GraphNode {
  Cpid cpid;
  Timestamp timestamp;
  bool merge_created = false;

  friend bool operator==(const GraphNode&, const GraphNode&) = default;
};

struct GraphEdge {
  Cpid from;
  Cpid to;

  friend bool operator==(const GraphEdge&, const GraphEdge&) = default;
};

struct GraphSnapshot {
  std::vector<GraphNode> nodes;  // ordered by (timestamp, cpid)
  std::vector<GraphEdge> edges;  // ordered by (from, to)
};

enum class ApplyOutcome { Applied, Duplicate };

/// DAG over CPIDs. Edges run from merge sources to the merged CPID.
///
/// All public members are safe to call concurrently: mutations take an
/// exclusive lock, queries a shared one, so readers never observe a
/// half-applied mergelog or a prune in the middle of its cascade.
class MergeGraph {
 public:
  MergeGraph() = default;
  MergeGraph(const MergeGraph& other);
  MergeGraph& operator=(const MergeGraph& other);

  /// Sources that were never seen are created as plain roots. Throws
  /// CycleRejected (graph untouched) if an edge would close a cycle.
  ApplyOutcome apply(const Mergelog& log);

  /// Every CPID reachable from `cpid`, itself first, in breadth-first layers
  /// with lexicographic order inside a layer. Throws NotFound.
  std::vector<Cpid> related(const Cpid& cpid) const;

  /// Removes the oldest in-degree-0 nodes (ties by CPID) until at most
  /// `max_nodes` remain or no such node is left. Merge-created nodes whose
  /// in-degree drops to 0 are removed along with them. Returns removed CPIDs
  /// in deletion order.
  std::vector<Cpid> prune(std::size_t max_nodes);

  GraphSnapshot snapshot() const;

  bool contains(const Cpid& cpid) const;
  std::size_t size() const;
  std::size_t edge_count() const;
  std::size_t in_degree(const Cpid& cpid) const;

 private:
  struct Node {
    Timestamp timestamp;
    bool merge_created = false;
    bool logged = false;  // introduced by its own mergelog, not only as a source
    std::size_t in_degree = 0;
    std::vector<Cpid> out;
  };

  bool reaches(const Cpid& from, const Cpid& to) const;
  void erase_node(const Cpid& cpid, std::vector<Cpid>& removed);

  mutable std::shared_mutex mutex_;
  std::unordered_map<Cpid, Node> nodes_;
  std::size_t edges_ = 0;
  // In-degree-0 nodes ordered as prune candidates.
  std::set<std::pair<Timestamp, Cpid>> roots_;
};

}  // namespace cascade_trace
