#include "cascade_trace/merge_graph.hpp"

#include <algorithm>
#include <deque>
#include <mutex>
#include <unordered_set>

#include "cascade_trace/error.hpp"

namespace cascade_trace {

MergeGraph::MergeGraph(const MergeGraph& other) {
  std::shared_lock lock(other.mutex_);
  nodes_ = other.nodes_;
  edges_ = other.edges_;
  roots_ = other.roots_;
}

MergeGraph& MergeGraph::operator=(const MergeGraph& other) {
  if (this == &other) return *this;
  std::scoped_lock lock(mutex_);
  std::shared_lock other_lock(other.mutex_);
  nodes_ = other.nodes_;
  edges_ = other.edges_;
  roots_ = other.roots_;
  return *this;
}

bool MergeGraph::reaches(const Cpid& from, const Cpid& to) const {
  if (from == to) return true;
  const auto start = nodes_.find(from);
  if (start == nodes_.end()) return false;
  std::unordered_set<Cpid> seen{from};
  std::vector<const Cpid*> stack{&from};
  while (!stack.empty()) {
    const Cpid* cur = stack.back();
    stack.pop_back();
    for (const auto& next : nodes_.at(*cur).out) {
      if (next == to) return true;
      if (seen.insert(next).second) stack.push_back(&next);
    }
  }
  return false;
}

ApplyOutcome MergeGraph::apply(const Mergelog& log) {
  validate_mergelog(log);
  std::scoped_lock lock(mutex_);

  const auto existing = nodes_.find(log.new_cpid);
  if (existing != nodes_.end() && existing->second.logged) {
    const bool all_edges = std::all_of(log.source_cpids.begin(), log.source_cpids.end(), [&](const Cpid& s) {
      const auto src = nodes_.find(s);
      return src != nodes_.end() &&
             std::find(src->second.out.begin(), src->second.out.end(), log.new_cpid) != src->second.out.end();
    });
    if (all_edges) return ApplyOutcome::Duplicate;
  }

  for (const auto& s : log.source_cpids) {
    if (reaches(log.new_cpid, s))
      throw CycleRejected("edge " + s.str() + " -> " + log.new_cpid.str() + " closes a cycle");
  }

  auto ensure = [&](const Cpid& c) -> Node& {
    auto [it, inserted] = nodes_.try_emplace(c);
    if (inserted) {
      it->second.timestamp = log.timestamp;
      roots_.emplace(log.timestamp, c);
    }
    return it->second;
  };

  {
    Node& target = ensure(log.new_cpid);
    if (!target.logged) {
      if (target.in_degree == 0) {
        roots_.erase({target.timestamp, log.new_cpid});
        roots_.emplace(log.timestamp, log.new_cpid);
      }
      target.timestamp = log.timestamp;
      target.logged = true;
    }
    if (!log.source_cpids.empty()) target.merge_created = true;
  }

  for (const auto& s : log.source_cpids) {
    Node& src = ensure(s);
    if (std::find(src.out.begin(), src.out.end(), log.new_cpid) != src.out.end()) continue;
    src.out.push_back(log.new_cpid);
    Node& target = nodes_.at(log.new_cpid);
    if (target.in_degree++ == 0) roots_.erase({target.timestamp, log.new_cpid});
    ++edges_;
  }
  return ApplyOutcome::Applied;
}

std::vector<Cpid> MergeGraph::related(const Cpid& cpid) const {
  std::shared_lock lock(mutex_);
  if (!nodes_.contains(cpid)) throw NotFound("unknown CPID " + cpid.str());

  std::vector<Cpid> result{cpid};
  std::unordered_set<Cpid> seen{cpid};
  std::vector<Cpid> layer{cpid};
  while (!layer.empty()) {
    std::vector<Cpid> next;
    for (const auto& c : layer) {
      for (const auto& n : nodes_.at(c).out) {
        if (seen.insert(n).second) next.push_back(n);
      }
    }
    std::sort(next.begin(), next.end());
    result.insert(result.end(), next.begin(), next.end());
    layer = std::move(next);
  }
  return result;
}

void MergeGraph::erase_node(const Cpid& cpid, std::vector<Cpid>& removed) {
  std::vector<Cpid> pending{cpid};
  while (!pending.empty()) {
    const Cpid cur = pending.back();
    pending.pop_back();
    auto it = nodes_.find(cur);
    Node node = std::move(it->second);
    nodes_.erase(it);
    roots_.erase({node.timestamp, cur});
    removed.push_back(cur);
    for (const auto& t : node.out) {
      --edges_;
      Node& target = nodes_.at(t);
      if (--target.in_degree == 0) {
        if (target.merge_created) {
          pending.push_back(t);
        } else {
          roots_.emplace(target.timestamp, t);
        }
      }
    }
  }
}

std::vector<Cpid> MergeGraph::prune(std::size_t max_nodes) {
  std::scoped_lock lock(mutex_);
  std::vector<Cpid> removed;
  while (nodes_.size() > max_nodes && !roots_.empty()) {
    const Cpid victim = roots_.begin()->second;
    erase_node(victim, removed);
  }
  return removed;
}

GraphSnapshot MergeGraph::snapshot() const {
  std::shared_lock lock(mutex_);
  GraphSnapshot snap;
  snap.nodes.reserve(nodes_.size());
  for (const auto& [cpid, node] : nodes_) {
    snap.nodes.push_back(GraphNode{cpid, node.timestamp, node.merge_created});
    for (const auto& t : node.out) snap.edges.push_back(GraphEdge{cpid, t});
  }
  std::sort(snap.nodes.begin(), snap.nodes.end(), [](const GraphNode& a, const GraphNode& b) {
    return std::tie(a.timestamp, a.cpid) < std::tie(b.timestamp, b.cpid);
  });
  std::sort(snap.edges.begin(), snap.edges.end(), [](const GraphEdge& a, const GraphEdge& b) {
    return std::tie(a.from, a.to) < std::tie(b.from, b.to);
  });
  return snap;
}

bool MergeGraph::contains(const Cpid& cpid) const {
  std::shared_lock lock(mutex_);
  return nodes_.contains(cpid);
}

std::size_t MergeGraph::size() const {
  std::shared_lock lock(mutex_);
  return nodes_.size();
}

std::size_t MergeGraph::edge_count() const {
  std::shared_lock lock(mutex_);
  return edges_;
}

std::size_t MergeGraph::in_degree(const Cpid& cpid) const {
  std::shared_lock lock(mutex_);
  const auto it = nodes_.find(cpid);
  if (it == nodes_.end()) throw NotFound("unknown CPID " + cpid.str());
  return it->second.in_degree;
}

}  // namespace cascade_trace
