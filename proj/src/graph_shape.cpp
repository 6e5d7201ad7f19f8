#include "cascade_trace/graph_shape.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

namespace cascade_trace {

namespace {

struct Indexed {
  std::vector<bool> merge_created;
  std::vector<std::vector<int>> out;
  std::vector<std::vector<int>> in;
  std::vector<std::vector<bool>> adj;
};

Indexed index(const GraphSnapshot& g) {
  Indexed ix;
  std::unordered_map<Cpid, int> id;
  for (const auto& n : g.nodes) {
    id.emplace(n.cpid, static_cast<int>(ix.merge_created.size()));
    ix.merge_created.push_back(n.merge_created);
  }
  const auto n = ix.merge_created.size();
  ix.out.resize(n);
  ix.in.resize(n);
  ix.adj.assign(n, std::vector<bool>(n, false));
  for (const auto& e : g.edges) {
    const int f = id.at(e.from), t = id.at(e.to);
    ix.out[f].push_back(t);
    ix.in[t].push_back(f);
    ix.adj[f][t] = true;
  }
  return ix;
}

// Joint 1-WL refinement so that colors are comparable across both graphs.
void refine(const Indexed& a, const Indexed& b, std::vector<int>& ca, std::vector<int>& cb) {
  using Signature = std::tuple<int, std::vector<int>, std::vector<int>>;
  auto initial = [](const Indexed& g, std::size_t v) {
    return static_cast<int>(g.merge_created[v]) * 1'000'000 + static_cast<int>(g.in[v].size()) * 1000 +
           static_cast<int>(g.out[v].size());
  };
  ca.resize(a.out.size());
  cb.resize(b.out.size());
  for (std::size_t v = 0; v < ca.size(); ++v) ca[v] = initial(a, v);
  for (std::size_t v = 0; v < cb.size(); ++v) cb[v] = initial(b, v);

  std::size_t classes = 0;
  while (true) {
    std::map<Signature, int> palette;
    auto signature = [](const Indexed& g, const std::vector<int>& c, std::size_t v) {
      std::vector<int> outs, ins;
      for (int t : g.out[v]) outs.push_back(c[t]);
      for (int f : g.in[v]) ins.push_back(c[f]);
      std::sort(outs.begin(), outs.end());
      std::sort(ins.begin(), ins.end());
      return Signature{c[v], std::move(outs), std::move(ins)};
    };
    std::vector<Signature> sa, sb;
    for (std::size_t v = 0; v < ca.size(); ++v) palette.emplace(sa.emplace_back(signature(a, ca, v)), 0);
    for (std::size_t v = 0; v < cb.size(); ++v) palette.emplace(sb.emplace_back(signature(b, cb, v)), 0);
    int next = 0;
    for (auto& [_, color] : palette) color = next++;
    for (std::size_t v = 0; v < ca.size(); ++v) ca[v] = palette.at(sa[v]);
    for (std::size_t v = 0; v < cb.size(); ++v) cb[v] = palette.at(sb[v]);
    if (palette.size() == classes) break;
    classes = palette.size();
  }
}

class Matcher {
 public:
  Matcher(const Indexed& a, const Indexed& b, std::vector<int> ca, std::vector<int> cb)
      : a_(a), b_(b), ca_(std::move(ca)), cb_(std::move(cb)),
        map_(a.out.size(), -1), used_(b.out.size(), false) {
    std::map<int, int> class_size;
    for (int c : ca_) ++class_size[c];
    // Grow the search order along edges so every new node is constrained by
    // already-mapped neighbours; start each component from its rarest color.
    const std::size_t n = a.out.size();
    std::vector<int> linked(n, 0);
    std::vector<bool> placed(n, false);
    for (std::size_t step = 0; step < n; ++step) {
      int best = -1;
      for (std::size_t v = 0; v < n; ++v) {
        if (placed[v]) continue;
        if (best < 0 || linked[v] > linked[best] ||
            (linked[v] == linked[best] && class_size[ca_[v]] < class_size[ca_[best]]))
          best = static_cast<int>(v);
      }
      placed[best] = true;
      order_.push_back(best);
      for (int t : a.out[best]) ++linked[t];
      for (int f : a.in[best]) ++linked[f];
    }
  }

  bool run() { return extend(0); }

 private:
  bool consistent(int va, int vb) const {
    for (std::size_t depth = 0; depth < order_.size(); ++depth) {
      const int ua = order_[depth];
      const int ub = map_[ua];
      if (ub < 0) continue;
      if (a_.adj[va][ua] != b_.adj[vb][ub] || a_.adj[ua][va] != b_.adj[ub][vb]) return false;
    }
    return true;
  }

  bool extend(std::size_t depth) {
    if (depth == order_.size()) return true;
    const int va = order_[depth];
    for (std::size_t vb = 0; vb < cb_.size(); ++vb) {
      if (used_[vb] || cb_[vb] != ca_[va] || !consistent(va, static_cast<int>(vb))) continue;
      map_[va] = static_cast<int>(vb);
      used_[vb] = true;
      if (extend(depth + 1)) return true;
      map_[va] = -1;
      used_[vb] = false;
    }
    return false;
  }

  const Indexed& a_;
  const Indexed& b_;
  std::vector<int> ca_, cb_;
  std::vector<int> map_;
  std::vector<bool> used_;
  std::vector<int> order_;
};

}  // namespace

bool isomorphic(const GraphSnapshot& a, const GraphSnapshot& b) {
  if (a.nodes.size() != b.nodes.size() || a.edges.size() != b.edges.size()) return false;
  const Indexed ia = index(a);
  const Indexed ib = index(b);
  std::vector<int> ca, cb;
  refine(ia, ib, ca, cb);
  auto hist_a = ca, hist_b = cb;
  std::sort(hist_a.begin(), hist_a.end());
  std::sort(hist_b.begin(), hist_b.end());
  if (hist_a != hist_b) return false;
  return Matcher(ia, ib, std::move(ca), std::move(cb)).run();
}

}  // namespace cascade_trace
