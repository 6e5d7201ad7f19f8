#include "cascade_trace/flame.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <sstream>

#include "cascade_trace/json_codec.hpp"

namespace cascade_trace {

namespace {

struct Forest {
  std::vector<const Span*> roots;
  std::map<std::string, std::vector<const Span*>> children;
};

Forest build_forest(const std::vector<Span>& spans) {
  std::map<std::string, const Span*> by_id;
  for (const auto& s : spans) by_id.emplace(s.span_id, &s);
  Forest f;
  for (const auto& s : spans) {
    if (s.parent_id && *s.parent_id != s.span_id && by_id.contains(*s.parent_id))
      f.children[*s.parent_id].push_back(&s);
    else
      f.roots.push_back(&s);
  }
  const auto order = [](const Span* a, const Span* b) {
    return std::tie(a->start_time, a->span_id) < std::tie(b->start_time, b->span_id);
  };
  std::sort(f.roots.begin(), f.roots.end(), order);
  for (auto& [_, v] : f.children) std::sort(v.begin(), v.end(), order);
  return f;
}

}  // namespace

std::string folded_stacks(const std::vector<Span>& spans) {
  const Forest f = build_forest(spans);
  std::ostringstream os;
  std::function<void(const Span*, const std::string&)> walk = [&](const Span* s, const std::string& prefix) {
    const std::string path = prefix + ";" + s->name;
    os << path << " " << (s->end_time - s->start_time).count() << "\n";
    if (auto it = f.children.find(s->span_id); it != f.children.end())
      for (const Span* c : it->second) walk(c, path);
  };
  for (const Span* r : f.roots) walk(r, r->service);
  return os.str();
}

nlohmann::json span_tree(const std::vector<Span>& spans) {
  const Forest f = build_forest(spans);
  std::function<nlohmann::json(const Span*)> node = [&](const Span* s) {
    nlohmann::json j = to_json(*s);
    j["duration_us"] = (s->end_time - s->start_time).count();
    auto kids = nlohmann::json::array();
    if (auto it = f.children.find(s->span_id); it != f.children.end())
      for (const Span* c : it->second) kids.push_back(node(c));
    j["children"] = std::move(kids);
    return j;
  };
  auto out = nlohmann::json::array();
  for (const Span* r : f.roots) out.push_back(node(r));
  return out;
}

}  // namespace cascade_trace
