#include "cascade_trace/trace_context.hpp"

#include <algorithm>
#include <unordered_set>

#include "cascade_trace/error.hpp"

namespace cascade_trace {

namespace {

bool contains(const std::vector<Cpid>& list, const Cpid& c) {
  return std::find(list.begin(), list.end(), c) != list.end();
}

std::vector<Cpid> split_ancestors(std::string_view text) {
  std::vector<Cpid> out;
  if (text.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    const auto piece = text.substr(start, comma == std::string_view::npos ? text.npos : comma - start);
    out.push_back(Cpid::from_string(piece));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

void validate_context(const TraceContext& tctx, std::size_t ancestor_limit) {
  if (tctx.ancestors.size() > ancestor_limit)
    throw MalformedContext("ancestor list longer than " + std::to_string(ancestor_limit));
  std::unordered_set<Cpid> seen;
  for (const auto& a : tctx.ancestors) {
    if (a == tctx.cpid) throw MalformedContext("CPID listed as its own ancestor");
    if (!seen.insert(a).second) throw MalformedContext("duplicate ancestor " + a.str());
  }
}

void validate_mergelog(const Mergelog& log) {
  std::unordered_set<Cpid> seen;
  for (const auto& s : log.source_cpids) {
    if (s == log.new_cpid) throw MalformedContext("new_cpid listed among source_cpids");
    if (!seen.insert(s).second) throw MalformedContext("duplicate source " + s.str());
  }
}

std::string encode_ancestors(std::span<const Cpid> ancestors) {
  std::string out;
  for (std::size_t i = 0; i < ancestors.size(); ++i) {
    if (i) out.push_back(',');
    out += ancestors[i].str();
  }
  return out;
}

void inject(Annotations& annotations, const TraceContext& tctx) {
  annotations[std::string(kCpidAnnotation)] = tctx.cpid.str();
  annotations[std::string(kAncestorsAnnotation)] = encode_ancestors(tctx.ancestors);
}

std::optional<TraceContext> extract(const Annotations& annotations, std::size_t ancestor_limit) {
  const auto it = annotations.find(std::string(kCpidAnnotation));
  if (it == annotations.end()) return std::nullopt;
  TraceContext tctx{Cpid::from_string(it->second), {}};
  if (const auto anc = annotations.find(std::string(kAncestorsAnnotation)); anc != annotations.end())
    tctx.ancestors = split_ancestors(anc->second);
  validate_context(tctx, ancestor_limit);
  return tctx;
}

std::optional<TraceContext> extract_lenient(const Annotations& annotations,
                                            std::size_t ancestor_limit) noexcept {
  try {
    return extract(annotations, ancestor_limit);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

TraceContext new_root_context(UuidGenerator& gen) { return TraceContext{gen.next_cpid(), {}}; }

Mergelog root_registration(const Cpid& cpid, Timestamp now) {
  return Mergelog{cpid, {}, std::chrono::floor<std::chrono::milliseconds>(now)};
}

CpidGraph build_cpid_graph(std::span<const TraceContext> tctxs) {
  CpidGraph graph;
  for (const auto& input : tctxs) {
    std::vector<Cpid> ancestors = input.ancestors;

    // Step 1: roots that this context already descends from are absorbed; their
    // ancestors go to the end of the list since they are older.
    for (auto it = graph.begin(); it != graph.end();) {
      if (contains(ancestors, it->first)) {
        for (const auto& val : it->second) {
          if (val != input.cpid && !contains(ancestors, val)) ancestors.push_back(val);
        }
        it = graph.erase(it);
      } else {
        ++it;
      }
    }

    // Step 2: if this context is a root or an ancestor of one, fold its
    // ancestors into that root; otherwise it becomes a new root.
    bool included = false;
    for (auto& [key, values] : graph) {
      if (key == input.cpid || contains(values, input.cpid)) {
        for (auto r = ancestors.rbegin(); r != ancestors.rend(); ++r) {
          if (*r != key && !contains(values, *r)) values.insert(values.begin(), *r);
        }
        included = true;
      }
    }
    if (!included) graph.emplace_back(input.cpid, std::move(ancestors));
  }
  return graph;
}

MergeResult merge(std::span<const TraceContext> tctxs, std::size_t ancestor_limit,
                  UuidGenerator& gen, Timestamp now) {
  if (tctxs.empty()) throw EmptyInput("merge() needs at least one trace context");

  CpidGraph graph = build_cpid_graph(tctxs);
  if (graph.size() == 1) {
    auto& [root, ancestors] = graph.front();
    if (ancestors.size() > ancestor_limit) ancestors.erase(ancestors.begin() + static_cast<std::ptrdiff_t>(ancestor_limit), ancestors.end());
    return MergeResult{TraceContext{root, std::move(ancestors)}, std::nullopt};
  }

  Cpid fresh = gen.next_cpid();
  std::vector<Cpid> sources;
  sources.reserve(graph.size());
  for (const auto& [root, _] : graph) sources.push_back(root);

  std::vector<Cpid> ancestors = sources;
  for (const auto& [_, values] : graph) {
    for (const auto& v : values) {
      if (v != fresh && !contains(ancestors, v)) ancestors.push_back(v);
    }
  }
  if (ancestors.size() > ancestor_limit) ancestors.erase(ancestors.begin() + static_cast<std::ptrdiff_t>(ancestor_limit), ancestors.end());

  Mergelog log{fresh, std::move(sources), std::chrono::floor<std::chrono::milliseconds>(now)};
  return MergeResult{TraceContext{std::move(fresh), std::move(ancestors)}, std::move(log)};
}

SpanHandle start_span(const Cpid& cpid, std::string service, std::string name,
                      std::optional<std::string> parent_id, UuidGenerator& gen, Clock& clock) {
  return SpanHandle{cpid,          gen.next_string(), std::move(parent_id),
                    std::move(service), std::move(name), clock.now()};
}

Span end_span(const SpanHandle& handle, Clock& clock) {
  const Timestamp end = std::max(handle.start_time, clock.now());
  return Span{handle.cpid,    handle.span_id, handle.parent_id, handle.service,
              handle.name,    handle.start_time, end};
}

}  // namespace cascade_trace
