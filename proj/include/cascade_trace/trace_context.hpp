#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cascade_trace/cpid.hpp"
#include "cascade_trace/time.hpp"

namespace cascade_trace {

inline constexpr std::string_view kCpidAnnotation = "cascade-trace/cpid";
inline constexpr std::string_view kAncestorsAnnotation = "cascade-trace/ancestors";

/// Default bound on the ancestor list carried next to a CPID.
inline constexpr std::size_t kDefaultAncestorLimit = 5;

using Annotations = std::map<std::string, std::string>;

/// A CPID plus its newest-first ancestor CPIDs.
struct TraceContext {
  Cpid cpid;
  std::vector<Cpid> ancestors;

  friend bool operator==(const TraceContext&, const TraceContext&) = default;
};

/// Links source CPIDs to a newly generated CPID. Empty sources register a root.
struct Mergelog {
  Cpid new_cpid;
  std::vector<Cpid> source_cpids;
  Timestamp timestamp;

  friend bool operator==(const Mergelog&, const Mergelog&) = default;
};

struct Span {
  Cpid cpid;
  std::string span_id;
  std::optional<std::string> parent_id;
  std::string service;
  std::string name;
  Timestamp start_time;
  Timestamp end_time;

  friend bool operator==(const Span&, const Span&) = default;
};

/// Roots of the local ancestor graph with their ancestor lists, kept in
/// insertion order so that merge results are deterministic.
using CpidGraph = std::vector<std::pair<Cpid, std::vector<Cpid>>>;

/// Throws MalformedContext if `cpid` is in its own ancestors, ancestors repeat,
/// or there are more than `ancestor_limit` of them.
void validate_context(const TraceContext& tctx, std::size_t ancestor_limit);

/// Throws MalformedContext when the mergelog violates its invariants.
void validate_mergelog(const Mergelog& log);

std::string encode_ancestors(std::span<const Cpid> ancestors);

void inject(Annotations& annotations, const TraceContext& tctx);

/// Absent when the CPID annotation is missing. Throws MalformedContext when the
/// annotation is present but does not decode into a valid context.
std::optional<TraceContext> extract(const Annotations& annotations, std::size_t ancestor_limit);

/// Like extract(), but treats malformed contexts as absent.
std::optional<TraceContext> extract_lenient(const Annotations& annotations,
                                            std::size_t ancestor_limit) noexcept;

TraceContext new_root_context(UuidGenerator& gen);
Mergelog root_registration(const Cpid& cpid, Timestamp now);

/// Builds the local ancestor-relationship graph from observed contexts.
CpidGraph build_cpid_graph(std::span<const TraceContext> tctxs);

struct MergeResult {
  TraceContext context;
  std::optional<Mergelog> mergelog;
};

/// Merges observed contexts. A single root in the local graph is reused as-is
/// (no mergelog); otherwise a fresh CPID is generated whose ancestors are the
/// roots followed by their ancestor lists, truncated to `ancestor_limit`.
/// Throws EmptyInput when `tctxs` is empty.
MergeResult merge(std::span<const TraceContext> tctxs, std::size_t ancestor_limit,
                  UuidGenerator& gen, Timestamp now);

struct SpanHandle {
  Cpid cpid;
  std::string span_id;
  std::optional<std::string> parent_id;
  std::string service;
  std::string name;
  Timestamp start_time;
};

SpanHandle start_span(const Cpid& cpid, std::string service, std::string name,
                      std::optional<std::string> parent_id, UuidGenerator& gen, Clock& clock);

/// end_time is clamped so that it never precedes start_time.
Span end_span(const SpanHandle& handle, Clock& clock);

}  // namespace cascade_trace
