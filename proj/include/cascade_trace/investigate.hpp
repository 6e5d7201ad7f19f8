#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cascade_trace/sim/log_sink.hpp"
#include "cascade_trace/trace_store.hpp"

namespace cascade_trace {

struct InvestigationResult {
  Cpid cpid;
  std::vector<Cpid> related;
  /// Sorted by start time within each service.
  std::map<std::string, std::vector<Span>> spans_by_service;
  /// Log records whose cpid is in `related`, in file order.
  std::vector<sim::LogRecord> logs;
};

/// Related CPIDs, then spans, then a scan of the JSONL log (if given).
/// Throws NotFound for an unknown CPID.
InvestigationResult investigate(TraceQuery& query, const Cpid& cpid, const std::optional<std::string>& log_path);

/// Per-service timeline, one span or log line per row.
std::string render_table(const InvestigationResult& result);
nlohmann::json to_json(const InvestigationResult& result);

}  // namespace cascade_trace
