#include "cascade_trace/investigate.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

#include "cascade_trace/json_codec.hpp"

namespace cascade_trace {

InvestigationResult investigate(TraceQuery& query, const Cpid& cpid, const std::optional<std::string>& log_path) {
  InvestigationResult out{cpid, {}, {}, {}};
  out.related = query.related(cpid);
  for (auto& span : query.list_spans(cpid)) out.spans_by_service[span.service].push_back(std::move(span));
  for (auto& [_, spans] : out.spans_by_service) {
    std::stable_sort(spans.begin(), spans.end(),
                     [](const Span& a, const Span& b) { return a.start_time < b.start_time; });
  }
  if (log_path) {
    std::unordered_set<std::string> wanted;
    for (const auto& c : out.related) wanted.insert(c.str());
    for (auto& rec : sim::read_log_file(*log_path)) {
      if (wanted.contains(rec.cpid)) out.logs.push_back(std::move(rec));
    }
  }
  return out;
}

std::string render_table(const InvestigationResult& r) {
  std::ostringstream os;
  os << "cpid: " << r.cpid.str() << "\n";
  os << "related (" << r.related.size() << "):\n";
  for (const auto& c : r.related) os << "  " << c.str() << "\n";
  for (const auto& [service, spans] : r.spans_by_service) {
    os << "\n[" << service << "] " << spans.size() << " span(s)\n";
    for (const auto& s : spans) {
      const auto dur = (s.end_time - s.start_time).count();
      os << "  " << format_rfc3339(s.start_time, TimePrecision::Microseconds) << "  " << s.name << "  " << dur
         << "us  " << s.cpid.str() << "\n";
    }
  }
  if (!r.logs.empty()) {
    os << "\nlogs (" << r.logs.size() << "):\n";
    for (const auto& l : r.logs) {
      os << "  " << format_rfc3339(l.ts, TimePrecision::Microseconds) << "  " << l.controller << "  " << l.msg;
      for (const auto& [k, v] : l.fields) os << " " << k << "=" << v;
      os << "\n";
    }
  }
  return os.str();
}

nlohmann::json to_json(const InvestigationResult& r) {
  nlohmann::json spans = nlohmann::json::object();
  for (const auto& [service, list] : r.spans_by_service) {
    auto arr = nlohmann::json::array();
    for (const auto& s : list) arr.push_back(to_json(s));
    spans[service] = std::move(arr);
  }
  auto logs = nlohmann::json::array();
  for (const auto& l : r.logs) logs.push_back(sim::to_json(l));
  return {{"cpid", r.cpid.str()}, {"related", to_json(r.related)}, {"spans", std::move(spans)}, {"logs", std::move(logs)}};
}

}  // namespace cascade_trace
