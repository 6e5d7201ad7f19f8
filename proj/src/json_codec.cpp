#include "cascade_trace/json_codec.hpp"

#include "cascade_trace/error.hpp"

namespace cascade_trace {

using nlohmann::json;

namespace {

const json& field(const json& j, const char* key) {
  if (!j.is_object()) throw MalformedContext("expected a JSON object");
  const auto it = j.find(key);
  if (it == j.end()) throw MalformedContext(std::string("missing field '") + key + "'");
  return *it;
}

std::string string_field(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_string()) throw MalformedContext(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

Timestamp time_field(const json& j, const char* key) {
  try {
    return parse_rfc3339(string_field(j, key));
  } catch (const std::invalid_argument& e) {
    throw MalformedContext(std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace

json to_json(const Mergelog& log) {
  json sources = json::array();
  for (const auto& s : log.source_cpids) sources.push_back(s.str());
  return json{{"new_cpid", log.new_cpid.str()},
              {"source_cpids", std::move(sources)},
              {"timestamp", format_rfc3339(log.timestamp, TimePrecision::Milliseconds)}};
}

json to_json(const Span& span) {
  return json{{"cpid", span.cpid.str()},
              {"span_id", span.span_id},
              {"parent_id", span.parent_id ? json(*span.parent_id) : json(nullptr)},
              {"service", span.service},
              {"name", span.name},
              {"start_time", format_rfc3339(span.start_time, TimePrecision::Microseconds)},
              {"end_time", format_rfc3339(span.end_time, TimePrecision::Microseconds)}};
}

json to_json(const GraphSnapshot& graph) {
  json nodes = json::array();
  for (const auto& n : graph.nodes) {
    nodes.push_back({{"cpid", n.cpid.str()},
                     {"timestamp", format_rfc3339(n.timestamp, TimePrecision::Milliseconds)},
                     {"merge_created", n.merge_created}});
  }
  json edges = json::array();
  for (const auto& e : graph.edges) edges.push_back({{"from", e.from.str()}, {"to", e.to.str()}});
  return json{{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

json to_json(const std::vector<Cpid>& cpids) {
  json out = json::array();
  for (const auto& c : cpids) out.push_back(c.str());
  return out;
}

std::vector<Cpid> cpids_from_json(const json& j) {
  if (!j.is_array()) throw MalformedContext("expected an array of CPIDs");
  std::vector<Cpid> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_string()) throw MalformedContext("CPID must be a string");
    out.push_back(Cpid::from_string(v.get<std::string>()));
  }
  return out;
}

Mergelog mergelog_from_json(const json& j) {
  Mergelog log{Cpid::from_string(string_field(j, "new_cpid")),
               cpids_from_json(field(j, "source_cpids")), time_field(j, "timestamp")};
  validate_mergelog(log);
  return log;
}

Span span_from_json(const json& j) {
  Span span{Cpid::from_string(string_field(j, "cpid")),
            string_field(j, "span_id"),
            std::nullopt,
            string_field(j, "service"),
            string_field(j, "name"),
            time_field(j, "start_time"),
            time_field(j, "end_time")};
  if (!is_uuid_v4(span.span_id)) throw MalformedContext("span_id must be a UUIDv4");
  if (const auto it = j.find("parent_id"); it != j.end() && !it->is_null()) {
    if (!it->is_string() || !is_uuid_v4(it->get<std::string>()))
      throw MalformedContext("parent_id must be null or a UUIDv4");
    span.parent_id = it->get<std::string>();
  }
  if (span.end_time < span.start_time) throw MalformedContext("span ends before it starts");
  return span;
}

GraphSnapshot graph_from_json(const json& j) {
  GraphSnapshot snap;
  for (const auto& n : field(j, "nodes")) {
    const json& flag = field(n, "merge_created");
    if (!flag.is_boolean()) throw MalformedContext("merge_created must be a boolean");
    snap.nodes.push_back(
        GraphNode{Cpid::from_string(string_field(n, "cpid")), time_field(n, "timestamp"), flag.get<bool>()});
  }
  for (const auto& e : field(j, "edges")) {
    snap.edges.push_back(
        GraphEdge{Cpid::from_string(string_field(e, "from")), Cpid::from_string(string_field(e, "to"))});
  }
  return snap;
}

}  // namespace cascade_trace
