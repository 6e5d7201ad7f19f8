#pragma once

#include <json.hpp>

#include "cascade_trace/merge_graph.hpp"
#include "cascade_trace/trace_context.hpp"

namespace cascade_trace {

// Wire encodings used by the trace server. Decoders throw MalformedContext on
// schema violations (wrong types, missing keys, bad UUIDs or timestamps).

nlohmann::json to_json(const Mergelog& log);
nlohmann::json to_json(const Span& span);
nlohmann::json to_json(const GraphSnapshot& graph);

Mergelog mergelog_from_json(const nlohmann::json& j);
Span span_from_json(const nlohmann::json& j);
GraphSnapshot graph_from_json(const nlohmann::json& j);

nlohmann::json to_json(const std::vector<Cpid>& cpids);
std::vector<Cpid> cpids_from_json(const nlohmann::json& j);

}  // namespace cascade_trace
