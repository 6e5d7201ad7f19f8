#include "cascade_trace/graph_export.hpp"

#include <sstream>

namespace cascade_trace {

std::string to_dot(const GraphSnapshot& graph) {
  std::ostringstream os;
  os << "digraph merge_graph {\n";
  for (const auto& n : graph.nodes) {
    os << "  \"" << n.cpid.str() << "\" [shape=" << (n.merge_created ? "box" : "ellipse") << "];\n";
  }
  for (const auto& e : graph.edges) os << "  \"" << e.from.str() << "\" -> \"" << e.to.str() << "\";\n";
  os << "}\n";
  return os.str();
}

}  // namespace cascade_trace
