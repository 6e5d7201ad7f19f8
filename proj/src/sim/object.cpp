#include "cascade_trace/sim/object.hpp"

#include <array>

namespace cascade_trace::sim {

namespace {

constexpr std::array<std::string_view, 5> kKindNames = {"Deployment", "ReplicaSet", "Pod", "Service",
                                                         "Endpoints"};

}  // namespace

std::string_view to_string(Kind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

std::optional<Kind> kind_from_string(std::string_view text) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == text) return static_cast<Kind>(i);
  }
  return std::nullopt;
}

std::string_view to_string(PodPhase phase) {
  switch (phase) {
    case PodPhase::Pending: return "Pending";
    case PodPhase::Scheduled: return "Scheduled";
    case PodPhase::Ready: return "Ready";
  }
  return "Unknown";
}

std::string replicaset_name(std::string_view deployment) { return std::string(deployment) + "-rs"; }

}  // namespace cascade_trace::sim
