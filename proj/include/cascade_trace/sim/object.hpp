#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cascade_trace/trace_context.hpp"

namespace cascade_trace::sim {

enum class Kind { Deployment, ReplicaSet, Pod, Service, Endpoints };

std::string_view to_string(Kind kind);
std::optional<Kind> kind_from_string(std::string_view text);

enum class PodPhase { Pending, Scheduled, Ready };

std::string_view to_string(PodPhase phase);

struct DeploymentSpec {
  int replicas = 0;
  std::string template_label;
  int ready_replicas = 0;  // status

  friend bool operator==(const DeploymentSpec&, const DeploymentSpec&) = default;
};

struct ReplicaSetSpec {
  int replicas = 0;
  std::string owner;
  std::string template_label;
  int ready_replicas = 0;  // status

  friend bool operator==(const ReplicaSetSpec&, const ReplicaSetSpec&) = default;
};

struct PodSpec {
  std::string owner;
  std::string label;
  std::optional<std::string> node_name;
  PodPhase phase = PodPhase::Pending;

  friend bool operator==(const PodSpec&, const PodSpec&) = default;
};

struct ServiceSpec {
  std::string selector;

  friend bool operator==(const ServiceSpec&, const ServiceSpec&) = default;
};

struct EndpointsSpec {
  std::vector<std::string> ready_pods;  // sorted

  friend bool operator==(const EndpointsSpec&, const EndpointsSpec&) = default;
};

// Variant order matches Kind.
using ObjectSpec = std::variant<DeploymentSpec, ReplicaSetSpec, PodSpec, ServiceSpec, EndpointsSpec>;

struct SimObject {
  std::string name;
  ObjectSpec spec;
  Annotations annotations;
  std::uint64_t resource_version = 0;

  Kind kind() const { return static_cast<Kind>(spec.index()); }

  template <typename T>
  T& as() { return std::get<T>(spec); }
  template <typename T>
  const T& as() const { return std::get<T>(spec); }

  friend bool operator==(const SimObject&, const SimObject&) = default;
};

struct ObjectKey {
  Kind kind;
  std::string name;

  friend auto operator<=>(const ObjectKey&, const ObjectKey&) = default;
};

enum class EventType { Added, Modified, Deleted };

struct WatchEvent {
  EventType type;
  SimObject object;
};

/// Name of the single ReplicaSet a Deployment owns.
std::string replicaset_name(std::string_view deployment);

}  // namespace cascade_trace::sim
