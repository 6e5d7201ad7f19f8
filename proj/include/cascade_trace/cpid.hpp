#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <string_view>

namespace cascade_trace {

/// True for the canonical 8-4-4-4-12 lowercase hex layout with version nibble 4.
bool is_uuid_v4(std::string_view text) noexcept;

/// Change propagation identifier. Always holds a valid UUIDv4 string.
class Cpid {
 public:
  static std::optional<Cpid> parse(std::string_view text);
  /// Throws MalformedContext on invalid input.
  static Cpid from_string(std::string_view text);

  const std::string& str() const noexcept { return value_; }

  friend bool operator==(const Cpid&, const Cpid&) = default;
  friend auto operator<=>(const Cpid&, const Cpid&) = default;

 private:
  explicit Cpid(std::string value) : value_(std::move(value)) {}
  std::string value_;
};

/// UUIDv4 source shared by controllers. Seeded from std::random_device unless
/// an explicit seed is given (deterministic runs and tests).
class UuidGenerator {
 public:
  UuidGenerator();
  explicit UuidGenerator(std::uint64_t seed);

  std::string next_string();
  Cpid next_cpid();

 private:
  std::mutex mutex_;
  std::mt19937_64 engine_;
};

}  // namespace cascade_trace

template <>
struct std::hash<cascade_trace::Cpid> {
  std::size_t operator()(const cascade_trace::Cpid& c) const noexcept {
    return std::hash<std::string>{}(c.str());
  }
};
