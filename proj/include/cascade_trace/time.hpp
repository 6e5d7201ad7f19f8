#pragma once

#include <atomic>
#include <chrono>
#include <string>
#include <string_view>

namespace cascade_trace {

using Timestamp = std::chrono::sys_time<std::chrono::microseconds>;

enum class TimePrecision { Milliseconds, Microseconds };

/// RFC 3339 UTC rendering, e.g. "2024-01-01T00:00:00.123Z".
std::string format_rfc3339(Timestamp t, TimePrecision precision);

/// Accepts "Z" or a numeric offset and any number of fractional digits
/// (truncated to microseconds). Throws std::invalid_argument on bad input.
Timestamp parse_rfc3339(std::string_view text);

class Clock {
 public:
  virtual ~Clock() = default;
  virtual Timestamp now() = 0;
};

class SystemClock final : public Clock {
 public:
  Timestamp now() override;
};

/// Manually advanced clock used by the deterministic simulator.
class LogicalClock final : public Clock {
 public:
  explicit LogicalClock(Timestamp start);
  LogicalClock();

  Timestamp now() override { return Timestamp{std::chrono::microseconds{micros_.load()}}; }
  void advance(std::chrono::microseconds d) { micros_ += d.count(); }
  void advance_to(Timestamp t);

 private:
  std::atomic<long long> micros_;
};

}  // namespace cascade_trace
