#pragma once

#include <fstream>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "cascade_trace/time.hpp"

namespace cascade_trace::sim {

/// A controller log line. `cpid` is empty for untraced processing.
struct LogRecord {
  Timestamp ts;
  std::string controller;
  std::string cpid;
  std::string msg;
  std::map<std::string, std::string> fields;

  friend bool operator==(const LogRecord&, const LogRecord&) = default;
};

/// JSON Lines encoding: {"ts", "controller", "cpid", "msg", ...fields}.
nlohmann::json to_json(const LogRecord& record);
LogRecord log_record_from_json(const nlohmann::json& j);

class LogSink {
 public:
  virtual ~LogSink() = default;
  virtual void write(const LogRecord& record) = 0;
};

/// Appends one JSON object per line. Thread-safe.
class JsonlLogWriter final : public LogSink {
 public:
  explicit JsonlLogWriter(const std::string& path);
  void write(const LogRecord& record) override;

 private:
  std::mutex mutex_;
  std::ofstream out_;
};

class MemoryLogSink final : public LogSink {
 public:
  void write(const LogRecord& record) override;
  std::vector<LogRecord> records() const;

 private:
  mutable std::mutex mutex_;
  std::vector<LogRecord> records_;
};

/// Reads a JSON Lines log file; blank lines are skipped. Throws std::runtime_error
/// when the file cannot be opened or a line does not parse.
std::vector<LogRecord> read_log_file(const std::string& path);

}  // namespace cascade_trace::sim
