#include "cascade_trace/sim/log_sink.hpp"

#include <stdexcept>

namespace cascade_trace::sim {

using nlohmann::json;

json to_json(const LogRecord& record) {
  json j = json::object();
  for (const auto& [k, v] : record.fields) j[k] = v;
  j["ts"] = format_rfc3339(record.ts, TimePrecision::Microseconds);
  j["controller"] = record.controller;
  j["cpid"] = record.cpid;
  j["msg"] = record.msg;
  return j;
}

LogRecord log_record_from_json(const json& j) {
  LogRecord r{parse_rfc3339(j.at("ts").get<std::string>()), j.at("controller").get<std::string>(),
              j.at("cpid").get<std::string>(), j.at("msg").get<std::string>(), {}};
  for (const auto& [k, v] : j.items()) {
    if (k == "ts" || k == "controller" || k == "cpid" || k == "msg") continue;
    r.fields.emplace(k, v.is_string() ? v.get<std::string>() : v.dump());
  }
  return r;
}

JsonlLogWriter::JsonlLogWriter(const std::string& path) : out_(path, std::ios::app) {
  if (!out_) throw std::runtime_error("cannot open log file '" + path + "'");
}

void JsonlLogWriter::write(const LogRecord& record) {
  const std::string line = to_json(record).dump();
  std::lock_guard lock(mutex_);
  out_ << line << '\n';
  out_.flush();
}

void MemoryLogSink::write(const LogRecord& record) {
  std::lock_guard lock(mutex_);
  records_.push_back(record);
}

std::vector<LogRecord> MemoryLogSink::records() const {
  std::lock_guard lock(mutex_);
  return records_;
}

std::vector<LogRecord> read_log_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open log file '" + path + "'");
  std::vector<LogRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(log_record_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace cascade_trace::sim
