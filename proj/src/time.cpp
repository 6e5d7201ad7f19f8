#include "cascade_trace/time.hpp"

#include <charconv>
#include <cstdio>
#include <stdexcept>

namespace cascade_trace {

namespace {

using namespace std::chrono;

int parse_int(std::string_view text, std::size_t pos, std::size_t len) {
  if (pos + len > text.size()) throw std::invalid_argument("truncated timestamp");
  int value = 0;
  for (std::size_t i = pos; i < pos + len; ++i) {
    const char c = text[i];
    if (c < '0' || c > '9') throw std::invalid_argument("bad digit in timestamp");
    value = value * 10 + (c - '0');
  }
  return value;
}

void expect(std::string_view text, std::size_t pos, char c) {
  if (pos >= text.size() || text[pos] != c)
    throw std::invalid_argument(std::string("expected '") + c + "' in timestamp");
}

}  // namespace

std::string format_rfc3339(Timestamp t, TimePrecision precision) {
  const auto day = floor<days>(t);
  const year_month_day ymd{day};
  const hh_mm_ss hms{t - day};
  char buf[40];
  const long long micros = hms.subseconds().count();
  if (precision == TimePrecision::Milliseconds) {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02lld.%03lldZ",
                  static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()), static_cast<long>(hms.hours().count()),
                  static_cast<long>(hms.minutes().count()),
                  static_cast<long long>(hms.seconds().count()), micros / 1000);
  } else {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02lld.%06lldZ",
                  static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()), static_cast<long>(hms.hours().count()),
                  static_cast<long>(hms.minutes().count()),
                  static_cast<long long>(hms.seconds().count()), micros);
  }
  return buf;
}

Timestamp parse_rfc3339(std::string_view text) {
  const int y = parse_int(text, 0, 4);
  expect(text, 4, '-');
  const int mo = parse_int(text, 5, 2);
  expect(text, 7, '-');
  const int d = parse_int(text, 8, 2);
  if (text.size() <= 10 || (text[10] != 'T' && text[10] != 't' && text[10] != ' '))
    throw std::invalid_argument("expected 'T' in timestamp");
  const int h = parse_int(text, 11, 2);
  expect(text, 13, ':');
  const int mi = parse_int(text, 14, 2);
  expect(text, 16, ':');
  const int s = parse_int(text, 17, 2);

  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 60) throw std::invalid_argument("timestamp out of range");

  std::size_t pos = 19;
  long long micros = 0;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    int digits = 0;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
      if (digits < 6) micros = micros * 10 + (text[pos] - '0');
      ++digits;
      ++pos;
    }
    if (digits == 0) throw std::invalid_argument("empty fraction in timestamp");
    for (int i = digits; i < 6; ++i) micros *= 10;
  }

  long long offset_minutes = 0;
  if (pos < text.size() && (text[pos] == 'Z' || text[pos] == 'z')) {
    ++pos;
  } else if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
    const int sign = text[pos] == '-' ? -1 : 1;
    const int oh = parse_int(text, pos + 1, 2);
    expect(text, pos + 3, ':');
    const int om = parse_int(text, pos + 4, 2);
    offset_minutes = sign * (oh * 60 + om);
    pos += 6;
  } else {
    throw std::invalid_argument("missing timezone in timestamp");
  }
  if (pos != text.size()) throw std::invalid_argument("trailing characters in timestamp");

  const auto local = sys_days{ymd} + hours{h} + minutes{mi} + seconds{s} + microseconds{micros};
  return time_point_cast<microseconds>(local - minutes{offset_minutes});
}

Timestamp SystemClock::now() { return time_point_cast<microseconds>(system_clock::now()); }

LogicalClock::LogicalClock(Timestamp start) : micros_(start.time_since_epoch().count()) {}

// 2024-01-01T00:00:00Z
LogicalClock::LogicalClock() : LogicalClock(Timestamp{sys_days{year{2024} / 1 / 1}}) {}

void LogicalClock::advance_to(Timestamp t) {
  long long target = t.time_since_epoch().count();
  long long cur = micros_.load();
  while (cur < target && !micros_.compare_exchange_weak(cur, target)) {
  }
}

}  // namespace cascade_trace
