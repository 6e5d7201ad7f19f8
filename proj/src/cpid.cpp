#include "cascade_trace/cpid.hpp"

#include <array>

#include "cascade_trace/error.hpp"

namespace cascade_trace {

namespace {

constexpr bool is_lower_hex(char c) noexcept {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
}

}  // namespace

bool is_uuid_v4(std::string_view text) noexcept {
  if (text.size() != 36) return false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const bool hyphen_pos = i == 8 || i == 13 || i == 18 || i == 23;
    if (hyphen_pos ? text[i] != '-' : !is_lower_hex(text[i])) return false;
  }
  return text[14] == '4';
}

std::optional<Cpid> Cpid::parse(std::string_view text) {
  if (!is_uuid_v4(text)) return std::nullopt;
  return Cpid(std::string(text));
}

Cpid Cpid::from_string(std::string_view text) {
  auto parsed = parse(text);
  if (!parsed) throw MalformedContext("not a UUIDv4 CPID: '" + std::string(text) + "'");
  return *std::move(parsed);
}

UuidGenerator::UuidGenerator() {
  std::random_device rd;
  std::seed_seq seq{rd(), rd(), rd(), rd(), rd(), rd(), rd(), rd()};
  engine_.seed(seq);
}

UuidGenerator::UuidGenerator(std::uint64_t seed) : engine_(seed) {}

std::string UuidGenerator::next_string() {
  std::array<std::uint8_t, 16> bytes{};
  {
    std::lock_guard lock(mutex_);
    const std::uint64_t hi = engine_();
    const std::uint64_t lo = engine_();
    for (int i = 0; i < 8; ++i) {
      bytes[i] = static_cast<std::uint8_t>(hi >> (56 - 8 * i));
      bytes[8 + i] = static_cast<std::uint8_t>(lo >> (56 - 8 * i));
    }
  }
  bytes[6] = static_cast<std::uint8_t>((bytes[6] & 0x0f) | 0x40);
  bytes[8] = static_cast<std::uint8_t>((bytes[8] & 0x3f) | 0x80);

  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(36);
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    if (i == 4 || i == 6 || i == 8 || i == 10) out.push_back('-');
    out.push_back(kHex[bytes[i] >> 4]);
    out.push_back(kHex[bytes[i] & 0x0f]);
  }
  return out;
}

Cpid UuidGenerator::next_cpid() { return Cpid::from_string(next_string()); }

}  // namespace cascade_trace
