#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace icsscope {

// Thrown for unreadable or inconsistent configuration and sidecar files.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Ipv4 {
  std::uint32_t value{0};

  constexpr Ipv4() = default;
  constexpr explicit Ipv4(std::uint32_t v) : value(v) {}
  constexpr Ipv4(std::uint8_t a, std::uint8_t b, std::uint8_t c, std::uint8_t d)
      : value((std::uint32_t{a} << 24) | (std::uint32_t{b} << 16) | (std::uint32_t{c} << 8) | d) {}

  auto operator<=>(const Ipv4&) const = default;

  static std::optional<Ipv4> parse(std::string_view text);
  std::string str() const;
};

struct Cidr {
  Ipv4 base;
  std::uint8_t length{32};

  auto operator<=>(const Cidr&) const = default;

  static constexpr std::uint32_t mask_of(std::uint8_t len) {
    return len == 0 ? 0u : ~std::uint32_t{0} << (32 - len);
  }
  constexpr std::uint32_t mask() const { return mask_of(length); }
  constexpr bool contains(Ipv4 ip) const { return (ip.value & mask()) == base.value; }
  constexpr std::uint64_t size() const { return std::uint64_t{1} << (32 - length); }
  constexpr Ipv4 at(std::uint64_t offset) const {
    return Ipv4{base.value + static_cast<std::uint32_t>(offset)};
  }

  // Accepts "a.b.c.d/len" or a bare address (treated as /32). Host bits must be zero.
  static std::optional<Cidr> parse(std::string_view text);
  std::string str() const;
};

// UTC calendar day, counted from 1970-01-01.
using Day = std::int32_t;

constexpr std::int64_t kMicrosPerDay = 86'400'000'000LL;

constexpr Day day_of(std::int64_t ts_us) {
  std::int64_t d = ts_us / kMicrosPerDay;
  if (ts_us % kMicrosPerDay < 0) --d;
  return static_cast<Day>(d);
}

std::string format_day(Day day);
std::optional<Day> parse_day(std::string_view text);

std::string to_lower(std::string_view text);

}  // namespace icsscope
