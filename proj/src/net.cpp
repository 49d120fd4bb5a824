#include "icsscope/net.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>

namespace icsscope {

namespace {

std::optional<std::uint32_t> parse_uint(std::string_view text, std::uint32_t max) {
  if (text.empty() || text.size() > 10) return std::nullopt;
  std::uint32_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || v > max) return std::nullopt;
  return v;
}

}  // namespace

std::optional<Ipv4> Ipv4::parse(std::string_view text) {
  std::uint32_t value = 0;
  for (int i = 0; i < 4; ++i) {
    auto dot = text.find('.');
    if ((i < 3) == (dot == std::string_view::npos)) return std::nullopt;
    auto part = parse_uint(text.substr(0, dot), 255);
    if (!part) return std::nullopt;
    value = (value << 8) | *part;
    text = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
  }
  return Ipv4{value};
}

std::string Ipv4::str() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%u.%u.%u.%u", value >> 24, (value >> 16) & 0xFF, (value >> 8) & 0xFF,
                value & 0xFF);
  return buf;
}

std::optional<Cidr> Cidr::parse(std::string_view text) {
  auto slash = text.find('/');
  auto ip = Ipv4::parse(text.substr(0, slash));
  if (!ip) return std::nullopt;
  std::uint8_t len = 32;
  if (slash != std::string_view::npos) {
    auto l = parse_uint(text.substr(slash + 1), 32);
    if (!l) return std::nullopt;
    len = static_cast<std::uint8_t>(*l);
  }
  if ((ip->value & ~mask_of(len)) != 0) return std::nullopt;
  return Cidr{*ip, len};
}

std::string Cidr::str() const { return base.str() + "/" + std::to_string(length); }

std::string format_day(Day day) {
  using namespace std::chrono;
  year_month_day ymd{sys_days{days{day}}};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::optional<Day> parse_day(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  auto y = parse_uint(text.substr(0, 4), 9999);
  auto m = parse_uint(text.substr(5, 2), 12);
  auto d = parse_uint(text.substr(8, 2), 31);
  if (!y || !m || !d) return std::nullopt;
  using namespace std::chrono;
  year_month_day ymd{year{static_cast<int>(*y)}, month{*m}, day{*d}};
  if (!ymd.ok()) return std::nullopt;
  return static_cast<Day>(sys_days{ymd}.time_since_epoch().count());
}

std::string to_lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(c >= 'A' && c <= 'Z' ? c + 32 : c); });
  return out;
}

}  // namespace icsscope
