#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "icsscope/capture.hpp"
#include "icsscope/net.hpp"
#include "icsscope/protocol.hpp"

namespace icsscope {

// Packets on the wire represented by `count` sampled packets.
constexpr double extrapolate(std::uint64_t count, std::uint64_t sample_interval) {
  return static_cast<double>(count) * static_cast<double>(sample_interval);
}

/// Request/reply/unrelated counts per protocol.
class RequestShare {
 public:
  struct Counts {
    std::uint64_t requests{0};
    std::uint64_t replies{0};
    std::uint64_t unrelated{0};
    std::uint64_t total() const { return requests + replies + unrelated; }
    // requests / (requests + replies); nullopt when both are zero.
    std::optional<double> share() const;
  };

  void add(ProtocolId protocol, Direction d);
  RequestShare& operator+=(const RequestShare& o);
  const std::map<ProtocolId, Counts>& by_protocol() const { return counts_; }

 private:
  std::map<ProtocolId, Counts> counts_;
};

struct HostActivity {
  Ipv4 ip;
  Day first_day{0};
  Day last_day{0};
  std::uint32_t window{0};       // w: last - first + 1 (inclusive)
  std::uint32_t active_days{0};  // n

  double stability_ratio() const { return window == 0 ? 0.0 : static_cast<double>(active_days) / window; }
  bool operator==(const HostActivity&) const = default;
};

/// Collects the UTC days on which each host was seen.
class HostActivityTracker {
 public:
  void add(Ipv4 ip, std::int64_t ts_us) { days_[ip.value].insert(day_of(ts_us)); }
  void add_day(Ipv4 ip, Day day) { days_[ip.value].insert(day); }
  HostActivityTracker& operator+=(const HostActivityTracker& o);
  const std::map<std::uint32_t, std::set<Day>>& days() const { return days_; }

 private:
  std::map<std::uint32_t, std::set<Day>> days_;
};

// (w, n) per host, sorted by n descending, then by address.
std::vector<HostActivity> host_stability(const HostActivityTracker& tracker);
HostActivity host_activity(Ipv4 ip, const std::set<Day>& days);

// Descending by packet count; ties by protocol name.
std::vector<std::pair<ProtocolId, std::uint64_t>> protocol_rank(const std::map<ProtocolId, std::uint64_t>& counts);

enum class SeriesLabel : std::uint8_t { Total, Industrial };
std::string_view series_label_name(SeriesLabel l);

/// Daily packet counts per (vantage, protocol, label).
class DailySeries {
 public:
  using Key = std::tuple<std::string, ProtocolId, SeriesLabel>;

  struct Point {
    Day day;
    std::uint64_t count;
    double extrapolated;
  };

  void set_sample_interval(const std::string& vantage, std::uint64_t interval) { intervals_[vantage] = interval; }
  // Counts the packet in the total series, and in the industrial one when `industrial`.
  void add(const std::string& vantage, ProtocolId protocol, std::int64_t ts_us, bool industrial);
  DailySeries& operator+=(const DailySeries& o);

  bool empty() const { return counts_.empty(); }
  // Every series spans the same contiguous day range, zero-filled.
  std::map<Key, std::vector<Point>> render() const;
  std::uint64_t total(const Key& key) const;

 private:
  std::map<Key, std::map<Day, std::uint64_t>> counts_;
  std::map<std::string, std::uint64_t> intervals_;
};

}  // namespace icsscope
