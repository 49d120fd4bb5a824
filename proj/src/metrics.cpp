#include "icsscope/metrics.hpp"

#include <algorithm>
#include <limits>

namespace icsscope {

std::optional<double> RequestShare::Counts::share() const {
  if (requests + replies == 0) return std::nullopt;
  return static_cast<double>(requests) / static_cast<double>(requests + replies);
}

void RequestShare::add(ProtocolId protocol, Direction d) {
  auto& c = counts_[protocol];
  switch (d) {
    case Direction::Request: ++c.requests; break;
    case Direction::Reply: ++c.replies; break;
    case Direction::Unrelated: ++c.unrelated; break;
  }
}

RequestShare& RequestShare::operator+=(const RequestShare& o) {
  for (const auto& [p, c] : o.counts_) {
    auto& mine = counts_[p];
    mine.requests += c.requests;
    mine.replies += c.replies;
    mine.unrelated += c.unrelated;
  }
  return *this;
}

HostActivityTracker& HostActivityTracker::operator+=(const HostActivityTracker& o) {
  for (const auto& [ip, days] : o.days_) days_[ip].insert(days.begin(), days.end());
  return *this;
}

HostActivity host_activity(Ipv4 ip, const std::set<Day>& days) {
  HostActivity h;
  h.ip = ip;
  if (days.empty()) return h;
  h.first_day = *days.begin();
  h.last_day = *days.rbegin();
  h.window = static_cast<std::uint32_t>(h.last_day - h.first_day + 1);
  h.active_days = static_cast<std::uint32_t>(days.size());
  return h;
}

std::vector<HostActivity> host_stability(const HostActivityTracker& tracker) {
  std::vector<HostActivity> out;
  out.reserve(tracker.days().size());
  for (const auto& [ip, days] : tracker.days()) out.push_back(host_activity(Ipv4{ip}, days));
  std::stable_sort(out.begin(), out.end(), [](const HostActivity& a, const HostActivity& b) {
    if (a.active_days != b.active_days) return a.active_days > b.active_days;
    return a.ip < b.ip;
  });
  return out;
}

std::vector<std::pair<ProtocolId, std::uint64_t>> protocol_rank(const std::map<ProtocolId, std::uint64_t>& counts) {
  std::vector<std::pair<ProtocolId, std::uint64_t>> out(counts.begin(), counts.end());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return protocol_name(a.first) < protocol_name(b.first);
  });
  return out;
}

std::string_view series_label_name(SeriesLabel l) { return l == SeriesLabel::Total ? "total" : "industrial"; }

void DailySeries::add(const std::string& vantage, ProtocolId protocol, std::int64_t ts_us, bool industrial) {
  Day day = day_of(ts_us);
  ++counts_[{vantage, protocol, SeriesLabel::Total}][day];
  auto& ind = counts_[{vantage, protocol, SeriesLabel::Industrial}];
  if (industrial) ++ind[day];
}

DailySeries& DailySeries::operator+=(const DailySeries& o) {
  for (const auto& [key, days] : o.counts_) {
    auto& mine = counts_[key];
    for (const auto& [d, c] : days) mine[d] += c;
  }
  for (const auto& [v, i] : o.intervals_) intervals_[v] = i;
  return *this;
}

std::map<DailySeries::Key, std::vector<DailySeries::Point>> DailySeries::render() const {
  std::map<Key, std::vector<Point>> out;
  Day lo = std::numeric_limits<Day>::max();
  Day hi = std::numeric_limits<Day>::min();
  for (const auto& [_, days] : counts_) {
    if (days.empty()) continue;
    lo = std::min(lo, days.begin()->first);
    hi = std::max(hi, days.rbegin()->first);
  }
  if (lo > hi) return out;
  for (const auto& [key, days] : counts_) {
    auto it = intervals_.find(std::get<0>(key));
    std::uint64_t interval = it == intervals_.end() ? 1 : it->second;
    auto& series = out[key];
    series.reserve(static_cast<std::size_t>(hi - lo + 1));
    for (Day d = lo; d <= hi; ++d) {
      auto c = days.find(d);
      std::uint64_t count = c == days.end() ? 0 : c->second;
      series.push_back({d, count, extrapolate(count, interval)});
    }
  }
  return out;
}

std::uint64_t DailySeries::total(const Key& key) const {
  auto it = counts_.find(key);
  if (it == counts_.end()) return 0;
  std::uint64_t t = 0;
  for (const auto& [_, c] : it->second) t += c;
  return t;
}

}  // namespace icsscope
