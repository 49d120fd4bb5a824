#include "icsscope/classifier.hpp"

#include <spdlog/spdlog.h>

#include <fstream>
#include <json.hpp>

namespace icsscope {

void ScannerRegistry::add(Entry entry) {
  if (entry.project.empty()) throw ConfigError("scanner registry entry with empty project name");
  std::size_t index = entries_.size();
  for (const auto& prefix : entry.prefixes) {
    if (!prefixes_.contains_prefix(prefix)) prefixes_.insert(prefix, index);
  }
  for (auto& p : entry.rdns_patterns) p = to_lower(p);
  entries_.push_back(std::move(entry));
}

ScannerRegistry ScannerRegistry::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scanner registry: " + path.string());
  ScannerRegistry registry;
  try {
    auto doc = nlohmann::json::parse(in);
    for (const auto& item : doc) {
      Entry e;
      e.project = item.at("project").get<std::string>();
      for (const auto& p : item.value("prefixes", nlohmann::json::array())) {
        auto cidr = Cidr::parse(p.get<std::string>());
        if (!cidr) throw ConfigError("invalid prefix '" + p.get<std::string>() + "' in " + path.string());
        e.prefixes.push_back(*cidr);
      }
      for (const auto& r : item.value("rdns_patterns", nlohmann::json::array())) {
        e.rdns_patterns.push_back(r.get<std::string>());
      }
      registry.add(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("invalid scanner registry " + path.string() + ": " + e.what());
  }
  return registry;
}

std::optional<std::string> ScannerRegistry::match_prefix(Ipv4 ip) const {
  if (auto idx = prefixes_.lookup(ip)) return entries_[*idx].project;
  return std::nullopt;
}

std::optional<std::string> ScannerRegistry::match_name(std::string_view fqdn) const {
  auto name = to_lower(fqdn);
  for (const auto& e : entries_) {
    for (const auto& pattern : e.rdns_patterns) {
      if (!pattern.empty() && name.find(pattern) != std::string::npos) return e.project;
    }
  }
  return std::nullopt;
}

void RdnsTable::add(Ipv4 ip, std::string name) { names_[ip.value] = std::move(name); }

const std::string* RdnsTable::lookup(Ipv4 ip) const {
  auto it = names_.find(ip.value);
  return it == names_.end() ? nullptr : &it->second;
}

RdnsTable RdnsTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open rDNS snapshot: " + path.string());
  RdnsTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto comma = line.find(',');
    if (comma == std::string::npos) throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected ip,name");
    auto ip = Ipv4::parse(line.substr(0, comma));
    if (!ip) {
      if (lineno == 1) continue;  // header
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": bad IPv4 address");
    }
    table.add(*ip, line.substr(comma + 1));
  }
  return table;
}

std::optional<std::string> match_scanner_prefix(Ipv4 ip, const ScannerRegistry& registry) {
  return registry.match_prefix(ip);
}

std::optional<std::string> match_scanner_rdns(Ipv4 ip, const RdnsTable& rdns, const ScannerRegistry& registry) {
  const auto* name = rdns.lookup(ip);
  if (!name) return std::nullopt;
  return registry.match_name(*name);
}

namespace {

std::unordered_set<std::uint32_t> load_ip_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open honeypot list: " + path.string());
  std::unordered_set<std::uint32_t> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto ip = Ipv4::parse(line);
    if (!ip) throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": bad IPv4 address");
    out.insert(ip->value);
  }
  return out;
}

}  // namespace

void HoneypotSets::validate() const {
  for (auto ip : hp_ics) {
    if (!hp_all.count(ip)) {
      throw ConfigError("honeypot ICS list is not a subset of the full list: " + Ipv4{ip}.str() + " missing");
    }
  }
}

HoneypotSets HoneypotSets::load(const std::filesystem::path& all_path, const std::filesystem::path& ics_path) {
  HoneypotSets sets{load_ip_list(all_path), load_ip_list(ics_path)};
  sets.validate();
  return sets;
}

std::string Reason::str() const {
  switch (kind) {
    case ReasonKind::ScannerPrefix: return "ScannerPrefix(" + project + ")";
    case ReasonKind::ScannerRdns: return "ScannerRdns(" + project + ")";
    case ReasonKind::HoneypotAll: return "HoneypotAll";
    case ReasonKind::HoneypotIcs: return "HoneypotIcs";
  }
  return "?";
}

std::optional<Reason> Reason::parse(std::string_view text) {
  if (text == "HoneypotAll") return Reason{ReasonKind::HoneypotAll, {}};
  if (text == "HoneypotIcs") return Reason{ReasonKind::HoneypotIcs, {}};
  auto open = text.find('(');
  if (open == std::string_view::npos || text.back() != ')') return std::nullopt;
  auto head = text.substr(0, open);
  std::string project(text.substr(open + 1, text.size() - open - 2));
  if (head == "ScannerPrefix") return Reason{ReasonKind::ScannerPrefix, project};
  if (head == "ScannerRdns") return Reason{ReasonKind::ScannerRdns, project};
  return std::nullopt;
}

std::string_view label_name(Label l) { return l == Label::Industrial ? "Industrial" : "NonIndustrial"; }

std::optional<FilterSet> FilterSet::parse(std::string_view name) {
  if (name == "scanners") return scanners_only();
  if (name == "hp-ics") return honeypot_ics();
  if (name == "hp-all") return honeypot_all();
  if (name == "all") return all();
  return std::nullopt;
}

TrafficClass classify(const PacketRecord& record, const ClassifierContext& ctx, FilterSet filters) {
  TrafficClass tc;
  for (Ipv4 ip : {record.src_ip, record.dst_ip}) {
    if (filters.scanners && ctx.registry) {
      if (auto p = ctx.registry->match_prefix(ip)) tc.reasons.insert({ReasonKind::ScannerPrefix, *p});
      if (ctx.rdns) {
        if (auto p = match_scanner_rdns(ip, *ctx.rdns, *ctx.registry)) tc.reasons.insert({ReasonKind::ScannerRdns, *p});
      }
    }
    if (ctx.honeypots) {
      if (filters.hp_all && ctx.honeypots->hp_all.count(ip.value)) tc.reasons.insert({ReasonKind::HoneypotAll, {}});
      if (filters.hp_ics && ctx.honeypots->hp_ics.count(ip.value)) tc.reasons.insert({ReasonKind::HoneypotIcs, {}});
    }
  }
  tc.label = tc.reasons.empty() ? Label::Industrial : Label::NonIndustrial;
  return tc;
}

FilterReport::Row& FilterReport::Row::operator+=(const Row& o) {
  total += o.total;
  requests += o.requests;
  replies += o.replies;
  for (std::size_t i = 0; i < industrial.size(); ++i) industrial[i] += o.industrial[i];
  return *this;
}

std::optional<double> FilterReport::Row::request_share() const {
  if (requests + replies == 0) return std::nullopt;
  return static_cast<double>(requests) / static_cast<double>(requests + replies);
}

double FilterReport::Row::industrial_pct(std::size_t family) const {
  if (total == 0) return 100.0;
  return 100.0 * static_cast<double>(industrial[family]) / static_cast<double>(total);
}

void FilterReport::add(ProtocolId protocol, Direction direction, const std::array<bool, 4>& industrial_by_family) {
  auto& row = rows_[protocol];
  ++row.total;
  if (direction == Direction::Request) ++row.requests;
  if (direction == Direction::Reply) ++row.replies;
  for (std::size_t i = 0; i < 4; ++i) row.industrial[i] += industrial_by_family[i] ? 1 : 0;
}

void FilterReport::add(const PacketRecord& record, const Dissection& dissection, Direction direction,
                       const ClassifierContext& ctx) {
  std::array<bool, 4> industrial{};
  for (std::size_t i = 0; i < kFamilies.size(); ++i) {
    industrial[i] = classify(record, ctx, kFamilies[i]).label == Label::Industrial;
  }
  add(dissection.protocol, direction, industrial);
}

FilterReport& FilterReport::operator+=(const FilterReport& o) {
  for (const auto& [p, row] : o.rows_) rows_[p] += row;
  return *this;
}

FilterReport::Row FilterReport::total() const {
  Row t;
  for (const auto& [_, row] : rows_) t += row;
  return t;
}

}  // namespace icsscope
