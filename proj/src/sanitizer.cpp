#include "icsscope/sanitizer.hpp"

#include <fstream>
#include <json.hpp>

namespace icsscope {

std::string_view sanitize_verdict_name(SanitizeVerdict v) {
  switch (v) {
    case SanitizeVerdict::Kept: return "Kept";
    case SanitizeVerdict::DroppedTunnel: return "DroppedTunnel";
    case SanitizeVerdict::DroppedMalformed: return "DroppedMalformed";
    case SanitizeVerdict::DroppedKnownProtocol: return "DroppedKnownProtocol";
  }
  return "?";
}

std::optional<SanitizeVerdict> sanitize_verdict_from_name(std::string_view s) {
  for (auto v : {SanitizeVerdict::Kept, SanitizeVerdict::DroppedTunnel, SanitizeVerdict::DroppedMalformed,
                 SanitizeVerdict::DroppedKnownProtocol}) {
    if (sanitize_verdict_name(v) == s) return v;
  }
  return std::nullopt;
}

namespace {

std::vector<std::uint8_t> parse_hex(const std::string& text, const std::string& origin) {
  std::vector<std::uint8_t> out;
  std::string digits;
  for (char c : text) {
    if (c != ' ' && c != ':') digits.push_back(c);
  }
  if (digits.size() % 2 != 0) throw ConfigError("odd-length hex string '" + text + "' in " + origin);
  for (std::size_t i = 0; i < digits.size(); i += 2) {
    out.push_back(static_cast<std::uint8_t>(std::stoul(digits.substr(i, 2), nullptr, 16)));
  }
  return out;
}

}  // namespace

void DpiCatalog::add(Signature sig) {
  if (sig.mask.empty()) sig.mask.assign(sig.prefix.size(), 0xFF);
  if (sig.mask.size() != sig.prefix.size()) throw ConfigError("signature '" + sig.name + "': mask/prefix length differ");
  signatures_.push_back(std::move(sig));
}

namespace {

DpiCatalog from_json(const nlohmann::json& doc, const std::string& origin, DpiCatalog catalog) {
  for (auto& entry : doc) {
    DpiCatalog::Signature sig;
    sig.name = entry.at("name").get<std::string>();
    auto transport = entry.value("transport", std::string{"any"});
    if (transport == "tcp") sig.transport = ipproto::kTcp;
    else if (transport == "udp") sig.transport = ipproto::kUdp;
    else if (transport != "any") throw ConfigError("bad transport '" + transport + "' in " + origin);
    if (entry.contains("port_hint") && !entry["port_hint"].is_null()) {
      sig.port_hint = entry["port_hint"].get<std::uint16_t>();
    }
    sig.prefix = parse_hex(entry.at("prefix_bytes").get<std::string>(), origin);
    if (entry.contains("mask")) sig.mask = parse_hex(entry["mask"].get<std::string>(), origin);
    catalog.add(std::move(sig));
  }
  return catalog;
}

constexpr std::string_view kBuiltinCatalog = R"([
  {"name": "HTTP", "transport": "tcp", "prefix_bytes": "47455420"},
  {"name": "HTTP", "transport": "tcp", "prefix_bytes": "504f5354"},
  {"name": "HTTP", "transport": "tcp", "prefix_bytes": "48454144"},
  {"name": "HTTP", "transport": "tcp", "prefix_bytes": "485454502f"},
  {"name": "TLS", "transport": "tcp", "prefix_bytes": "1603", "mask": "ffff"},
  {"name": "SSH", "transport": "tcp", "prefix_bytes": "5353482d"},
  {"name": "DNS", "transport": "udp", "port_hint": 53, "prefix_bytes": "000000000001", "mask": "00007800ffff"},
  {"name": "NTP", "transport": "udp", "port_hint": 123, "prefix_bytes": "1b"},
  {"name": "NTP", "transport": "udp", "port_hint": 123, "prefix_bytes": "23"},
  {"name": "SMTP", "transport": "tcp", "port_hint": 25, "prefix_bytes": "32323020"}
]
)";

}  // namespace

DpiCatalog DpiCatalog::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open DPI catalog: " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse(text, path.string());
}

DpiCatalog DpiCatalog::parse(std::string_view json_text, const std::string& origin) {
  try {
    return from_json(nlohmann::json::parse(json_text), origin, DpiCatalog{});
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("invalid DPI catalog " + origin + ": " + e.what());
  } catch (const std::logic_error& e) {
    throw ConfigError("invalid DPI catalog " + origin + ": " + e.what());
  }
}

DpiCatalog DpiCatalog::builtin() { return parse(kBuiltinCatalog, "builtin catalog"); }

std::string_view DpiCatalog::builtin_json() { return kBuiltinCatalog; }

std::optional<std::string> DpiCatalog::match(const PacketRecord& record) const {
  if (!record.has_ports()) return std::nullopt;
  auto dg = datagram_of(record);
  if (!dg) return std::nullopt;
  const auto& payload = dg->payload;
  for (const auto& sig : signatures_) {
    if (sig.transport && *sig.transport != record.ip_proto) continue;
    if (sig.port_hint && *sig.port_hint != record.src_port && *sig.port_hint != record.dst_port) continue;
    if (payload.size() < sig.prefix.size()) continue;
    bool hit = true;
    for (std::size_t i = 0; i < sig.prefix.size() && hit; ++i) {
      hit = (payload[i] & sig.mask[i]) == (sig.prefix[i] & sig.mask[i]);
    }
    if (hit) return sig.name;
  }
  return std::nullopt;
}

SanitizeVerdict strip_tunnels(const PacketRecord& record, const Dissection&) {
  if (record.ip_proto != ipproto::kIcmp) return SanitizeVerdict::Kept;
  auto dg = datagram_of(record);
  if (!dg || !dg->has_icmp_header) return SanitizeVerdict::Kept;
  if (dg->icmp_type != 3 && dg->icmp_type != 11 && dg->icmp_type != 12) return SanitizeVerdict::Kept;
  auto inner = parse_datagram(dg->payload);
  if (!inner || inner->payload.empty()) return SanitizeVerdict::Kept;
  return SanitizeVerdict::DroppedTunnel;
}

SanitizeVerdict drop_malformed(const Dissection& dissection) {
  return dissection.verdict == Verdict::Malformed ? SanitizeVerdict::DroppedMalformed : SanitizeVerdict::Kept;
}

SanitizeVerdict dpi_cross_check(const PacketRecord& record, const DpiCatalog& catalog) {
  return catalog.match(record) ? SanitizeVerdict::DroppedKnownProtocol : SanitizeVerdict::Kept;
}

SanitizeCounts& SanitizeCounts::operator+=(const SanitizeCounts& o) {
  candidates_in += o.candidates_in;
  after_step1 += o.after_step1;
  after_step2 += o.after_step2;
  after_step3 += o.after_step3;
  port_only_count += o.port_only_count;
  return *this;
}

std::optional<double> SanitizeCounts::remaining_pct(std::uint64_t remaining) const {
  if (candidates_in == 0) return std::nullopt;
  return 100.0 * static_cast<double>(remaining) / static_cast<double>(candidates_in);
}

std::optional<double> SanitizeCounts::port_only_pct() const {
  if (after_step3 == 0) return std::nullopt;
  return 100.0 * static_cast<double>(port_only_count) / static_cast<double>(after_step3);
}

SanitizeReport& SanitizeReport::operator+=(const SanitizeReport& o) {
  for (const auto& [vantage, counts] : o.by_vantage) by_vantage[vantage] += counts;
  return *this;
}

SanitizeCounts SanitizeReport::total() const {
  SanitizeCounts t;
  for (const auto& [_, counts] : by_vantage) t += counts;
  return t;
}

namespace {

SanitizeVerdict run_step(SanitizeStep step, const Candidate& c, const DpiCatalog& catalog) {
  switch (step) {
    case SanitizeStep::Tunnel: return strip_tunnels(*c.record, c.dissection);
    case SanitizeStep::Malformed: return drop_malformed(c.dissection);
    case SanitizeStep::Dpi: return dpi_cross_check(*c.record, catalog);
  }
  return SanitizeVerdict::Kept;
}

}  // namespace

SanitizeVerdict judge(const Candidate& candidate, const DpiCatalog& catalog,
                      const std::array<SanitizeStep, 3>& order) {
  for (auto step : order) {
    if (auto v = run_step(step, candidate, catalog); v != SanitizeVerdict::Kept) return v;
  }
  return SanitizeVerdict::Kept;
}

SanitizeResult sanitize(std::span<const Candidate> candidates, const DpiCatalog& catalog,
                        const std::array<SanitizeStep, 3>& order) {
  SanitizeResult result;
  result.verdicts.reserve(candidates.size());
  for (const auto& c : candidates) {
    auto& counts = result.report.by_vantage[c.record->vantage];
    ++counts.candidates_in;
    std::size_t passed = 0;
    SanitizeVerdict verdict = SanitizeVerdict::Kept;
    for (auto step : order) {
      verdict = run_step(step, c, catalog);
      if (verdict != SanitizeVerdict::Kept) break;
      ++passed;
    }
    if (passed >= 1) ++counts.after_step1;
    if (passed >= 2) ++counts.after_step2;
    if (passed >= 3) {
      ++counts.after_step3;
      result.kept.push_back(c);
    }
    result.verdicts.push_back(verdict);
  }
  return result;
}

bool port_only_match(const PacketRecord& record, const PortRegistry& ports) {
  return record.has_ports() && (ports.contains(record.src_port) || ports.contains(record.dst_port));
}

std::uint64_t port_only_baseline(std::span<const PacketRecord> records, const PortRegistry& ports) {
  std::uint64_t n = 0;
  for (const auto& r : records) n += port_only_match(r, ports) ? 1 : 0;
  return n;
}

}  // namespace icsscope
