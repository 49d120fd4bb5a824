#include "icsscope/enrichment.hpp"

#include <spdlog/spdlog.h>

#include <fstream>
#include <json.hpp>
#include <sstream>

namespace icsscope {

void AsnTable::add(Cidr prefix, Asn asn) {
  if (table_.insert(prefix, asn) == PrefixTable<Asn>::InsertResult::Replaced) {
    ++conflicts_;
    spdlog::warn("prefix {} re-announced with origin AS{}; keeping the later entry", prefix.str(), asn);
  }
}

AsnTable AsnTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open ASN table: " + path.string());
  AsnTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::vector<std::string> parts;
    for (std::string f; fields >> f;) parts.push_back(f);
    auto fail = [&] { return ConfigError(path.string() + ":" + std::to_string(lineno) + ": malformed line"); };
    std::optional<Cidr> prefix;
    std::string origin;
    if (parts.size() == 2) {
      prefix = Cidr::parse(parts[0]);
      origin = parts[1];
    } else if (parts.size() == 3) {
      prefix = Cidr::parse(parts[0] + "/" + parts[1]);
      origin = parts[2];
    }
    if (!prefix || origin.empty()) throw fail();
    // Multi-origin (MOAS) entries such as "64500_64501": the first origin is used.
    origin = origin.substr(0, origin.find_first_of("_,"));
    try {
      auto asn = std::stoul(origin);
      if (asn == 0 || asn > 0xFFFFFFFFul) throw fail();
      table.add(*prefix, static_cast<Asn>(asn));
    } catch (const std::logic_error&) {
      throw fail();
    }
  }
  return table;
}

std::optional<Asn> map_asn(Ipv4 ip, const AsnTable& table) { return table.lookup(ip); }

void GeoTable::add(Cidr prefix, std::string_view country) {
  if (country.size() != 2 || country[0] < 'A' || country[0] > 'Z' || country[1] < 'A' || country[1] > 'Z') {
    throw ConfigError("invalid country code '" + std::string(country) + "'");
  }
  table_.insert(prefix, CountryCode{country[0], country[1]});
}

GeoTable GeoTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open geo table: " + path.string());
  GeoTable geo;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto comma = line.find(',');
    auto prefix = comma == std::string::npos ? std::nullopt : Cidr::parse(line.substr(0, comma));
    if (!prefix) {
      if (lineno == 1) continue;  // header
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected prefix,country");
    }
    try {
      geo.add(*prefix, line.substr(comma + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return geo;
}

std::optional<bool> is_domestic(Ipv4 src, Ipv4 dst, const GeoTable& geo) {
  auto a = geo.lookup(src);
  auto b = geo.lookup(dst);
  if (!a || !b) return std::nullopt;
  return *a == *b;
}

std::string_view transition_name(Transition t) {
  switch (t) {
    case Transition::MemberToMember: return "MemberToMember";
    case Transition::MemberToCone: return "MemberToCone";
    case Transition::ConeToMember: return "ConeToMember";
    case Transition::ConeToCone: return "ConeToCone";
    case Transition::Unknown: return "Unknown";
  }
  return "?";
}

void IxpTopology::add_member(Asn member, std::set<Asn> cone) {
  if (cone.count(member)) throw ConfigError("member AS" + std::to_string(member) + " listed in its own cone");
  cones_[member].insert(cone.begin(), cone.end());
}

void IxpTopology::add_mac(MacAddress mac, Asn member) {
  if (!is_member(member)) throw ConfigError("MAC mapped to non-member AS" + std::to_string(member));
  macs_[mac] = member;
}

IxpTopology IxpTopology::load_cones(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open cone file: " + path.string());
  IxpTopology topo;
  try {
    auto doc = nlohmann::json::parse(in);
    for (auto& [member, cone] : doc.items()) {
      topo.add_member(static_cast<Asn>(std::stoul(member)), cone.get<std::set<Asn>>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("invalid cone file " + path.string() + ": " + e.what());
  } catch (const std::logic_error& e) {
    throw ConfigError("invalid cone file " + path.string() + ": " + e.what());
  }
  return topo;
}

bool IxpTopology::in_cone(Asn member, Asn asn) const {
  auto it = cones_.find(member);
  return it != cones_.end() && it->second.count(asn) != 0;
}

std::optional<Asn> IxpTopology::member_for_mac(MacAddress mac) const {
  if (auto it = macs_.find(mac); it != macs_.end()) return it->second;
  return std::nullopt;
}

std::optional<Asn> IxpTopology::member_for_asn(Asn asn) const {
  if (is_member(asn)) return asn;
  for (const auto& [member, cone] : cones_) {
    if (cone.count(asn)) return member;
  }
  return std::nullopt;
}

Transition transition(std::optional<Asn> src_asn, std::optional<Asn> dst_asn, std::optional<Asn> ingress_member,
                      std::optional<Asn> egress_member, const IxpTopology& topo) {
  if (!src_asn || !dst_asn || !ingress_member || !egress_member) return Transition::Unknown;
  enum class Side { Member, Cone, None };
  auto side = [&](Asn asn, Asn member) {
    if (asn == member) return Side::Member;
    if (topo.in_cone(member, asn)) return Side::Cone;
    return Side::None;
  };
  auto s = side(*src_asn, *ingress_member);
  auto d = side(*dst_asn, *egress_member);
  if (s == Side::None || d == Side::None) return Transition::Unknown;
  if (s == Side::Member) return d == Side::Member ? Transition::MemberToMember : Transition::MemberToCone;
  return d == Side::Member ? Transition::ConeToMember : Transition::ConeToCone;
}

std::optional<bool> is_local(std::optional<Asn> src_asn, std::optional<Asn> ingress_member,
                             std::optional<Asn> egress_member, std::optional<Asn> dst_asn) {
  if (!src_asn || !ingress_member || !egress_member || !dst_asn) return std::nullopt;
  return *src_asn == *ingress_member && *egress_member == *dst_asn;
}

Attachment resolve_attachment(const PacketRecord& record, std::optional<Asn> src_asn, std::optional<Asn> dst_asn,
                              const IxpTopology& topo) {
  Attachment a;
  a.ingress = topo.member_for_mac(src_mac(record));
  if (!a.ingress && src_asn) a.ingress = topo.member_for_asn(*src_asn);
  a.egress = topo.member_for_mac(dst_mac(record));
  if (!a.egress && dst_asn) a.egress = topo.member_for_asn(*dst_asn);
  return a;
}

ProtocolsPerAsn& ProtocolsPerAsn::operator+=(const ProtocolsPerAsn& o) {
  for (const auto& [asn, set] : o.protocols_) protocols_[asn].insert(set.begin(), set.end());
  return *this;
}

std::size_t ProtocolsPerAsn::count(Asn asn) const {
  auto it = protocols_.find(asn);
  return it == protocols_.end() ? 0 : it->second.size();
}

std::map<std::size_t, std::size_t> ProtocolsPerAsn::histogram() const {
  std::map<std::size_t, std::size_t> h;
  for (const auto& [_, set] : protocols_) ++h[set.size()];
  return h;
}

std::string_view host_role_name(HostRole r) { return r == HostRole::Source ? "Source" : "Destination"; }

void ScanSnapshot::validate() const {
  for (const auto& [protocol, hosts] : protocols) {
    for (auto ip : hosts.application) {
      if (!hosts.transport.count(ip)) {
        throw ConfigError("scan snapshot: " + std::string(protocol_name(protocol)) + " application host " +
                          Ipv4{ip}.str() + " missing from transport hosts");
      }
    }
  }
}

ScanSnapshot ScanSnapshot::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scan snapshot: " + path.string());
  ScanSnapshot snap;
  try {
    auto doc = nlohmann::json::parse(in);
    for (auto& [name, body] : doc.items()) {
      auto proto = protocol_from_name(name);
      if (!proto) throw ConfigError("unknown protocol '" + name + "' in " + path.string());
      auto& hosts = snap.protocols[*proto];
      for (auto key : {"transport", "application"}) {
        auto& target = std::string_view(key) == "transport" ? hosts.transport : hosts.application;
        for (const auto& ip : body.value(key, nlohmann::json::array())) {
          auto parsed = Ipv4::parse(ip.get<std::string>());
          if (!parsed) throw ConfigError("bad IPv4 '" + ip.get<std::string>() + "' in " + path.string());
          target.insert(parsed->value);
        }
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("invalid scan snapshot " + path.string() + ": " + e.what());
  }
  snap.validate();
  return snap;
}

double OverlapRow::transport_pct() const {
  return passive_hosts == 0 ? 0.0 : 100.0 * static_cast<double>(transport_hits) / static_cast<double>(passive_hosts);
}

double OverlapRow::application_pct() const {
  return passive_hosts == 0 ? 0.0
                            : 100.0 * static_cast<double>(application_hits) / static_cast<double>(passive_hosts);
}

std::vector<OverlapRow> scan_overlap(const PassiveHosts& passive, const ScanSnapshot& snapshot) {
  std::set<ProtocolId> protocols;
  for (const auto& [key, _] : passive) protocols.insert(key.first);
  for (const auto& [p, _] : snapshot.protocols) protocols.insert(p);

  static const ScanSnapshot::Hosts kNone;
  std::vector<OverlapRow> rows;
  for (auto protocol : protocols) {
    auto sit = snapshot.protocols.find(protocol);
    const auto& scanned = sit == snapshot.protocols.end() ? kNone : sit->second;
    for (auto role : {HostRole::Source, HostRole::Destination}) {
      OverlapRow row{protocol, role, 0, 0, 0, {}};
      if (auto pit = passive.find({protocol, role}); pit != passive.end()) {
        row.passive_hosts = pit->second.size();
        for (auto ip : pit->second) {
          bool transport = scanned.transport.count(ip) != 0;
          bool application = scanned.application.count(ip) != 0;
          row.transport_hits += transport;
          row.application_hits += application;
          if (transport && !application) row.transport_only.push_back(Ipv4{ip});
        }
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

TransitionReport& TransitionReport::operator+=(const TransitionReport& o) {
  for (const auto& [key, c] : o.counts_) {
    auto& mine = counts_[key];
    for (std::size_t i = 0; i < c.size(); ++i) mine[i] += c[i];
  }
  return *this;
}

std::optional<double> TransitionReport::share_pct(const Counts& c, Transition t) {
  if (t == Transition::Unknown) return std::nullopt;
  std::uint64_t known = c[0] + c[1] + c[2] + c[3];
  if (known == 0) return std::nullopt;
  return 100.0 * static_cast<double>(c[static_cast<std::size_t>(t)]) / static_cast<double>(known);
}

std::optional<double> DomesticReport::Counts::ratio() const {
  auto denom = domestic + foreign;
  if (denom == 0) return std::nullopt;
  return static_cast<double>(domestic) / static_cast<double>(denom);
}

void DomesticReport::add(ProtocolId protocol, Label label, std::optional<bool> domestic) {
  auto& c = counts_[{protocol, label}];
  if (!domestic) ++c.indeterminate;
  else if (*domestic) ++c.domestic;
  else ++c.foreign;
}

DomesticReport& DomesticReport::operator+=(const DomesticReport& o) {
  for (const auto& [key, c] : o.counts_) {
    auto& mine = counts_[key];
    mine.domestic += c.domestic;
    mine.foreign += c.foreign;
    mine.indeterminate += c.indeterminate;
  }
  return *this;
}

}  // namespace icsscope
