#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "icsscope/capture.hpp"
#include "icsscope/classifier.hpp"
#include "icsscope/prefix_table.hpp"
#include "icsscope/protocol.hpp"

namespace icsscope {

using Asn = std::uint32_t;

/// Prefix to origin AS table, prefix2as-style text ("prefix asn" or "addr len asn").
class AsnTable {
 public:
  static AsnTable load(const std::filesystem::path& path);

  // A conflicting origin for an already-present prefix replaces it (and is logged).
  void add(Cidr prefix, Asn asn);
  std::optional<Asn> lookup(Ipv4 ip) const { return table_.lookup(ip); }
  std::size_t size() const { return table_.size(); }
  std::size_t conflicts() const { return conflicts_; }

 private:
  PrefixTable<Asn> table_;
  std::size_t conflicts_{0};
};

std::optional<Asn> map_asn(Ipv4 ip, const AsnTable& table);

using CountryCode = std::array<char, 2>;

/// Prefix to ISO 3166-1 alpha-2 country table (CSV prefix,country).
class GeoTable {
 public:
  static GeoTable load(const std::filesystem::path& path);

  void add(Cidr prefix, std::string_view country);
  std::optional<CountryCode> lookup(Ipv4 ip) const { return table_.lookup(ip); }
  std::size_t size() const { return table_.size(); }

 private:
  PrefixTable<CountryCode> table_;
};

std::optional<bool> is_domestic(Ipv4 src, Ipv4 dst, const GeoTable& geo);

enum class Transition : std::uint8_t { MemberToMember, MemberToCone, ConeToMember, ConeToCone, Unknown };
inline constexpr std::array<Transition, 5> kAllTransitions = {Transition::MemberToMember, Transition::MemberToCone,
                                                              Transition::ConeToMember, Transition::ConeToCone,
                                                              Transition::Unknown};
std::string_view transition_name(Transition t);

/// IXP members, their customer cones, and the fabric MAC addresses that identify them.
class IxpTopology {
 public:
  // Cone file: JSON {"<member asn>": [cone asns...]}.
  static IxpTopology load_cones(const std::filesystem::path& path);

  void add_member(Asn member, std::set<Asn> cone = {});
  void add_mac(MacAddress mac, Asn member);

  bool is_member(Asn asn) const { return cones_.count(asn) != 0; }
  bool in_cone(Asn member, Asn asn) const;
  const std::map<Asn, std::set<Asn>>& cones() const { return cones_; }

  std::optional<Asn> member_for_mac(MacAddress mac) const;
  // Member through which `asn` reaches the fabric: itself when it is a member,
  // else the lowest-numbered member whose cone lists it.
  std::optional<Asn> member_for_asn(Asn asn) const;

 private:
  std::map<Asn, std::set<Asn>> cones_;
  std::map<MacAddress, Asn> macs_;
};

Transition transition(std::optional<Asn> src_asn, std::optional<Asn> dst_asn, std::optional<Asn> ingress_member,
                      std::optional<Asn> egress_member, const IxpTopology& topo);

// True iff src == ingress and egress == dst; nullopt when any argument is unknown.
std::optional<bool> is_local(std::optional<Asn> src_asn, std::optional<Asn> ingress_member,
                             std::optional<Asn> egress_member, std::optional<Asn> dst_asn);

struct Attachment {
  std::optional<Asn> ingress;
  std::optional<Asn> egress;
};

// Ingress from the source MAC, egress from the destination MAC, falling back to
// the AS-derived member when a MAC is not mapped.
Attachment resolve_attachment(const PacketRecord& record, std::optional<Asn> src_asn, std::optional<Asn> dst_asn,
                              const IxpTopology& topo);

/// Distinct ICS protocols requested per source AS.
class ProtocolsPerAsn {
 public:
  static constexpr std::size_t kSuspiciousAbove = 4;

  void add(Asn asn, ProtocolId protocol) { protocols_[asn].insert(protocol); }
  ProtocolsPerAsn& operator+=(const ProtocolsPerAsn& o);

  const std::map<Asn, std::set<ProtocolId>>& by_asn() const { return protocols_; }
  std::size_t count(Asn asn) const;
  bool suspicious(Asn asn) const { return count(asn) > kSuspiciousAbove; }
  // distinct protocol count -> number of ASes
  std::map<std::size_t, std::size_t> histogram() const;

 private:
  std::map<Asn, std::set<ProtocolId>> protocols_;
};

enum class HostRole : std::uint8_t { Source, Destination };
std::string_view host_role_name(HostRole r);

struct ScanSnapshot {
  struct Hosts {
    std::set<std::uint32_t> transport;
    std::set<std::uint32_t> application;
  };
  std::map<ProtocolId, Hosts> protocols;

  // JSON {"<protocol>": {"transport": [...], "application": [...]}}; application ⊆ transport enforced.
  static ScanSnapshot load(const std::filesystem::path& path);
  void validate() const;
};

// Source: requesting side; Destination: side holding the ICS port.
using PassiveHosts = std::map<std::pair<ProtocolId, HostRole>, std::set<std::uint32_t>>;

struct OverlapRow {
  ProtocolId protocol;
  HostRole role;
  std::size_t passive_hosts{0};
  std::size_t transport_hits{0};
  std::size_t application_hits{0};
  // Passive hosts answering transport scans but not application scans.
  std::vector<Ipv4> transport_only;

  double transport_pct() const;
  double application_pct() const;
};

std::vector<OverlapRow> scan_overlap(const PassiveHosts& passive, const ScanSnapshot& snapshot);

/// Transition counts per (protocol, label).
class TransitionReport {
 public:
  using Counts = std::array<std::uint64_t, 5>;

  void add(ProtocolId protocol, Label label, Transition t) { ++counts_[{protocol, label}][static_cast<std::size_t>(t)]; }
  TransitionReport& operator+=(const TransitionReport& o);
  const std::map<std::pair<ProtocolId, Label>, Counts>& counts() const { return counts_; }

  // Share of a transition over the non-Unknown packets of the group, in percent.
  static std::optional<double> share_pct(const Counts& c, Transition t);

 private:
  std::map<std::pair<ProtocolId, Label>, Counts> counts_;
};

/// Domestic / foreign / indeterminate counts per (protocol, label).
class DomesticReport {
 public:
  struct Counts {
    std::uint64_t domestic{0};
    std::uint64_t foreign{0};
    std::uint64_t indeterminate{0};
    std::optional<double> ratio() const;
  };

  void add(ProtocolId protocol, Label label, std::optional<bool> domestic);
  DomesticReport& operator+=(const DomesticReport& o);
  const std::map<std::pair<ProtocolId, Label>, Counts>& counts() const { return counts_; }

 private:
  std::map<std::pair<ProtocolId, Label>, Counts> counts_;
};

}  // namespace icsscope
