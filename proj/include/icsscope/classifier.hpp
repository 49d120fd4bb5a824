#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "icsscope/capture.hpp"
#include "icsscope/dissectors.hpp"
#include "icsscope/prefix_table.hpp"

namespace icsscope {

/// Scan projects with their documented prefixes and reverse-DNS name patterns.
class ScannerRegistry {
 public:
  struct Entry {
    std::string project;
    std::vector<Cidr> prefixes;
    std::vector<std::string> rdns_patterns;  // lowercase substrings
  };

  static ScannerRegistry load(const std::filesystem::path& path);

  void add(Entry entry);
  const std::vector<Entry>& entries() const { return entries_; }

  // Project of the most specific covering prefix. Equal prefixes resolve to the
  // project listed first.
  std::optional<std::string> match_prefix(Ipv4 ip) const;
  // First project in registry order with a pattern contained in the name.
  std::optional<std::string> match_name(std::string_view fqdn) const;

 private:
  std::vector<Entry> entries_;
  PrefixTable<std::size_t> prefixes_;
};

/// Offline reverse-DNS snapshot.
class RdnsTable {
 public:
  static RdnsTable load(const std::filesystem::path& path);
  void add(Ipv4 ip, std::string name);
  const std::string* lookup(Ipv4 ip) const;
  std::size_t size() const { return names_.size(); }

 private:
  std::unordered_map<std::uint32_t, std::string> names_;
};

std::optional<std::string> match_scanner_prefix(Ipv4 ip, const ScannerRegistry& registry);
std::optional<std::string> match_scanner_rdns(Ipv4 ip, const RdnsTable& rdns, const ScannerRegistry& registry);

struct HoneypotSets {
  std::unordered_set<std::uint32_t> hp_all;
  std::unordered_set<std::uint32_t> hp_ics;

  // Throws ConfigError unless hp_ics ⊆ hp_all.
  static HoneypotSets load(const std::filesystem::path& all_path, const std::filesystem::path& ics_path);
  void validate() const;
};

enum class ReasonKind : std::uint8_t { ScannerPrefix, ScannerRdns, HoneypotAll, HoneypotIcs };

struct Reason {
  ReasonKind kind;
  std::string project;  // empty for honeypot reasons

  auto operator<=>(const Reason&) const = default;
  std::string str() const;
  static std::optional<Reason> parse(std::string_view text);
};

enum class Label : std::uint8_t { Industrial, NonIndustrial };
std::string_view label_name(Label l);

struct TrafficClass {
  Label label{Label::Industrial};
  std::set<Reason> reasons;

  bool operator==(const TrafficClass&) const = default;
};

/// Which filter rules are active.
struct FilterSet {
  bool scanners{false};
  bool hp_ics{false};
  bool hp_all{false};

  static constexpr FilterSet scanners_only() { return {true, false, false}; }
  static constexpr FilterSet honeypot_ics() { return {false, true, false}; }
  static constexpr FilterSet honeypot_all() { return {false, false, true}; }
  static constexpr FilterSet scanners_and_ics() { return {true, true, false}; }
  static constexpr FilterSet all() { return {true, true, true}; }

  static std::optional<FilterSet> parse(std::string_view name);  // scanners | hp-ics | hp-all | all
  bool operator==(const FilterSet&) const = default;
};

struct ClassifierContext {
  const ScannerRegistry* registry{nullptr};
  const RdnsTable* rdns{nullptr};
  const HoneypotSets* honeypots{nullptr};
};

// Evaluates the active filters on both endpoints and accumulates every matching reason.
TrafficClass classify(const PacketRecord& record, const ClassifierContext& ctx, FilterSet filters);

/// Per-protocol share of packets that stay Industrial under each filter family.
class FilterReport {
 public:
  // Column families, in output order.
  static constexpr std::array<FilterSet, 4> kFamilies = {FilterSet::scanners_only(), FilterSet::honeypot_ics(),
                                                         FilterSet::honeypot_all(), FilterSet::all()};

  struct Row {
    std::uint64_t total{0};
    std::uint64_t requests{0};
    std::uint64_t replies{0};
    std::array<std::uint64_t, 4> industrial{};

    Row& operator+=(const Row& o);
    std::optional<double> request_share() const;
    double industrial_pct(std::size_t family) const;
  };

  void add(ProtocolId protocol, Direction direction, const std::array<bool, 4>& industrial_by_family);
  void add(const PacketRecord& record, const Dissection& dissection, Direction direction,
           const ClassifierContext& ctx);
  FilterReport& operator+=(const FilterReport& o);

  const std::map<ProtocolId, Row>& rows() const { return rows_; }
  Row total() const;

 private:
  std::map<ProtocolId, Row> rows_;
};

}  // namespace icsscope
