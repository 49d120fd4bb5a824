#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "icsscope/capture.hpp"
#include "icsscope/classifier.hpp"
#include "icsscope/dissectors.hpp"
#include "icsscope/enrichment.hpp"
#include "icsscope/metrics.hpp"
#include "icsscope/sanitizer.hpp"

namespace icsscope {

struct CaptureInput {
  std::filesystem::path path;
  std::string vantage;
};

/// Analyze configuration with every referenced table loaded.
struct PipelineConfig {
  std::map<std::string, CaptureMeta> vantages;
  std::vector<CaptureInput> captures;
  FilterSet filters{FilterSet::all()};
  std::string filters_name{"all"};
  std::filesystem::path output;

  PortRegistry ports{PortRegistry::defaults()};
  DpiCatalog catalog{DpiCatalog::builtin()};
  ScannerRegistry registry;
  RdnsTable rdns;
  HoneypotSets honeypots;
  AsnTable asn;
  GeoTable geo;
  IxpTopology topology;
  std::optional<ScanSnapshot> scan_snapshot;
  std::optional<OpcodeTable> opcodes;

  // JSON config; relative paths resolve against the config file's directory.
  // Any unreadable or invalid referenced file throws ConfigError naming it.
  static PipelineConfig load(const std::filesystem::path& path);
  static PipelineConfig parse(const nlohmann::json& doc, const std::filesystem::path& base_dir);

  // Vantage for a capture given on the command line: `name` if set, else the only configured one.
  std::string resolve_vantage(const std::optional<std::string>& name) const;
  ClassifierContext classifier() const { return {&registry, &rdns, &honeypots}; }
};

struct PacketResult {
  std::size_t index{0};
  std::int64_t ts_us{0};
  std::string vantage;
  Ipv4 src;
  Ipv4 dst;
  std::optional<Dissection> dissection;
  std::optional<SanitizeVerdict> sanitize;  // candidates only
  Direction direction{Direction::Unrelated};
  std::optional<TrafficClass> traffic_class;  // candidates only, under the configured filters
  std::optional<Transition> transition;      // kept packets only
  std::optional<bool> domestic;              // kept packets only
};

struct Analysis {
  std::vector<PacketResult> packets;
  std::map<std::string, CaptureStats> capture_stats;  // by capture path
  SanitizeReport sanitize;
  FilterReport filters;
  RequestShare requests;
  TransitionReport transitions;
  DomesticReport domestic;
  DailySeries daily;
  HostActivityTracker hosts;
  ProtocolsPerAsn asn_protocols;
  PassiveHosts passive_hosts;
  std::vector<OverlapRow> scan_overlap;
  std::map<ProtocolId, std::uint64_t> kept_by_protocol;
  std::uint64_t unidentified_tpkt{0};  // TPKT on port 102 that carries no S7 PDU

  std::uint64_t records() const { return packets.size(); }
};

/// Runs dissect, sanitize, classify, enrich and the metrics over records.
class Pipeline {
 public:
  explicit Pipeline(const PipelineConfig& config);

  void add(const PacketRecord& record);
  void add_capture(const std::filesystem::path& path, const std::string& vantage);
  // Completes cross-packet results (scan overlap) and returns the analysis.
  Analysis finish();

 private:
  const PipelineConfig& config_;
  Analysis a_;
};

Analysis analyze(const PipelineConfig& config);

}  // namespace icsscope
