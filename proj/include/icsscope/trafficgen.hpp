#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "icsscope/capture.hpp"
#include "icsscope/classifier.hpp"
#include "icsscope/dissectors.hpp"
#include "icsscope/enrichment.hpp"
#include "icsscope/sanitizer.hpp"

namespace icsscope {

enum class FlowKind : std::uint8_t { Industrial, ScannerSweep, Backscatter, Malformed, DpiDecoy };
std::string_view flow_kind_name(FlowKind k);
std::optional<FlowKind> flow_kind_from_name(std::string_view s);

enum class HoneypotHit : std::uint8_t { None, All, Ics };

/// One side of a flow: a single address or hosts drawn from a CIDR.
struct Endpoint {
  Cidr prefix;
  std::uint64_t count{1};  // hosts used from `prefix`
  std::optional<Asn> asn;
  std::optional<std::string> country;
  std::optional<Asn> member;                 // IXP member the endpoint is attached through
  std::optional<std::string> scanned;        // "transport" | "application"
};

struct Schedule {
  Day start{0};
  Day end{0};  // inclusive
  std::uint32_t packets_per_day{1};
  std::vector<Day> active_days;                    // explicit days, or
  std::optional<std::uint32_t> active_day_count;   // drawn from [start, end], both ends included
};

struct FlowSpec {
  FlowKind kind{FlowKind::Industrial};
  ProtocolId protocol{ProtocolId::Modbus};
  Endpoint src;  // clients (requesters)
  Endpoint dst;  // servers
  Schedule schedule;
  double request_reply_ratio{0.5};  // share of Industrial packets that are requests
  bool tcp_timestamps{true};
  std::optional<std::string> scanner_project;  // registers the src prefix
  std::optional<std::string> rdns_project;     // gives src hosts scanner-like names
  HoneypotHit honeypot{HoneypotHit::None};     // src hosts seen by honeypots
};

struct IxpMember {
  Asn asn;
  std::set<Asn> cone;
  MacAddress mac;
};

struct ScenarioSpec {
  std::uint64_t seed{1};
  Day start{0};
  Day end{0};
  CaptureMeta meta;
  TimestampPrecision precision{TimestampPrecision::Micro};
  std::vector<IxpMember> members;
  std::vector<FlowSpec> flows;

  static ScenarioSpec parse(const nlohmann::json& doc);
  static ScenarioSpec load(const std::filesystem::path& path);
  // Throws ConfigError on schedules outside [start, end], sweeps with more
  // destinations than packets, and other inconsistent settings.
  void validate() const;
};

/// What the pipeline must report for one generated packet.
struct TruthRecord {
  std::size_t index{0};
  std::int64_t ts_us{0};
  std::size_t flow{0};
  FlowKind kind{FlowKind::Industrial};
  std::optional<Dissection> dissection;
  SanitizeVerdict sanitize{SanitizeVerdict::Kept};
  Direction direction{Direction::Unrelated};
  TrafficClass traffic_class;  // with every filter active

  nlohmann::json to_json() const;
  static TruthRecord from_json(const nlohmann::json& j);
  bool operator==(const TruthRecord&) const = default;
};

struct GeneratedFrame {
  std::int64_t ts_us;
  std::vector<std::uint8_t> bytes;
};

struct Corpus {
  CaptureMeta meta;
  TimestampPrecision precision{TimestampPrecision::Micro};
  std::vector<GeneratedFrame> frames;  // sorted by timestamp
  std::vector<TruthRecord> truth;      // index-aligned with frames

  std::vector<ScannerRegistry::Entry> registry;
  std::set<std::uint32_t> hp_all;
  std::set<std::uint32_t> hp_ics;
  std::map<std::uint32_t, std::string> rdns;
  std::map<Cidr, Asn> asn;
  std::map<Cidr, std::string> geo;
  std::vector<IxpMember> members;
  ScanSnapshot scan_snapshot;
};

Corpus generate(const ScenarioSpec& spec);

// Writes trace.pcap, truth.jsonl, the sidecar tables, and config.json (an
// analyze configuration referencing them) into `dir`.
void write_corpus(const Corpus& corpus, const std::filesystem::path& dir);

std::vector<TruthRecord> load_truth(const std::filesystem::path& path);

}  // namespace icsscope
