#include "icsscope/pipeline.hpp"

#include <fstream>
#include <json.hpp>
#include <spdlog/spdlog.h>

namespace icsscope {

using nlohmann::json;

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::optional<std::filesystem::path> path_field(const json& doc, const char* key, const std::filesystem::path& base) {
  if (!doc.contains(key) || doc[key].is_null()) return std::nullopt;
  auto path = resolve(base, doc[key].get<std::string>());
  if (!std::filesystem::is_regular_file(path)) {
    throw ConfigError(std::string("config '") + key + "': file not found: " + path.string());
  }
  return path;
}

}  // namespace

PipelineConfig PipelineConfig::parse(const json& doc, const std::filesystem::path& base) {
  PipelineConfig c;
  try {
    auto vantages = doc.value("vantages", json::object());
    for (const auto& [name, v] : vantages.items()) {
      CaptureMeta meta;
      meta.vantage = name;
      meta.sample_interval = v.value("sample_interval", std::uint64_t{1});
      meta.snap_len = v.value("snap_len", 65535u);
      meta.validate();
      c.vantages[name] = meta;
    }
    if (c.vantages.empty()) c.vantages["default"] = CaptureMeta{};

    for (const auto& cap : doc.value("captures", json::array())) {
      auto vantage = cap.contains("vantage") ? std::optional(cap["vantage"].get<std::string>()) : std::nullopt;
      c.captures.push_back({resolve(base, cap.at("path").get<std::string>()), c.resolve_vantage(vantage)});
    }

    c.filters_name = doc.value("filters", std::string{"all"});
    auto filters = FilterSet::parse(c.filters_name);
    if (!filters) throw ConfigError("config 'filters': expected scanners, hp-ics, hp-all or all");
    c.filters = *filters;
    if (doc.contains("output")) c.output = resolve(base, doc["output"].get<std::string>());

    if (auto p = path_field(doc, "ports", base)) c.ports = PortRegistry::load(*p);
    if (auto p = path_field(doc, "dpi_catalog", base)) c.catalog = DpiCatalog::load(*p);
    if (auto p = path_field(doc, "registry", base)) c.registry = ScannerRegistry::load(*p);
    if (auto p = path_field(doc, "rdns", base)) c.rdns = RdnsTable::load(*p);
    auto hp_all = path_field(doc, "honeypots_all", base);
    auto hp_ics = path_field(doc, "honeypots_ics", base);
    if (hp_all && hp_ics) {
      c.honeypots = HoneypotSets::load(*hp_all, *hp_ics);
    } else if (hp_all || hp_ics) {
      throw ConfigError("config: honeypots_all and honeypots_ics must be given together");
    }
    if (auto p = path_field(doc, "asn", base)) c.asn = AsnTable::load(*p);
    if (auto p = path_field(doc, "geo", base)) c.geo = GeoTable::load(*p);
    if (auto p = path_field(doc, "cones", base)) c.topology = IxpTopology::load_cones(*p);
    auto member_macs = doc.value("member_macs", json::object());
    for (const auto& [mac_text, asn] : member_macs.items()) {
      auto mac = parse_mac(mac_text);
      if (!mac) throw ConfigError("config 'member_macs': bad MAC address " + mac_text);
      auto member = asn.get<Asn>();
      if (!c.topology.is_member(member)) c.topology.add_member(member);
      c.topology.add_mac(*mac, member);
    }
    if (auto p = path_field(doc, "scan_snapshot", base)) c.scan_snapshot = ScanSnapshot::load(*p);
    if (auto p = path_field(doc, "opcodes", base)) c.opcodes = OpcodeTable::load(*p);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
  return c;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("invalid config " + path.string() + ": " + e.what());
  }
  return parse(doc, path.parent_path());
}

std::string PipelineConfig::resolve_vantage(const std::optional<std::string>& name) const {
  if (name) {
    if (!vantages.count(*name)) throw ConfigError("unknown vantage '" + *name + "'");
    return *name;
  }
  if (vantages.size() != 1) throw ConfigError("several vantages configured; name one for each capture");
  return vantages.begin()->first;
}

Pipeline::Pipeline(const PipelineConfig& config) : config_(config) {
  for (const auto& [name, meta] : config.vantages) {
    a_.sanitize.by_vantage[name];
    a_.daily.set_sample_interval(name, meta.sample_interval);
  }
}

void Pipeline::add(const PacketRecord& record) {
  PacketResult r;
  r.index = a_.packets.size();
  r.ts_us = record.ts_us;
  r.vantage = record.vantage;
  r.src = record.src_ip;
  r.dst = record.dst_ip;
  r.direction = direction(record, config_.ports);
  r.dissection = dissect(record, config_.ports);

  auto& counts = a_.sanitize.by_vantage[record.vantage];
  if (port_only_match(record, config_.ports)) ++counts.port_only_count;

  if (!r.dissection) {
    if (record.ip_proto == ipproto::kTcp && (record.src_port == 102 || record.dst_port == 102)) {
      auto dg = datagram_of(record);
      if (dg && dg->payload.size() >= 2 && dg->payload[0] == 0x03 && dg->payload[1] == 0x00) ++a_.unidentified_tpkt;
    }
    a_.packets.push_back(std::move(r));
    return;
  }

  Candidate candidate{&record, *r.dissection};
  auto verdict = judge(candidate, config_.catalog);
  r.sanitize = verdict;
  ++counts.candidates_in;
  switch (verdict) {
    case SanitizeVerdict::Kept: ++counts.after_step3; [[fallthrough]];
    case SanitizeVerdict::DroppedKnownProtocol: ++counts.after_step2; [[fallthrough]];
    case SanitizeVerdict::DroppedMalformed: ++counts.after_step1; [[fallthrough]];
    case SanitizeVerdict::DroppedTunnel: break;
  }

  auto ctx = config_.classifier();
  r.traffic_class = classify(record, ctx, config_.filters);
  if (verdict == SanitizeVerdict::Kept) {
    ProtocolId protocol = r.dissection->protocol;
    Label label = r.traffic_class->label;
    bool industrial = label == Label::Industrial;

    a_.filters.add(record, *r.dissection, r.direction, ctx);
    a_.requests.add(protocol, r.direction);
    ++a_.kept_by_protocol[protocol];

    auto src_asn = map_asn(record.src_ip, config_.asn);
    auto dst_asn = map_asn(record.dst_ip, config_.asn);
    auto att = resolve_attachment(record, src_asn, dst_asn, config_.topology);
    r.transition = transition(src_asn, dst_asn, att.ingress, att.egress, config_.topology);
    a_.transitions.add(protocol, label, *r.transition);
    r.domestic = is_domestic(record.src_ip, record.dst_ip, config_.geo);
    a_.domestic.add(protocol, label, r.domestic);
    a_.daily.add(record.vantage, protocol, record.ts_us, industrial);
    if (r.direction == Direction::Request && src_asn) a_.asn_protocols.add(*src_asn, protocol);
    if (industrial) {
      a_.hosts.add(record.src_ip, record.ts_us);
      a_.hosts.add(record.dst_ip, record.ts_us);
      // Destination role: the side holding the ICS port.
      if (r.direction != Direction::Unrelated) {
        bool request = r.direction == Direction::Request;
        a_.passive_hosts[{protocol, HostRole::Source}].insert((request ? record.src_ip : record.dst_ip).value);
        a_.passive_hosts[{protocol, HostRole::Destination}].insert((request ? record.dst_ip : record.src_ip).value);
      }
    }
  }
  a_.packets.push_back(std::move(r));
}

void Pipeline::add_capture(const std::filesystem::path& path, const std::string& vantage) {
  auto meta = config_.vantages.at(vantage);
  CaptureReader reader(path, meta);
  while (auto record = reader.next()) add(*record);
  const auto& st = reader.stats();
  spdlog::info("{}: {} frames, {} records, {} skipped", path.string(), st.frames, st.records, st.skipped);
  a_.capture_stats[path.string()] = st;
}

Analysis Pipeline::finish() {
  if (config_.scan_snapshot) a_.scan_overlap = scan_overlap(a_.passive_hosts, *config_.scan_snapshot);
  if (a_.unidentified_tpkt) spdlog::info("{} TPKT packets on port 102 carried no S7 PDU", a_.unidentified_tpkt);
  return std::move(a_);
}

Analysis analyze(const PipelineConfig& config) {
  Pipeline p(config);
  for (const auto& cap : config.captures) p.add_capture(cap.path, cap.vantage);
  return p.finish();
}

}  // namespace icsscope
