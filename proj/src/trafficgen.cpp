#include "icsscope/trafficgen.hpp"

#include <algorithm>
#include <fstream>
#include <spdlog/spdlog.h>

#include "icsscope/templates.hpp"

namespace icsscope {

using nlohmann::json;

std::string_view flow_kind_name(FlowKind k) {
  switch (k) {
    case FlowKind::Industrial: return "Industrial";
    case FlowKind::ScannerSweep: return "ScannerSweep";
    case FlowKind::Backscatter: return "Backscatter";
    case FlowKind::Malformed: return "Malformed";
    case FlowKind::DpiDecoy: return "DpiDecoy";
  }
  return "?";
}

std::optional<FlowKind> flow_kind_from_name(std::string_view s) {
  for (auto k : {FlowKind::Industrial, FlowKind::ScannerSweep, FlowKind::Backscatter, FlowKind::Malformed,
                 FlowKind::DpiDecoy}) {
    if (flow_kind_name(k) == s) return k;
  }
  return std::nullopt;
}

namespace {

Day day_field(const json& j, const char* key) {
  auto text = j.at(key).get<std::string>();
  auto d = parse_day(text);
  if (!d) throw ConfigError(std::string("bad date for '") + key + "': " + text);
  return *d;
}

std::string mac_str(MacAddress mac) {
  char buf[18];
  std::snprintf(buf, sizeof buf, "%02x:%02x:%02x:%02x:%02x:%02x", static_cast<unsigned>((mac >> 40) & 0xFF),
                static_cast<unsigned>((mac >> 32) & 0xFF), static_cast<unsigned>((mac >> 24) & 0xFF),
                static_cast<unsigned>((mac >> 16) & 0xFF), static_cast<unsigned>((mac >> 8) & 0xFF),
                static_cast<unsigned>(mac & 0xFF));
  return buf;
}

Endpoint parse_endpoint(const json& j) {
  Endpoint e;
  if (j.contains("ip")) {
    auto ip = Ipv4::parse(j.at("ip").get<std::string>());
    if (!ip) throw ConfigError("bad endpoint ip: " + j.at("ip").dump());
    e.prefix = Cidr{*ip, 32};
    e.count = 1;
  } else {
    auto c = Cidr::parse(j.at("cidr").get<std::string>());
    if (!c) throw ConfigError("bad endpoint cidr: " + j.at("cidr").dump());
    e.prefix = *c;
    e.count = j.value("count", c->size());
  }
  if (j.contains("asn")) e.asn = j.at("asn").get<Asn>();
  if (j.contains("country")) e.country = j.at("country").get<std::string>();
  if (j.contains("member")) e.member = j.at("member").get<Asn>();
  if (j.contains("scanned")) e.scanned = j.at("scanned").get<std::string>();
  return e;
}

FlowSpec parse_flow(const json& j, Day start, Day end) {
  FlowSpec f;
  auto kind = j.at("kind").get<std::string>();
  auto k = flow_kind_from_name(kind);
  if (!k) throw ConfigError("unknown flow kind: " + kind);
  f.kind = *k;
  auto proto = j.at("protocol").get<std::string>();
  auto p = protocol_from_name(proto);
  if (!p) throw ConfigError("unknown protocol: " + proto);
  f.protocol = *p;
  f.src = parse_endpoint(j.at("src"));
  f.dst = parse_endpoint(j.at("dst"));
  const auto& s = j.value("schedule", json::object());
  f.schedule.start = s.contains("start") ? day_field(s, "start") : start;
  f.schedule.end = s.contains("end") ? day_field(s, "end") : end;
  f.schedule.packets_per_day = s.value("packets_per_day", 1u);
  for (const auto& d : s.value("active_days", json::array())) {
    auto day = parse_day(d.get<std::string>());
    if (!day) throw ConfigError("bad active day: " + d.dump());
    f.schedule.active_days.push_back(*day);
  }
  if (s.contains("active_day_count")) f.schedule.active_day_count = s.at("active_day_count").get<std::uint32_t>();
  f.request_reply_ratio = j.value("request_reply_ratio", 0.5);
  f.tcp_timestamps = j.value("tcp_timestamps", true);
  if (j.contains("scanner_project")) f.scanner_project = j.at("scanner_project").get<std::string>();
  if (j.contains("rdns_project")) f.rdns_project = j.at("rdns_project").get<std::string>();
  auto hp = j.value("honeypot", std::string{"none"});
  if (hp == "all") f.honeypot = HoneypotHit::All;
  else if (hp == "ics") f.honeypot = HoneypotHit::Ics;
  else if (hp != "none") throw ConfigError("honeypot must be none, all or ics: " + hp);
  return f;
}

}  // namespace

ScenarioSpec ScenarioSpec::parse(const json& doc) {
  ScenarioSpec spec;
  try {
    spec.seed = doc.value("seed", std::uint64_t{1});
    spec.start = day_field(doc, "start");
    spec.end = day_field(doc, "end");
    spec.meta.vantage = doc.value("vantage", std::string{"default"});
    spec.meta.sample_interval = doc.value("sample_interval", std::uint64_t{1});
    spec.meta.snap_len = doc.value("snap_len", 65535u);
    auto ts = doc.value("timestamps", std::string{"micro"});
    if (ts == "nano") spec.precision = TimestampPrecision::Nano;
    else if (ts != "micro") throw ConfigError("timestamps must be micro or nano: " + ts);
    for (const auto& m : doc.value("members", json::array())) {
      IxpMember member;
      member.asn = m.at("asn").get<Asn>();
      member.cone = m.value("cone", std::set<Asn>{});
      auto mac = parse_mac(m.at("mac").get<std::string>());
      if (!mac) throw ConfigError("bad member mac: " + m.at("mac").dump());
      member.mac = *mac;
      spec.members.push_back(std::move(member));
    }
    for (const auto& f : doc.at("flows")) spec.flows.push_back(parse_flow(f, spec.start, spec.end));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid scenario: ") + e.what());
  }
  spec.validate();
  return spec;
}

ScenarioSpec ScenarioSpec::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario: " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("invalid scenario " + path.string() + ": " + e.what());
  }
  try {
    return parse(doc);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

namespace {

std::vector<Day> active_days(const Schedule& s, Rng& rng) {
  std::vector<Day> days;
  if (!s.active_days.empty()) {
    days = s.active_days;
  } else if (s.active_day_count) {
    auto window = static_cast<std::uint64_t>(s.end - s.start + 1);
    std::uint64_t n = *s.active_day_count;
    if (n == window) {
      for (Day d = s.start; d <= s.end; ++d) days.push_back(d);
    } else {
      std::set<Day> picked{s.start};
      if (n >= 2) picked.insert(s.end);
      // Floyd's sampling over the interior days.
      std::uint64_t interior = window >= 2 ? window - 2 : 0;
      std::uint64_t need = n >= 2 ? n - 2 : 0;
      std::set<std::uint64_t> chosen;
      for (std::uint64_t j = interior - need; j < interior; ++j) {
        auto t = rng.uniform(j + 1);
        if (!chosen.insert(t).second) chosen.insert(j);
      }
      for (auto c : chosen) picked.insert(s.start + 1 + static_cast<Day>(c));
      days.assign(picked.begin(), picked.end());
    }
  } else {
    for (Day d = s.start; d <= s.end; ++d) days.push_back(d);
  }
  std::sort(days.begin(), days.end());
  days.erase(std::unique(days.begin(), days.end()), days.end());
  return days;
}

std::uint64_t day_count(const Schedule& s) {
  if (!s.active_days.empty()) {
    std::set<Day> u(s.active_days.begin(), s.active_days.end());
    return u.size();
  }
  if (s.active_day_count) return *s.active_day_count;
  return static_cast<std::uint64_t>(s.end - s.start + 1);
}

}  // namespace

void ScenarioSpec::validate() const {
  meta.validate();
  if (start > end) throw ConfigError("scenario start " + format_day(start) + " is after end " + format_day(end));
  std::set<Asn> member_asns;
  for (const auto& m : members) {
    if (!member_asns.insert(m.asn).second) throw ConfigError("duplicate member AS" + std::to_string(m.asn));
  }
  for (std::size_t i = 0; i < flows.size(); ++i) {
    const auto& f = flows[i];
    auto where = "flow " + std::to_string(i) + ": ";
    const auto& s = f.schedule;
    if (s.start > s.end || s.start < start || s.end > end) {
      throw ConfigError(where + "schedule " + format_day(s.start) + ".." + format_day(s.end) +
                        " is outside the corpus range " + format_day(start) + ".." + format_day(end));
    }
    for (Day d : s.active_days) {
      if (d < s.start || d > s.end) throw ConfigError(where + "active day " + format_day(d) + " is outside the schedule");
    }
    if (s.active_day_count && (*s.active_day_count == 0 || static_cast<std::int64_t>(*s.active_day_count) > std::int64_t{s.end} - s.start + 1)) {
      throw ConfigError(where + "active_day_count does not fit the schedule window");
    }
    if (s.packets_per_day == 0) throw ConfigError(where + "packets_per_day must be positive");
    for (const auto* e : {&f.src, &f.dst}) {
      if (e->count == 0 || e->count > e->prefix.size()) {
        throw ConfigError(where + "host count " + std::to_string(e->count) + " does not fit " + e->prefix.str());
      }
      if (e->member && !member_asns.count(*e->member)) {
        throw ConfigError(where + "unknown member AS" + std::to_string(*e->member));
      }
      if (e->scanned && *e->scanned != "transport" && *e->scanned != "application") {
        throw ConfigError(where + "scanned must be transport or application");
      }
      if (e->country && (e->country->size() != 2 || !std::isupper(static_cast<unsigned char>((*e->country)[0])) ||
                         !std::isupper(static_cast<unsigned char>((*e->country)[1])))) {
        throw ConfigError(where + "country must be a two-letter uppercase code");
      }
    }
    if (f.request_reply_ratio < 0.0 || f.request_reply_ratio > 1.0) {
      throw ConfigError(where + "request_reply_ratio must lie in [0, 1]");
    }
    std::uint64_t packets = day_count(s) * s.packets_per_day;
    if (f.kind == FlowKind::ScannerSweep && f.dst.count > packets) {
      throw ConfigError(where + "destination range of " + std::to_string(f.dst.count) + " hosts is too large for " +
                        std::to_string(packets) + " packets");
    }
    if (f.kind == FlowKind::DpiDecoy && f.protocol != ProtocolId::BACnet) {
      throw ConfigError(where + "DpiDecoy flows are only available for BACnet");
    }
  }
}

json TruthRecord::to_json() const {
  json j{{"index", index},
         {"ts_us", ts_us},
         {"flow", flow},
         {"kind", flow_kind_name(kind)},
         {"protocol", nullptr},
         {"dissector", nullptr},
         {"role", nullptr},
         {"function_code", nullptr},
         {"verdict", nullptr},
         {"sanitize", sanitize_verdict_name(sanitize)},
         {"direction", direction_name(direction)},
         {"label", label_name(traffic_class.label)}};
  if (dissection) {
    j["protocol"] = protocol_name(dissection->protocol);
    j["dissector"] = kind_name(dissection->kind);
    j["role"] = role_name(dissection->role);
    if (dissection->function_code) j["function_code"] = *dissection->function_code;
    j["verdict"] = verdict_name(dissection->verdict);
  }
  json reasons = json::array();
  for (const auto& r : traffic_class.reasons) reasons.push_back(r.str());
  j["reasons"] = reasons;
  return j;
}

TruthRecord TruthRecord::from_json(const json& j) {
  auto need = [](auto opt, const std::string& what) {
    if (!opt) throw ConfigError("bad ground-truth field: " + what);
    return *opt;
  };
  TruthRecord t;
  t.index = j.at("index").get<std::size_t>();
  t.ts_us = j.at("ts_us").get<std::int64_t>();
  t.flow = j.at("flow").get<std::size_t>();
  t.kind = need(flow_kind_from_name(j.at("kind").get<std::string>()), "kind");
  if (!j.at("protocol").is_null()) {
    Dissection d;
    d.protocol = need(protocol_from_name(j.at("protocol").get<std::string>()), "protocol");
    d.kind = need(kind_from_name(j.at("dissector").get<std::string>()), "dissector");
    d.role = need(role_from_name(j.at("role").get<std::string>()), "role");
    if (!j.at("function_code").is_null()) d.function_code = j.at("function_code").get<std::uint32_t>();
    d.verdict = need(verdict_from_name(j.at("verdict").get<std::string>()), "verdict");
    t.dissection = d;
  }
  t.sanitize = need(sanitize_verdict_from_name(j.at("sanitize").get<std::string>()), "sanitize");
  t.direction = need(direction_from_name(j.at("direction").get<std::string>()), "direction");
  auto label = j.at("label").get<std::string>();
  t.traffic_class.label = label == "Industrial" ? Label::Industrial : Label::NonIndustrial;
  for (const auto& r : j.at("reasons")) t.traffic_class.reasons.insert(need(Reason::parse(r.get<std::string>()), "reason"));
  return t;
}

namespace {

std::vector<Ipv4> pick_hosts(const Endpoint& e, Rng& rng) {
  std::vector<Ipv4> out;
  if (e.count == e.prefix.size()) {
    for (std::uint64_t i = 0; i < e.count; ++i) out.push_back(e.prefix.at(i));
    return out;
  }
  std::set<std::uint64_t> chosen;
  std::uint64_t n = e.prefix.size();
  for (std::uint64_t j = n - e.count; j < n; ++j) {
    auto t = rng.uniform(j + 1);
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  for (auto c : chosen) out.push_back(e.prefix.at(c));
  return out;
}

constexpr MacAddress kDefaultSrcMac = 0x020000000001;
constexpr MacAddress kDefaultDstMac = 0x020000000002;

struct Pending {
  std::int64_t ts_us;
  std::vector<std::uint8_t> bytes;
  TruthRecord truth;
  Ipv4 src;
  Ipv4 dst;
};

class Generator {
 public:
  explicit Generator(const ScenarioSpec& spec) : spec_(spec), rng_(spec.seed) {
    for (const auto& m : spec.members) macs_[m.asn] = m.mac;
  }

  Corpus run() {
    corpus_.meta = spec_.meta;
    corpus_.precision = spec_.precision;
    corpus_.members = spec_.members;
    for (std::size_t i = 0; i < spec_.flows.size(); ++i) emit_flow(i, spec_.flows[i]);

    std::stable_sort(pending_.begin(), pending_.end(),
                     [](const Pending& a, const Pending& b) { return a.ts_us < b.ts_us; });
    for (std::size_t i = 0; i < pending_.size(); ++i) {
      auto& p = pending_[i];
      p.truth.index = i;
      p.truth.ts_us = p.ts_us;
      p.truth.traffic_class = expected_class(p.src, p.dst);
      corpus_.frames.push_back({p.ts_us, std::move(p.bytes)});
      corpus_.truth.push_back(std::move(p.truth));
    }
    return std::move(corpus_);
  }

 private:
  MacAddress mac_of(const Endpoint& e, MacAddress fallback) const {
    if (e.member) return macs_.at(*e.member);
    return fallback;
  }

  ScannerRegistry::Entry& registry_entry(const std::string& project) {
    for (auto& e : corpus_.registry) {
      if (e.project == project) return e;
    }
    corpus_.registry.push_back({project, {}, {}});
    return corpus_.registry.back();
  }

  static std::string rdns_pattern(const std::string& project) { return to_lower(project) + ".scan.example"; }

  // The whole prefix when every host is used, else one /32 per host.
  static std::vector<Cidr> prefixes_of(const Endpoint& e, const std::vector<Ipv4>& hosts) {
    if (e.count == e.prefix.size()) return {e.prefix};
    std::vector<Cidr> out;
    for (auto h : hosts) out.push_back(Cidr{h, 32});
    return out;
  }

  void annotate(const FlowSpec& f, const Endpoint& e, const std::vector<Ipv4>& hosts, bool is_src) {
    auto where = std::string(is_src ? "src " : "dst ") + e.prefix.str();
    auto prefixes = prefixes_of(e, hosts);
    auto put = [&](auto& table, Cidr c, const auto& value, const char* what) {
      auto [it, inserted] = table.emplace(c, value);
      if (!inserted && it->second != value) {
        throw ConfigError(std::string("conflicting ") + what + " for " + c.str() + " (" + where + ")");
      }
    };
    for (auto c : prefixes) {
      if (e.asn) put(corpus_.asn, c, *e.asn, "ASN");
      if (e.country) put(corpus_.geo, c, *e.country, "country");
    }
    if (e.scanned) {
      auto& snap = corpus_.scan_snapshot.protocols[f.protocol];
      for (auto h : hosts) {
        snap.transport.insert(h.value);
        if (*e.scanned == "application") snap.application.insert(h.value);
      }
    }
    if (!is_src) return;
    if (f.scanner_project) {
      auto& entry = registry_entry(*f.scanner_project);
      for (auto c : prefixes) {
        if (std::find(entry.prefixes.begin(), entry.prefixes.end(), c) == entry.prefixes.end())
          entry.prefixes.push_back(c);
      }
    }
    if (f.rdns_project) {
      auto& entry = registry_entry(*f.rdns_project);
      auto pattern = rdns_pattern(*f.rdns_project);
      if (std::find(entry.rdns_patterns.begin(), entry.rdns_patterns.end(), pattern) == entry.rdns_patterns.end())
        entry.rdns_patterns.push_back(pattern);
      for (auto h : hosts) {
        auto name = h.str();
        std::replace(name.begin(), name.end(), '.', '-');
        corpus_.rdns[h.value] = "h" + name + "." + pattern;
      }
    }
    if (f.honeypot != HoneypotHit::None) {
      for (auto h : hosts) {
        corpus_.hp_all.insert(h.value);
        if (f.honeypot == HoneypotHit::Ics) corpus_.hp_ics.insert(h.value);
      }
    }
  }

  std::uint16_t ephemeral_port() { return static_cast<std::uint16_t>(rng_.between(49152, 65535)); }

  std::vector<std::uint8_t> frame_of(const AppMessage& m, Ipv4 client, Ipv4 server, MacAddress client_mac,
                                     MacAddress server_mac, bool timestamps) {
    FrameSpec spec;
    spec.proto = m.transport;
    spec.tcp_timestamps = timestamps;
    spec.payload = m.payload;
    spec.ip_id = static_cast<std::uint16_t>(ip_id_++);
    std::uint16_t client_port = m.client_port.value_or(ephemeral_port());
    if (m.from_server) {
      spec.src = server;
      spec.dst = client;
      spec.src_port = m.server_port;
      spec.dst_port = client_port;
      spec.src_mac = server_mac;
      spec.dst_mac = client_mac;
    } else {
      spec.src = client;
      spec.dst = server;
      spec.src_port = client_port;
      spec.dst_port = m.server_port;
      spec.src_mac = client_mac;
      spec.dst_mac = server_mac;
    }
    return build_frame(spec);
  }

  void check_fits(std::size_t flow, const std::vector<std::uint8_t>& frame, ProtocolId protocol) const {
    if (frame.size() > spec_.meta.snap_len) {
      throw ConfigError("flow " + std::to_string(flow) + ": snap_len " + std::to_string(spec_.meta.snap_len) +
                        " cuts a " + std::string(protocol_name(protocol)) + " frame of " +
                        std::to_string(frame.size()) + " bytes");
    }
  }

  void emit_flow(std::size_t index, const FlowSpec& f) {
    auto clients = pick_hosts(f.src, rng_);
    auto servers = pick_hosts(f.dst, rng_);
    annotate(f, f.src, clients, true);
    annotate(f, f.dst, servers, false);
    auto days = active_days(f.schedule, rng_);
    MacAddress client_mac = mac_of(f.src, kDefaultSrcMac);
    MacAddress server_mac = mac_of(f.dst, kDefaultDstMac);

    std::uint64_t k = 0;
    for (Day day : days) {
      for (std::uint32_t i = 0; i < f.schedule.packets_per_day; ++i, ++k) {
        Pending p;
        p.ts_us = std::int64_t{day} * kMicrosPerDay + static_cast<std::int64_t>(rng_.uniform(kMicrosPerDay));
        p.truth.flow = index;
        p.truth.kind = f.kind;
        Ipv4 client = clients[rng_.uniform(clients.size())];
        Ipv4 server = f.kind == FlowKind::ScannerSweep ? servers[k % servers.size()] : servers[rng_.uniform(servers.size())];

        AppMessage m;
        switch (f.kind) {
          case FlowKind::Industrial:
            m = rng_.chance(f.request_reply_ratio) ? request_message(f.protocol, rng_) : reply_message(f.protocol, rng_);
            break;
          case FlowKind::ScannerSweep:
          case FlowKind::Backscatter: m = request_message(f.protocol, rng_); break;
          case FlowKind::Malformed: m = malformed_message(f.protocol, rng_); break;
          case FlowKind::DpiDecoy: m = dns_decoy_message(rng_); break;
        }
        p.truth.dissection = m.expected;
        p.truth.direction = m.from_server ? Direction::Reply : Direction::Request;
        p.truth.sanitize = SanitizeVerdict::Kept;
        if (f.kind == FlowKind::Malformed) p.truth.sanitize = SanitizeVerdict::DroppedMalformed;
        if (f.kind == FlowKind::DpiDecoy) p.truth.sanitize = SanitizeVerdict::DroppedKnownProtocol;

        if (f.kind == FlowKind::DpiDecoy) {
          // The BACnet device (src endpoint) answers from its port to the DNS server.
          p.bytes = frame_of(m, server, client, server_mac, client_mac, f.tcp_timestamps);
          p.src = client;
          p.dst = server;
        } else if (f.kind == FlowKind::Backscatter) {
          auto original = frame_of(m, client, server, client_mac, server_mac, false);
          FrameSpec outer;
          outer.src = server;
          outer.dst = client;
          outer.src_mac = server_mac;
          outer.dst_mac = client_mac;
          outer.ip_id = static_cast<std::uint16_t>(ip_id_++);
          static constexpr std::uint8_t kCodes[] = {1, 3, 10, 13};
          p.bytes = build_icmp_error(outer, 3, kCodes[rng_.uniform(4)], original, m.payload.size());
          p.truth.direction = Direction::Unrelated;
          p.truth.sanitize = SanitizeVerdict::DroppedTunnel;
          p.src = server;
          p.dst = client;
          check_fits(index, p.bytes, f.protocol);
        } else {
          p.bytes = frame_of(m, client, server, client_mac, server_mac, f.tcp_timestamps);
          p.src = m.from_server ? server : client;
          p.dst = m.from_server ? client : server;
          check_fits(index, p.bytes, f.protocol);
        }
        pending_.push_back(std::move(p));
      }
    }
  }

  // Reference classification by linear scans over the generated sidecars.
  TrafficClass expected_class(Ipv4 src, Ipv4 dst) const {
    TrafficClass tc;
    for (Ipv4 ip : {src, dst}) {
      int best_len = -1;
      const std::string* best = nullptr;
      for (const auto& e : corpus_.registry) {
        for (const auto& c : e.prefixes) {
          if (c.contains(ip) && static_cast<int>(c.length) > best_len) {
            best_len = c.length;
            best = &e.project;
          }
        }
      }
      if (best) tc.reasons.insert({ReasonKind::ScannerPrefix, *best});
      if (auto it = corpus_.rdns.find(ip.value); it != corpus_.rdns.end()) {
        for (const auto& e : corpus_.registry) {
          bool hit = std::any_of(e.rdns_patterns.begin(), e.rdns_patterns.end(),
                                 [&](const std::string& pat) { return it->second.find(pat) != std::string::npos; });
          if (hit) {
            tc.reasons.insert({ReasonKind::ScannerRdns, e.project});
            break;
          }
        }
      }
      if (corpus_.hp_all.count(ip.value)) tc.reasons.insert({ReasonKind::HoneypotAll, {}});
      if (corpus_.hp_ics.count(ip.value)) tc.reasons.insert({ReasonKind::HoneypotIcs, {}});
    }
    tc.label = tc.reasons.empty() ? Label::Industrial : Label::NonIndustrial;
    return tc;
  }

  const ScenarioSpec& spec_;
  Rng rng_;
  std::map<Asn, MacAddress> macs_;
  Corpus corpus_;
  std::vector<Pending> pending_;
  std::uint32_t ip_id_{1};
};

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace

Corpus generate(const ScenarioSpec& spec) {
  spec.validate();
  return Generator(spec).run();
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    PcapWriter writer(dir / "trace.pcap", corpus.meta.snap_len, corpus.precision);
    for (const auto& f : corpus.frames) writer.write(f.ts_us, f.bytes);
  }
  {
    std::string lines;
    for (const auto& t : corpus.truth) lines += t.to_json().dump() + "\n";
    write_text(dir / "truth.jsonl", lines);
  }

  json registry = json::array();
  for (const auto& e : corpus.registry) {
    json prefixes = json::array();
    for (const auto& c : e.prefixes) prefixes.push_back(c.str());
    registry.push_back({{"project", e.project}, {"prefixes", prefixes}, {"rdns_patterns", e.rdns_patterns}});
  }
  write_text(dir / "registry.json", registry.dump(2) + "\n");

  auto ip_list = [](const std::set<std::uint32_t>& ips) {
    std::string s;
    for (auto ip : ips) s += Ipv4{ip}.str() + "\n";
    return s;
  };
  write_text(dir / "honeypots_all.txt", ip_list(corpus.hp_all));
  write_text(dir / "honeypots_ics.txt", ip_list(corpus.hp_ics));

  std::string rdns = "ip,name\n";
  for (const auto& [ip, name] : corpus.rdns) rdns += Ipv4{ip}.str() + "," + name + "\n";
  write_text(dir / "rdns.csv", rdns);

  std::string asn;
  for (const auto& [c, a] : corpus.asn) asn += c.str() + " " + std::to_string(a) + "\n";
  write_text(dir / "asn.txt", asn);

  std::string geo = "prefix,country\n";
  for (const auto& [c, cc] : corpus.geo) geo += c.str() + "," + cc + "\n";
  write_text(dir / "geo.csv", geo);

  json cones = json::object();
  json macs = json::object();
  for (const auto& m : corpus.members) {
    cones[std::to_string(m.asn)] = m.cone;
    macs[mac_str(m.mac)] = m.asn;
  }
  write_text(dir / "cones.json", cones.dump(2) + "\n");

  json snapshot = json::object();
  for (const auto& [p, hosts] : corpus.scan_snapshot.protocols) {
    json t = json::array();
    json a = json::array();
    for (auto ip : hosts.transport) t.push_back(Ipv4{ip}.str());
    for (auto ip : hosts.application) a.push_back(Ipv4{ip}.str());
    snapshot[std::string(protocol_name(p))] = {{"transport", t}, {"application", a}};
  }
  write_text(dir / "scan_snapshot.json", snapshot.dump(2) + "\n");
  write_text(dir / "dpi_catalog.json", std::string(DpiCatalog::builtin_json()));

  json config{
      {"vantages",
       {{corpus.meta.vantage, {{"sample_interval", corpus.meta.sample_interval}, {"snap_len", corpus.meta.snap_len}}}}},
      {"captures", json::array({{{"path", "trace.pcap"}, {"vantage", corpus.meta.vantage}}})},
      {"registry", "registry.json"},
      {"honeypots_all", "honeypots_all.txt"},
      {"honeypots_ics", "honeypots_ics.txt"},
      {"rdns", "rdns.csv"},
      {"asn", "asn.txt"},
      {"geo", "geo.csv"},
      {"cones", "cones.json"},
      {"member_macs", macs},
      {"scan_snapshot", "scan_snapshot.json"},
      {"dpi_catalog", "dpi_catalog.json"},
      {"filters", "all"}};
  write_text(dir / "config.json", config.dump(2) + "\n");
  spdlog::info("wrote {} packets to {}", corpus.frames.size(), dir.string());
}

std::vector<TruthRecord> load_truth(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open ground truth: " + path.string());
  std::vector<TruthRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(TruthRecord::from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw ConfigError("invalid ground truth " + path.string() + ": " + e.what());
    }
  }
  return out;
}

}  // namespace icsscope
