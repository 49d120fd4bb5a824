#include "icsscope/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace icsscope {

using nlohmann::json;

std::string format_number(std::optional<double> v) {
  if (!v) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", *v);
  return buf;
}

namespace {

json number_or_null(std::optional<double> v) {
  if (!v) return nullptr;
  // Round through the text form so JSON and CSV agree.
  return std::stod(format_number(v));
}

class File {
 public:
  explicit File(const std::filesystem::path& path) : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
  }
  template <typename... T>
  void row(const T&... cells) {
    std::size_t i = 0;
    ((out_ << (i++ ? sep_ : "") << cells), ...);
    out_ << '\n';
  }
  void tabs() { sep_ = "\t"; }
  std::ofstream& stream() { return out_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  const char* sep_ = ",";
};

void write_json(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

json counts_json(const SanitizeCounts& c) {
  return {{"candidates_in", c.candidates_in},
          {"after_step1", c.after_step1},
          {"after_step2", c.after_step2},
          {"after_step3", c.after_step3},
          {"after_step1_pct", number_or_null(c.remaining_pct(c.after_step1))},
          {"after_step2_pct", number_or_null(c.remaining_pct(c.after_step2))},
          {"after_step3_pct", number_or_null(c.remaining_pct(c.after_step3))},
          {"port_only_count", c.port_only_count},
          {"port_only_pct", number_or_null(c.port_only_pct())}};
}

void sanitize_rows(File& f, const std::string& vantage, const SanitizeCounts& c) {
  f.row(vantage + ":candidates", c.candidates_in, format_number(c.remaining_pct(c.candidates_in)));
  f.row(vantage + ":tunnel", c.after_step1, format_number(c.remaining_pct(c.after_step1)));
  f.row(vantage + ":malformed", c.after_step2, format_number(c.remaining_pct(c.after_step2)));
  f.row(vantage + ":dpi", c.after_step3, format_number(c.remaining_pct(c.after_step3)));
  // Port-only detections, relative to the sanitized count.
  f.row(vantage + ":port_only", c.port_only_count, format_number(c.port_only_pct()));
}

std::string filter_cell(const FilterReport::Row& row, std::size_t family) {
  if (row.total == 0) return "";
  return format_number(row.industrial_pct(family));
}

void write_filters(const FilterReport& report, const std::filesystem::path& dir) {
  File f(dir / "filters.csv");
  f.row("protocol", "total_packets", "request_share", "excl_scanners", "excl_hp_ics", "excl_hp_all", "excl_both");
  json rows = json::array();
  auto emit = [&](std::string_view name, const FilterReport::Row& row) {
    f.row(name, row.total, format_number(row.request_share()), filter_cell(row, 0), filter_cell(row, 1),
          filter_cell(row, 2), filter_cell(row, 3));
    json j{{"protocol", name}, {"total_packets", row.total}, {"requests", row.requests}, {"replies", row.replies},
           {"request_share", number_or_null(row.request_share())}};
    static constexpr const char* kNames[] = {"excl_scanners", "excl_hp_ics", "excl_hp_all", "excl_both"};
    for (std::size_t i = 0; i < 4; ++i) {
      j[kNames[i]] = row.total ? number_or_null(row.industrial_pct(i)) : json(nullptr);
      j[std::string(kNames[i]) + "_packets"] = row.industrial[i];
    }
    rows.push_back(j);
  };
  for (auto p : kAllProtocols) {
    auto it = report.rows().find(p);
    emit(protocol_name(p), it == report.rows().end() ? FilterReport::Row{} : it->second);
  }
  emit("Total", report.total());
  write_json(dir / "filters.json", rows);
}

void write_transitions(const TransitionReport& report, const std::filesystem::path& dir) {
  File f(dir / "transitions.csv");
  f.row("protocol", "label", "transition", "count", "share_pct");
  for (const auto& [key, counts] : report.counts()) {
    for (auto t : kAllTransitions) {
      auto share = t == Transition::Unknown ? std::nullopt : TransitionReport::share_pct(counts, t);
      f.row(protocol_name(key.first), label_name(key.second), transition_name(t), counts[static_cast<std::size_t>(t)],
            format_number(share));
    }
  }
}

void write_domestic(const DomesticReport& report, const std::filesystem::path& dir) {
  File f(dir / "domestic.csv");
  f.row("protocol", "label", "domestic", "foreign", "indeterminate", "domestic_ratio");
  for (const auto& [key, c] : report.counts()) {
    f.row(protocol_name(key.first), label_name(key.second), c.domestic, c.foreign, c.indeterminate,
          format_number(c.ratio()));
  }
}

void write_daily(const DailySeries& series, const std::filesystem::path& dir) {
  File f(dir / "daily.tsv");
  f.tabs();
  f.row("day", "count", "extrapolated", "label", "vantage", "protocol");
  for (const auto& [key, points] : series.render()) {
    const auto& [vantage, protocol, label] = key;
    for (const auto& pt : points) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.0f", pt.extrapolated);
      f.row(format_day(pt.day), pt.count, buf, series_label_name(label), vantage, protocol_name(protocol));
    }
  }
}

void write_stability(const HostActivityTracker& hosts, const std::filesystem::path& dir) {
  File f(dir / "stability.csv");
  f.row("ip", "first_day", "last_day", "window", "active_days", "ratio");
  for (const auto& h : host_stability(hosts)) {
    f.row(h.ip.str(), format_day(h.first_day), format_day(h.last_day), h.window, h.active_days,
          format_number(h.stability_ratio()));
  }
}

void write_asn_protocols(const ProtocolsPerAsn& per_asn, const std::filesystem::path& dir) {
  File f(dir / "asn_protocols.csv");
  f.row("asn", "protocol_count", "protocols", "suspicious");
  for (const auto& [asn, protocols] : per_asn.by_asn()) {
    std::string names;
    for (auto p : protocols) {
      if (!names.empty()) names += ';';
      names += protocol_name(p);
    }
    f.row(asn, protocols.size(), names, per_asn.suspicious(asn) ? "true" : "false");
  }
}

void write_overlap(const std::vector<OverlapRow>& rows, const std::filesystem::path& dir) {
  File f(dir / "scan_overlap.csv");
  f.row("protocol", "role", "passive_hosts", "transport_hits", "transport_pct", "application_hits",
        "application_pct", "transport_only");
  for (const auto& r : rows) {
    std::string only;
    for (auto ip : r.transport_only) {
      if (!only.empty()) only += ';';
      only += ip.str();
    }
    std::optional<double> tp, ap;
    if (r.passive_hosts) {
      tp = r.transport_pct();
      ap = r.application_pct();
    }
    f.row(protocol_name(r.protocol), host_role_name(r.role), r.passive_hosts, r.transport_hits, format_number(tp),
          r.application_hits, format_number(ap), only);
  }
}

void write_rank(const std::map<ProtocolId, std::uint64_t>& counts, const std::filesystem::path& dir) {
  File f(dir / "rank.csv");
  f.row("rank", "protocol", "packets");
  std::size_t rank = 0;
  for (const auto& [p, n] : protocol_rank(counts)) f.row(++rank, protocol_name(p), n);
}

}  // namespace

json dissection_json(std::size_t index, const Dissection& d, const OpcodeTable* opcodes) {
  json j{{"index", index},
         {"protocol", protocol_name(d.protocol)},
         {"kind", kind_name(d.kind)},
         {"role", role_name(d.role)},
         {"function_code", nullptr},
         {"verdict", verdict_name(d.verdict)}};
  if (d.function_code) {
    j["function_code"] = *d.function_code;
    if (opcodes) {
      if (auto action = opcodes->action(d.protocol, *d.function_code)) j["action"] = *action;
    }
  }
  return j;
}

json packet_json(const PacketResult& r, const OpcodeTable* opcodes) {
  json j{{"index", r.index},          {"ts_us", r.ts_us},     {"vantage", r.vantage},
         {"src", r.src.str()},        {"dst", r.dst.str()},   {"direction", direction_name(r.direction)},
         {"protocol", nullptr},       {"kind", nullptr},      {"role", nullptr},
         {"function_code", nullptr},  {"verdict", nullptr},   {"sanitize", nullptr},
         {"label", nullptr},          {"reasons", nullptr},   {"transition", nullptr},
         {"domestic", nullptr}};
  if (r.dissection) {
    auto d = dissection_json(r.index, *r.dissection, opcodes);
    for (auto key : {"protocol", "kind", "role", "function_code", "verdict"}) j[key] = d[key];
    if (d.contains("action")) j["action"] = d["action"];
  }
  if (r.sanitize) j["sanitize"] = sanitize_verdict_name(*r.sanitize);
  if (r.traffic_class) {
    j["label"] = label_name(r.traffic_class->label);
    json reasons = json::array();
    for (const auto& reason : r.traffic_class->reasons) reasons.push_back(reason.str());
    j["reasons"] = reasons;
  }
  if (r.transition) j["transition"] = transition_name(*r.transition);
  if (r.domestic) j["domestic"] = *r.domestic;
  return j;
}

void write_sanitize_report(const SanitizeReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  File f(dir / "sanitize.csv");
  f.row("step", "remaining_count", "remaining_pct");
  json doc = json::object();
  for (const auto& [vantage, counts] : report.by_vantage) {
    sanitize_rows(f, vantage, counts);
    doc[vantage] = counts_json(counts);
  }
  sanitize_rows(f, "total", report.total());
  doc["total"] = counts_json(report.total());
  write_json(dir / "sanitize.json", doc);
}

void write_report(const Analysis& a, const PipelineConfig& config, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_sanitize_report(a.sanitize, dir);
  write_filters(a.filters, dir);
  write_transitions(a.transitions, dir);
  write_domestic(a.domestic, dir);
  write_daily(a.daily, dir);
  write_stability(a.hosts, dir);
  write_asn_protocols(a.asn_protocols, dir);
  write_overlap(a.scan_overlap, dir);
  write_rank(a.kept_by_protocol, dir);
  {
    File f(dir / "packets.jsonl");
    const OpcodeTable* opcodes = config.opcodes ? &*config.opcodes : nullptr;
    for (const auto& p : a.packets) f.stream() << packet_json(p, opcodes).dump() << '\n';
  }

  json captures = json::array();
  for (const auto& [path, st] : a.capture_stats) {
    captures.push_back({{"file", std::filesystem::path(path).filename().string()},
                        {"frames", st.frames},
                        {"records", st.records},
                        {"skipped", st.skipped},
                        {"skipped_non_ipv4", st.skipped_non_ipv4},
                        {"skipped_qinq", st.skipped_qinq},
                        {"skipped_transport", st.skipped_transport},
                        {"truncated_tail", st.truncated_tail}});
  }
  json vantages = json::object();
  for (const auto& [name, meta] : config.vantages) {
    vantages[name] = {{"sample_interval", meta.sample_interval}, {"snap_len", meta.snap_len}};
  }
  json summary{{"records", a.records()},
               {"captures", captures},
               {"vantages", vantages},
               {"filters", config.filters_name},
               {"sanitize", counts_json(a.sanitize.total())},
               {"unidentified_tpkt_102", a.unidentified_tpkt},
               {"stability_window", "inclusive"},
               {"asn_histogram", json::object()}};
  for (const auto& [n, ases] : a.asn_protocols.histogram()) summary["asn_histogram"][std::to_string(n)] = ases;
  write_json(dir / "summary.json", summary);
}

}  // namespace icsscope
