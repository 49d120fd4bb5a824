// Acceptance checks: one PASS/FAIL line per criterion, non-zero exit if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "icsscope/pipeline.hpp"
#include "icsscope/report.hpp"
#include "icsscope/trafficgen.hpp"
#include "support.hpp"

using namespace icsscope;
using namespace testing_support;
using nlohmann::json;

namespace {

struct Outcome {
  bool ok{true};
  std::string detail;
};

#define REQUIRE(cond, msg)                      \
  do {                                          \
    if (!(cond)) {                              \
      std::ostringstream os_;                   \
      os_ << msg;                               \
      return Outcome{false, os_.str()};         \
    }                                           \
  } while (0)

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::filesystem::path scenario_path(const std::string& name) {
  return std::filesystem::path(ICS_SCOPE_SCENARIOS) / (name + ".json");
}

// Compares every per-packet result against the generator's truth.
Outcome compare_with_truth(const Analysis& a, const std::vector<TruthRecord>& truth) {
  REQUIRE(a.packets.size() == truth.size(), "packet count " << a.packets.size() << " vs truth " << truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto& p = a.packets[i];
    const auto& t = truth[i];
    REQUIRE(p.ts_us == t.ts_us, "packet " << i << ": timestamp differs");
    REQUIRE(p.dissection == t.dissection, "packet " << i << ": dissection differs");
    REQUIRE(p.direction == t.direction, "packet " << i << ": direction differs");
    if (!t.dissection) {
      REQUIRE(!p.sanitize && !p.traffic_class, "packet " << i << ": non-candidate was judged");
      continue;
    }
    REQUIRE(p.sanitize == t.sanitize, "packet " << i << ": sanitize verdict differs");
    REQUIRE(p.traffic_class && *p.traffic_class == t.traffic_class, "packet " << i << ": traffic class differs");
  }
  return {};
}

Analysis analyze_corpus(const Corpus& corpus, const std::filesystem::path& dir, PipelineConfig* keep = nullptr) {
  write_corpus(corpus, dir);
  auto config = PipelineConfig::load(dir / "config.json");
  auto a = analyze(config);
  if (keep) *keep = std::move(config);
  return a;
}

// 1
Outcome thresholds() {
  auto t0 = std::chrono::steady_clock::now();
  const std::map<ProtocolId, std::size_t> table{{ProtocolId::Modbus, 74}, {ProtocolId::S7comm, 93},
                                                {ProtocolId::EthernetIP, 74}, {ProtocolId::BACnet, 46},
                                                {ProtocolId::DNP3, 62},   {ProtocolId::HartIP, 78},
                                                {ProtocolId::Iec104, 76}};
  for (const auto& [p, min] : table) {
    auto m = golden_message(p);
    REQUIRE(m.expected.verdict == Verdict::WellFormed, protocol_name(p) << ": golden packet is not WellFormed");
    auto frame = golden_frame(m);
    REQUIRE(frame.size() >= min, protocol_name(p) << ": golden frame shorter than threshold");
    for (std::size_t len = 42; len <= frame.size(); ++len) {
      auto d = dissect(record_of(frame, static_cast<std::uint32_t>(len)));
      bool identified = d && d->protocol == p;
      REQUIRE(identified == (len >= min), protocol_name(p) << " at " << len << " bytes: identified=" << identified);
    }
  }
  auto secs = seconds_since(t0);
  REQUIRE(secs < 1.0, "took " << secs << " s");
  return {};
}

// 2
Outcome sanitize_arithmetic() {
  auto records = planted_corpus(2);
  std::vector<Candidate> candidates;
  for (const auto& r : records) {
    if (auto d = dissect(r)) candidates.push_back({&r, *d});
  }
  auto c = sanitize(candidates, DpiCatalog::builtin()).report.total();
  REQUIRE(c.candidates_in == 100 && c.after_step1 == 99 && c.after_step2 == 14 && c.after_step3 == 13,
          "got " << c.candidates_in << "/" << c.after_step1 << "/" << c.after_step2 << "/" << c.after_step3);
  return {};
}

ScenarioSpec bulk_spec() {
  auto doc = json::parse(R"({
    "seed": 100000, "start": "2018-01-01", "end": "2018-01-20", "vantage": "ixp", "sample_interval": 16384,
    "flows": [
      {"kind": "Industrial", "protocol": "Modbus", "src": {"cidr": "10.1.0.0/24"}, "dst": {"cidr": "10.2.0.0/24"},
       "schedule": {"packets_per_day": 2000}},
      {"kind": "Industrial", "protocol": "BACnet", "src": {"cidr": "10.3.0.0/24"}, "dst": {"cidr": "10.4.0.0/24"},
       "schedule": {"packets_per_day": 1500}},
      {"kind": "ScannerSweep", "protocol": "S7comm", "src": {"cidr": "10.5.0.0/29"},
       "dst": {"cidr": "10.6.0.0/20", "count": 4000}, "schedule": {"packets_per_day": 1000},
       "scanner_project": "bulk"},
      {"kind": "Malformed", "protocol": "DNP3", "src": {"cidr": "10.7.0.0/24"}, "dst": {"cidr": "10.8.0.0/24"},
       "schedule": {"packets_per_day": 500}},
      {"kind": "Backscatter", "protocol": "Iec104", "src": {"cidr": "10.9.0.0/24"}, "dst": {"cidr": "10.10.0.0/24"},
       "schedule": {"packets_per_day": 250}},
      {"kind": "DpiDecoy", "protocol": "BACnet", "src": {"cidr": "10.11.0.0/24"}, "dst": {"cidr": "10.12.0.0/24"},
       "schedule": {"packets_per_day": 250}}
    ]
  })");
  return ScenarioSpec::parse(doc);
}

// 3
Outcome end_to_end() {
  for (auto name : {"industrial-stable", "scanner-sweep", "mixed"}) {
    auto corpus = generate(ScenarioSpec::load(scenario_path(name)));
    auto a = analyze_corpus(corpus, fresh_dir(std::string("accept_e2e_") + name));
    auto o = compare_with_truth(a, corpus.truth);
    REQUIRE(o.ok, name << ": " << o.detail);
  }
  auto corpus = generate(bulk_spec());
  REQUIRE(corpus.frames.size() >= 100'000, "bulk corpus has only " << corpus.frames.size() << " packets");
  auto dir = fresh_dir("accept_e2e_bulk");
  write_corpus(corpus, dir);
  auto config = PipelineConfig::load(dir / "config.json");
  auto t0 = std::chrono::steady_clock::now();
  auto a = analyze(config);
  auto secs = seconds_since(t0);
  auto o = compare_with_truth(a, corpus.truth);
  REQUIRE(o.ok, "bulk: " << o.detail);
  REQUIRE(secs < 10.0, corpus.frames.size() << " packets took " << secs << " s");
  return {true, std::to_string(corpus.frames.size()) + " packets in " + std::to_string(secs) + " s"};
}

// 4
Outcome host_stability_tuple() {
  auto corpus = generate(ScenarioSpec::load(scenario_path("industrial-stable")));
  auto a = analyze_corpus(corpus, fresh_dir("accept_stability"));
  bool found = false;
  for (const auto& h : host_stability(a.hosts)) {
    if (h.ip == *Ipv4::parse("198.51.100.7")) {
      found = true;
      REQUIRE(h.window == 179 && h.active_days == 146, "stable host gave (" << h.window << ", " << h.active_days << ")");
    }
  }
  REQUIRE(found, "stable host missing from the analysis");

  Rng rng(404);
  HostActivityTracker tracker;
  std::map<std::uint32_t, std::vector<std::int64_t>> raw;
  while (raw.size() < 1000) {
    auto ip = static_cast<std::uint32_t>(rng.next());
    auto n = rng.between(1, 60);
    for (std::uint64_t i = 0; i < n; ++i) {
      auto ts = 1'514'764'800'000'000LL + static_cast<std::int64_t>(rng.uniform(365ULL * 86'400'000'000ULL));
      raw[ip].push_back(ts);
      tracker.add(Ipv4{ip}, ts);
    }
  }
  auto rows = host_stability(tracker);
  REQUIRE(rows.size() == raw.size(), "host count differs");
  for (const auto& h : rows) {
    const auto& ts = raw.at(h.ip.value);
    std::set<std::int64_t> days;
    std::int64_t lo = ts[0], hi = ts[0];
    for (auto t : ts) {
      days.insert(t / 86'400'000'000LL);
      lo = std::min(lo, t);
      hi = std::max(hi, t);
    }
    auto w = hi / 86'400'000'000LL - lo / 86'400'000'000LL + 1;
    REQUIRE(static_cast<std::int64_t>(h.window) == w && h.active_days == days.size(),
            h.ip.str() << ": (" << h.window << ", " << h.active_days << ") vs (" << w << ", " << days.size() << ")");
  }
  return {};
}

ScenarioSpec random_spec(Rng& rng, std::uint64_t seed) {
  static const char* kProjects[] = {"shodan", "censys", "rapid7"};
  json flows = json::array();
  auto nflows = rng.between(3, 8);
  for (std::uint64_t i = 0; i < nflows; ++i) {
    bool sweep = rng.chance(0.3);
    auto p = kAllProtocols[rng.uniform(7)];
    auto ppd = rng.between(1, 20);
    json f{{"kind", sweep ? "ScannerSweep" : "Industrial"},
           {"protocol", protocol_name(p)},
           {"src", {{"cidr", "10." + std::to_string(i) + ".1.0/28"}, {"count", rng.between(1, 16)}}},
           {"dst", {{"cidr", "10." + std::to_string(i) + ".2.0/28"}, {"count", rng.between(1, std::min<std::uint64_t>(16, ppd * 5))}}},
           {"schedule", {{"packets_per_day", ppd}}},
           {"request_reply_ratio", static_cast<double>(rng.uniform(11)) / 10.0}};
    if (rng.chance(0.3)) f["scanner_project"] = kProjects[rng.uniform(3)];
    if (rng.chance(0.3)) f["rdns_project"] = kProjects[rng.uniform(3)];
    switch (rng.uniform(3)) {
      case 0: f["honeypot"] = "none"; break;
      case 1: f["honeypot"] = "all"; break;
      default: f["honeypot"] = "ics"; break;
    }
    flows.push_back(f);
  }
  json doc{{"seed", seed}, {"start", "2018-01-01"}, {"end", "2018-01-05"}, {"flows", flows}};
  return ScenarioSpec::parse(doc);
}

// 5
Outcome filter_monotonicity() {
  Rng rng(5555);
  const FilterSet scanners_hp_all{true, false, true};
  auto dir = fresh_dir("accept_monotonic");
  for (int run = 0; run < 100; ++run) {
    auto corpus = generate(random_spec(rng, 9000 + run));
    write_corpus(corpus, dir);
    auto config = PipelineConfig::load(dir / "config.json");
    auto ctx = config.classifier();
    auto cap = read_capture(dir / "trace.pcap", corpus.meta);
    std::uint64_t kept = 0, ind_all = 0, ind_ics = 0, ind_scan = 0;
    for (const auto& rec : cap.records) {
      auto d = dissect(rec);
      if (!d || judge({&rec, *d}, config.catalog) != SanitizeVerdict::Kept) continue;
      ++kept;
      ind_all += classify(rec, ctx, scanners_hp_all).label == Label::Industrial;
      ind_ics += classify(rec, ctx, FilterSet::scanners_and_ics()).label == Label::Industrial;
      ind_scan += classify(rec, ctx, FilterSet::scanners_only()).label == Label::Industrial;
    }
    REQUIRE(kept > 0, "corpus " << run << " kept nothing");
    REQUIRE(ind_all <= ind_ics && ind_ics <= ind_scan,
            "corpus " << run << ": " << ind_all << " > " << ind_ics << " or " << ind_ics << " > " << ind_scan);
  }
  return {};
}

// 6
Outcome locality() {
  std::uint64_t topologies = 0, checks = 0;
  for (Asn n = 1; n <= 6; ++n) {
    for (std::uint32_t members = 1; members < (1u << n); ++members) {
      std::vector<Asn> member_list, others;
      for (Asn a = 1; a <= n; ++a) ((members >> (a - 1)) & 1 ? member_list : others).push_back(a);
      // Every non-member is in no cone or in exactly one member's cone.
      std::uint64_t combos = 1;
      for (std::size_t i = 0; i < others.size(); ++i) combos *= member_list.size() + 1;
      for (std::uint64_t code = 0; code < combos; ++code) {
        IxpTopology topo;
        std::map<Asn, std::set<Asn>> cones;
        for (auto m : member_list) cones[m];
        auto rest = code;
        for (auto o : others) {
          auto pick = rest % (member_list.size() + 1);
          rest /= member_list.size() + 1;
          if (pick) cones[member_list[pick - 1]].insert(o);
        }
        for (const auto& [m, cone] : cones) topo.add_member(m, cone);
        ++topologies;
        std::vector<std::optional<Asn>> values{std::nullopt};
        for (Asn a = 1; a <= n; ++a) values.push_back(a);
        for (auto s : values) {
          for (auto d : values) {
            auto ingress = s ? topo.member_for_asn(*s) : std::nullopt;
            auto egress = d ? topo.member_for_asn(*d) : std::nullopt;
            for (auto i : {ingress, std::optional<Asn>{member_list.front()}}) {
              for (auto e : {egress, std::optional<Asn>{member_list.back()}}) {
                bool local = is_local(s, i, e, d).value_or(false);
                bool m2m = transition(s, d, i, e, topo) == Transition::MemberToMember;
                ++checks;
                REQUIRE(local == m2m, "n=" << n << " members=" << members << " src=" << s.value_or(0)
                                           << " dst=" << d.value_or(0));
              }
            }
          }
        }
      }
    }
  }

  auto corpus = generate(ScenarioSpec::load(scenario_path("mixed")));
  auto a = analyze_corpus(corpus, fresh_dir("accept_locality"));
  REQUIRE(!a.transitions.counts().empty(), "mixed scenario produced no transitions");
  for (const auto& [key, counts] : a.transitions.counts()) {
    if (counts[0] + counts[1] + counts[2] + counts[3] == 0) continue;
    double sum = 0;
    for (auto t : kAllTransitions) sum += TransitionReport::share_pct(counts, t).value_or(0.0);
    REQUIRE(std::fabs(sum - 100.0) < 1e-9, protocol_name(key.first) << ": shares sum to " << sum);
  }
  return {true, std::to_string(topologies) + " topologies, " + std::to_string(checks) + " checks"};
}

// 7
Outcome lpm_oracle() {
  Rng rng(77);
  std::vector<std::pair<Cidr, Asn>> prefixes;
  std::vector<std::pair<Cidr, std::string>> countries;
  std::set<Cidr> seen;
  while (prefixes.size() < 10'000) {
    auto len = static_cast<std::uint8_t>(rng.between(8, 32));
    Cidr c{Ipv4{static_cast<std::uint32_t>(rng.next()) & Cidr::mask_of(len)}, len};
    if (!seen.insert(c).second) continue;
    prefixes.emplace_back(c, static_cast<Asn>(rng.between(1, 400000)));
    std::string cc{static_cast<char>('A' + rng.uniform(26)), static_cast<char>('A' + rng.uniform(26))};
    countries.emplace_back(c, cc);
  }
  // Covering short prefixes so nested matches are exercised.
  for (int i = 0; i < 200; ++i) {
    auto [inner, _] = prefixes[rng.uniform(prefixes.size())];
    if (inner.length <= 8) continue;
    auto len = static_cast<std::uint8_t>(rng.between(8, inner.length - 1));
    Cidr outer{Ipv4{inner.base.value & Cidr::mask_of(len)}, len};
    if (!seen.insert(outer).second) continue;
    prefixes.emplace_back(outer, static_cast<Asn>(rng.between(1, 400000)));
    countries.emplace_back(outer, "ZZ");
  }

  std::vector<Ipv4> ips;
  for (int i = 0; i < 10'000; ++i) {
    if (i % 2) {
      const auto& c = prefixes[rng.uniform(prefixes.size())].first;
      ips.push_back(c.at(rng.uniform(c.size())));
    } else {
      ips.push_back(Ipv4{static_cast<std::uint32_t>(rng.next())});
    }
  }

  auto t0 = std::chrono::steady_clock::now();
  AsnTable asn;
  GeoTable geo;
  for (const auto& [c, a] : prefixes) asn.add(c, a);
  for (const auto& [c, cc] : countries) geo.add(c, cc);
  std::vector<std::optional<Asn>> got_asn;
  std::vector<std::optional<CountryCode>> got_cc;
  for (auto ip : ips) {
    got_asn.push_back(map_asn(ip, asn));
    got_cc.push_back(geo.lookup(ip));
  }
  auto secs = seconds_since(t0);

  for (std::size_t i = 0; i < ips.size(); ++i) {
    int best = -1;
    std::optional<Asn> want_asn;
    std::optional<std::string> want_cc;
    for (std::size_t k = 0; k < prefixes.size(); ++k) {
      const auto& c = prefixes[k].first;
      if (c.contains(ips[i]) && c.length > best) {
        best = c.length;
        want_asn = prefixes[k].second;
        want_cc = countries[k].second;
      }
    }
    REQUIRE(got_asn[i] == want_asn, ips[i].str() << ": ASN mismatch");
    std::optional<std::string> cc;
    if (got_cc[i]) cc = std::string(got_cc[i]->data(), 2);
    REQUIRE(cc == want_cc, ips[i].str() << ": country mismatch");
  }
  REQUIRE(secs < 5.0, "lookups took " << secs << " s");
  return {};
}

// 8
Outcome linearity_and_determinism() {
  Rng rng(88);
  for (int i = 0; i < 1000; ++i) {
    auto a = rng.uniform(1ULL << 32), b = rng.uniform(1ULL << 32), k = rng.between(1, 1ULL << 16);
    REQUIRE(extrapolate(a + b, k) == extrapolate(a, k) + extrapolate(b, k), "additivity fails for " << a << "+" << b);
  }
  auto dir = fresh_dir("accept_determinism");
  write_corpus(generate(ScenarioSpec::load(scenario_path("mixed"))), dir / "corpus");
  for (auto out : {"r1", "r2"}) {
    auto config = PipelineConfig::load(dir / "corpus" / "config.json");
    write_report(analyze(config), config, dir / out);
  }
  std::size_t files = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir / "r1")) {
    auto other = dir / "r2" / entry.path().filename();
    REQUIRE(std::filesystem::exists(other), entry.path().filename() << " missing from second run");
    REQUIRE(slurp(entry.path()) == slurp(other), entry.path().filename() << " differs");
    ++files;
  }
  std::size_t files2 = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir / "r2")) ++files2;
  REQUIRE(files == files2 && files > 0, "bundle file sets differ");
  return {};
}

// 9
Outcome scan_overlap_bound() {
  Rng rng(99);
  for (int run = 0; run < 200; ++run) {
    PassiveHosts passive;
    ScanSnapshot snap;
    for (auto p : kAllProtocols) {
      auto universe = rng.between(1, 200);
      for (auto role : {HostRole::Source, HostRole::Destination}) {
        auto n = rng.uniform(universe);
        for (std::uint64_t i = 0; i < n; ++i) passive[{p, role}].insert(static_cast<std::uint32_t>(rng.uniform(universe)));
      }
      for (std::uint64_t ip = 0; ip < universe; ++ip) {
        if (!rng.chance(0.6)) continue;
        snap.protocols[p].transport.insert(static_cast<std::uint32_t>(ip));
        if (rng.chance(0.1)) snap.protocols[p].application.insert(static_cast<std::uint32_t>(ip));
      }
    }
    snap.validate();
    for (const auto& row : scan_overlap(passive, snap)) {
      REQUIRE(row.application_hits <= row.transport_hits && row.application_pct() <= row.transport_pct(),
              "run " << run << " " << protocol_name(row.protocol) << "/" << host_role_name(row.role));
    }
  }
  auto corpus = generate(ScenarioSpec::load(scenario_path("mixed")));
  auto a = analyze_corpus(corpus, fresh_dir("accept_overlap"));
  REQUIRE(!a.scan_overlap.empty(), "mixed scenario produced no overlap rows");
  for (const auto& row : a.scan_overlap) {
    REQUIRE(row.application_hits <= row.transport_hits, "mixed " << protocol_name(row.protocol));
  }
  return {};
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::warn);
  struct Criterion {
    const char* name;
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> criteria{
      {"1 min-length thresholds", thresholds},
      {"2 sanitization arithmetic 100/99/14/13", sanitize_arithmetic},
      {"3 end-to-end ground truth", end_to_end},
      {"4 host stability (179, 146)", host_stability_tuple},
      {"5 filter-family monotonicity", filter_monotonicity},
      {"6 locality consistency", locality},
      {"7 LPM oracle", lpm_oracle},
      {"8 extrapolation linearity and determinism", linearity_and_determinism},
      {"9 scan-overlap bound", scan_overlap_bound},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    auto secs = seconds_since(t0);
    std::printf("%s  %-45s %7.3f s%s%s\n", o.ok ? "PASS" : "FAIL", c.name, secs, o.detail.empty() ? "" : "  ",
                o.detail.c_str());
    failed += !o.ok;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed ? 1 : 0;
}
