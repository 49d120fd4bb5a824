#include <gtest/gtest.h>

#include "icsscope/metrics.hpp"
#include "icsscope/trafficgen.hpp"
#include "support.hpp"

using namespace icsscope;
using namespace testing_support;
using nlohmann::json;

namespace {

json base_spec() {
  return json::parse(R"({
    "seed": 7, "start": "2018-01-01", "end": "2018-01-10",
    "flows": [{
      "kind": "Industrial", "protocol": "Modbus",
      "src": {"ip": "192.0.2.1"}, "dst": {"ip": "198.51.100.1"},
      "schedule": {"packets_per_day": 3}
    }]
  })");
}

void expect_invalid(const json& doc, const std::string& fragment) {
  try {
    ScenarioSpec::parse(doc).validate();
    auto spec = ScenarioSpec::parse(doc);
    generate(spec);
    ADD_FAILURE() << "accepted: " << doc.dump();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
  }
}

ScenarioSpec scenario(const std::string& name) {
  return ScenarioSpec::load(std::filesystem::path(ICS_SCOPE_SCENARIOS) / (name + ".json"));
}

}  // namespace

TEST(Scenario, BaseIsValid) {
  auto spec = ScenarioSpec::parse(base_spec());
  EXPECT_NO_THROW(spec.validate());
  auto c = generate(spec);
  EXPECT_EQ(c.frames.size(), 30u);
  EXPECT_EQ(c.truth.size(), 30u);
}

TEST(Scenario, ValidationErrors) {
  auto doc = base_spec();
  doc["flows"][0]["schedule"]["start"] = "2017-12-31";
  expect_invalid(doc, "schedule");

  doc = base_spec();
  doc["flows"][0]["schedule"]["active_days"] = {"2018-02-01"};
  expect_invalid(doc, "active day");

  doc = base_spec();
  doc["flows"][0]["schedule"]["active_day_count"] = 11;
  expect_invalid(doc, "active_day_count");

  doc = base_spec();
  doc["flows"][0]["src"] = {{"cidr", "192.0.2.0/30"}, {"count", 5}};
  expect_invalid(doc, "count");

  doc = base_spec();
  doc["flows"][0]["request_reply_ratio"] = 1.5;
  expect_invalid(doc, "request_reply_ratio");

  doc = base_spec();
  doc["flows"][0]["kind"] = "ScannerSweep";
  doc["flows"][0]["dst"] = {{"cidr", "198.51.100.0/24"}, {"count", 200}};
  expect_invalid(doc, "too large");

  doc = base_spec();
  doc["flows"][0]["kind"] = "DpiDecoy";
  expect_invalid(doc, "BACnet");

  doc = base_spec();
  doc["flows"][0]["src"]["member"] = 64999;
  expect_invalid(doc, "member");

  doc = base_spec();
  doc["flows"][0]["src"]["country"] = "Germany";
  expect_invalid(doc, "country");

  doc = base_spec();
  doc["flows"][0]["kind"] = "Sideways";
  expect_invalid(doc, "kind");

  doc = base_spec();
  doc["start"] = "2018-02-30";
  expect_invalid(doc, "start");

  doc = base_spec();
  doc["snap_len"] = 60;
  expect_invalid(doc, "snap_len");

  doc = base_spec();
  doc["flows"].push_back(doc["flows"][0]);
  doc["flows"][0]["src"]["asn"] = 64500;
  doc["flows"][1]["src"]["asn"] = 64501;
  expect_invalid(doc, "ASN");
}

TEST(Generate, Deterministic) {
  auto spec = scenario("mixed");
  auto a = generate(spec);
  auto b = generate(spec);
  ASSERT_EQ(a.frames.size(), b.frames.size());
  for (std::size_t i = 0; i < a.frames.size(); ++i) {
    EXPECT_EQ(a.frames[i].ts_us, b.frames[i].ts_us);
    EXPECT_EQ(a.frames[i].bytes, b.frames[i].bytes);
  }
  EXPECT_EQ(a.truth, b.truth);
  spec.seed += 1;
  auto c = generate(spec);
  bool differs = c.frames.size() != a.frames.size();
  for (std::size_t i = 0; !differs && i < a.frames.size(); ++i) differs = a.frames[i].bytes != c.frames[i].bytes;
  EXPECT_TRUE(differs);
}

TEST(Generate, SortedAndIndexed) {
  auto c = generate(scenario("scanner-sweep"));
  for (std::size_t i = 0; i < c.truth.size(); ++i) {
    EXPECT_EQ(c.truth[i].index, i);
    EXPECT_EQ(c.truth[i].ts_us, c.frames[i].ts_us);
    if (i) EXPECT_LE(c.frames[i - 1].ts_us, c.frames[i].ts_us);
  }
}

TEST(Generate, FramesDissectAsTruth) {
  auto c = generate(scenario("mixed"));
  for (std::size_t i = 0; i < c.frames.size(); ++i) {
    auto rec = record_of(c.frames[i].bytes, c.meta.snap_len);
    EXPECT_EQ(dissect(rec), c.truth[i].dissection) << i;
    EXPECT_EQ(direction(rec, PortRegistry::defaults()), c.truth[i].direction) << i;
  }
}

TEST(Generate, SweepCoversDestinations) {
  auto c = generate(scenario("scanner-sweep"));
  std::set<std::uint32_t> dsts;
  for (std::size_t i = 0; i < c.frames.size(); ++i) {
    if (c.truth[i].flow != 0) continue;
    dsts.insert(record_of(c.frames[i].bytes, c.meta.snap_len).dst_ip.value);
    EXPECT_EQ(c.truth[i].traffic_class.label, Label::NonIndustrial);
  }
  EXPECT_EQ(dsts.size(), 1000u);
}

TEST(Generate, StableHostTuple) {
  auto c = generate(scenario("industrial-stable"));
  HostActivityTracker tracker;
  auto server = *Ipv4::parse("198.51.100.7");
  auto client = *Ipv4::parse("203.0.113.5");
  for (std::size_t i = 0; i < c.frames.size(); ++i) {
    auto rec = record_of(c.frames[i].bytes, c.meta.snap_len, c.frames[i].ts_us);
    tracker.add(rec.src_ip, rec.ts_us);
    tracker.add(rec.dst_ip, rec.ts_us);
  }
  for (auto ip : {server, client}) {
    auto h = host_activity(ip, tracker.days().at(ip.value));
    EXPECT_EQ(h.window, 179u);
    EXPECT_EQ(h.active_days, 146u);
  }
}

TEST(Truth, JsonRoundTrip) {
  auto c = generate(scenario("mixed"));
  auto dir = fresh_dir("trafficgen_truth");
  write_corpus(c, dir);
  auto loaded = load_truth(dir / "truth.jsonl");
  EXPECT_EQ(loaded, c.truth);
  for (auto f : {"trace.pcap", "registry.json", "honeypots_all.txt", "honeypots_ics.txt", "rdns.csv", "asn.txt",
                 "geo.csv", "cones.json", "scan_snapshot.json", "dpi_catalog.json", "config.json"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  }
  CaptureMeta meta = c.meta;
  auto cap = read_capture(dir / "trace.pcap", meta);
  EXPECT_EQ(cap.records.size(), c.frames.size());
}

TEST(FlowKinds, NamesRoundTrip) {
  for (auto k : {FlowKind::Industrial, FlowKind::ScannerSweep, FlowKind::Backscatter, FlowKind::Malformed,
                 FlowKind::DpiDecoy}) {
    EXPECT_EQ(flow_kind_from_name(flow_kind_name(k)), k);
  }
}

TEST(Rng, UniformBoundsAndSpread) {
  Rng rng(1);
  std::array<int, 6> hist{};
  for (int i = 0; i < 60000; ++i) {
    auto v = rng.uniform(6);
    ASSERT_LT(v, 6u);
    ++hist[v];
  }
  for (auto h : hist) EXPECT_NEAR(h, 10000, 600);
  for (int i = 0; i < 1000; ++i) {
    auto v = rng.between(5, 9);
    EXPECT_GE(v, 5u);
    EXPECT_LE(v, 9u);
  }
}
