#include <gtest/gtest.h>

#include <fstream>
#include <json.hpp>

#include "icsscope/dissectors.hpp"
#include "icsscope/sanitizer.hpp"
#include "support.hpp"

using namespace icsscope;
using namespace testing_support;

namespace {

// MSB-first CRC over bit-reversed input, output reversed back: an
// independent formulation of the reflected DNP3 CRC.
std::uint16_t crc_oracle(std::span<const std::uint8_t> data) {
  auto rev8 = [](std::uint8_t b) {
    std::uint8_t r = 0;
    for (int i = 0; i < 8; ++i) r |= static_cast<std::uint8_t>(((b >> i) & 1) << (7 - i));
    return r;
  };
  std::uint16_t crc = 0;
  for (auto byte : data) {
    crc ^= static_cast<std::uint16_t>(rev8(byte) << 8);
    for (int i = 0; i < 8; ++i) crc = (crc & 0x8000) ? static_cast<std::uint16_t>((crc << 1) ^ 0x3D65) : crc << 1;
  }
  std::uint16_t out = 0;
  for (int i = 0; i < 16; ++i) out |= static_cast<std::uint16_t>(((crc >> i) & 1) << (15 - i));
  return static_cast<std::uint16_t>(~out);
}

AppMessage on_port(AppMessage m, std::uint16_t port) {
  m.server_port = port;
  return m;
}

}  // namespace

TEST(Golden, FullFramesMatchExpectation) {
  for (auto p : kAllProtocols) {
    auto m = golden_message(p);
    EXPECT_EQ(dissect(record_of(m)), m.expected) << protocol_name(p);
    auto bad = golden_malformed_message(p);
    ASSERT_EQ(bad.expected.verdict, Verdict::Malformed);
    EXPECT_EQ(dissect(record_of(bad)), bad.expected) << protocol_name(p);
  }
}

TEST(Golden, TruncationThresholds) {
  for (auto p : kAllProtocols) {
    auto frame = golden_frame(golden_message(p));
    auto min = min_identifiable_length(p);
    ASSERT_GE(frame.size(), min);
    for (std::size_t len = 42; len <= frame.size(); ++len) {
      auto d = dissect(record_of(frame, static_cast<std::uint32_t>(len)));
      if (len < min) {
        EXPECT_FALSE(d) << protocol_name(p) << " at " << len;
      } else {
        ASSERT_TRUE(d) << protocol_name(p) << " at " << len;
        EXPECT_EQ(d->protocol, p);
      }
    }
  }
}

TEST(Golden, CommittedCorpusMatchesManifest) {
  auto dir = std::filesystem::path(ICS_SCOPE_DATA_DIR) / "golden";
  std::ifstream in(dir / "manifest.json");
  ASSERT_TRUE(in) << "missing " << (dir / "manifest.json");
  auto manifest = nlohmann::json::parse(in);
  ASSERT_EQ(manifest.size(), 14u);
  for (const auto& entry : manifest) {
    auto cap = read_capture(dir / entry["file"].get<std::string>(), {});
    ASSERT_EQ(cap.records.size(), 1u);
    EXPECT_EQ(cap.records[0].captured.size(), entry["frame_length"].get<std::size_t>());
    auto d = dissect(cap.records[0]);
    ASSERT_TRUE(d) << entry["file"];
    EXPECT_EQ(protocol_name(d->protocol), entry["protocol"].get<std::string>());
    EXPECT_EQ(verdict_name(d->verdict), entry["verdict"].get<std::string>());
    EXPECT_EQ(role_name(d->role), entry["role"].get<std::string>());
    if (entry["function_code"].is_null()) {
      EXPECT_FALSE(d->function_code);
    } else {
      EXPECT_EQ(d->function_code, entry["function_code"].get<std::uint32_t>());
    }
  }
}

TEST(Golden, ModbusReadHoldingRegisters) {
  auto d = dissect(record_of(golden_message(ProtocolId::Modbus)));
  ASSERT_TRUE(d);
  EXPECT_EQ(d->function_code, 3u);
  EXPECT_EQ(d->role, Role::Request);
  EXPECT_EQ(d->kind, DissectorKind::Normal);
}

TEST(Dnp3Crc, AgreesWithBitwiseOracle) {
  Rng rng(99);
  for (int i = 0; i < 2000; ++i) {
    std::vector<std::uint8_t> data(rng.uniform(40));
    for (auto& b : data) b = static_cast<std::uint8_t>(rng.uniform(256));
    EXPECT_EQ(dnp3_crc(data), crc_oracle(data));
  }
}

TEST(Dnp3Crc, LinkResetFrameHeader) {
  std::vector<std::uint8_t> header{0x05, 0x64, 0x05, 0xC0, 0x01, 0x00, 0x00, 0x04};
  EXPECT_EQ(crc_oracle(header), 0x21E9);
  EXPECT_EQ(dnp3_crc(header), 0x21E9);
}

TEST(Templates, RandomMessagesDissectAsExpected) {
  Rng rng(2024);
  for (auto p : kAllProtocols) {
    for (int i = 0; i < 300; ++i) {
      for (auto m : {request_message(p, rng), reply_message(p, rng), malformed_message(p, rng)}) {
        auto d = dissect(record_of(m));
        ASSERT_TRUE(d) << protocol_name(p);
        EXPECT_EQ(*d, m.expected) << protocol_name(p) << " role " << role_name(m.expected.role);
      }
    }
  }
}

TEST(Heuristics, IdentifyOffPort) {
  for (auto p : {ProtocolId::Iec104, ProtocolId::DNP3, ProtocolId::S7comm}) {
    auto m = on_port(golden_message(p), 9999);
    auto d = dissect(record_of(m));
    ASSERT_TRUE(d) << protocol_name(p);
    EXPECT_EQ(d->protocol, p);
    EXPECT_EQ(d->kind, DissectorKind::Heuristic);
    EXPECT_EQ(d->verdict, Verdict::WellFormed);
  }
}

TEST(Heuristics, RejectInsteadOfMalformed) {
  // Off-port malformed packets are rejected by the heuristics, not reported Malformed.
  for (auto p : {ProtocolId::Iec104, ProtocolId::DNP3, ProtocolId::S7comm}) {
    auto m = on_port(golden_malformed_message(p), 9999);
    EXPECT_FALSE(dissect(record_of(m))) << protocol_name(p);
  }
}

TEST(Heuristics, NoneForPortOnlyProtocols) {
  for (auto p : {ProtocolId::Modbus, ProtocolId::EthernetIP, ProtocolId::BACnet, ProtocolId::HartIP}) {
    EXPECT_FALSE(dissect(record_of(on_port(golden_message(p), 9999)))) << protocol_name(p);
  }
}

TEST(Dissect, PlainWebTrafficIsNotIcs) {
  const std::string get = "GET / HTTP/1.1\r\nHost: example\r\n\r\n";
  auto frame = tcp_frame(kGoldenClient, kGoldenServer, 50000, 80, {get.begin(), get.end()});
  EXPECT_FALSE(dissect(record_of(frame)));
}

TEST(Dissect, HttpOnModbusPortIsMalformedModbus) {
  const std::string get = "GET / HTTP/1.1\r\nHost: example\r\n\r\n";
  auto frame = tcp_frame(kGoldenClient, kGoldenServer, 50000, 502, {get.begin(), get.end()});
  auto d = dissect(record_of(frame));
  ASSERT_TRUE(d);
  EXPECT_EQ(d->protocol, ProtocolId::Modbus);
  EXPECT_EQ(d->verdict, Verdict::Malformed);
}

TEST(Dissect, EmptyPayloadIsNotACandidate) {
  for (std::uint16_t port : {502, 102, 44818, 20000, 5094, 2404}) {
    EXPECT_FALSE(dissect(record_of(tcp_frame(kGoldenClient, kGoldenServer, 50000, port, {})))) << port;
  }
}

TEST(Dissect, IcmpErrorQuotesTheDatagram) {
  for (auto p : kAllProtocols) {
    auto m = golden_message(p);
    auto inner = golden_frame(m);
    FrameSpec outer;
    outer.src = kGoldenServer;
    outer.dst = kGoldenClient;
    auto icmp = build_icmp_error(outer, 3, 3, inner, inner.size());
    auto rec = record_of(icmp);
    ASSERT_EQ(rec.ip_proto, ipproto::kIcmp);
    auto d = dissect(rec);
    ASSERT_TRUE(d) << protocol_name(p);
    EXPECT_EQ(d->protocol, p);
    EXPECT_EQ(strip_tunnels(rec, *d), SanitizeVerdict::DroppedTunnel);
  }
}

TEST(Dissect, IcmpEchoIsIgnored) {
  auto inner = golden_frame(golden_message(ProtocolId::Modbus));
  FrameSpec outer;
  outer.src = kGoldenServer;
  outer.dst = kGoldenClient;
  EXPECT_FALSE(dissect(record_of(build_icmp_error(outer, 0, 0, inner, inner.size()))));
}

TEST(Names, RoundTrip) {
  for (auto k : {DissectorKind::Normal, DissectorKind::Heuristic}) EXPECT_EQ(kind_from_name(kind_name(k)), k);
  for (auto r : {Role::Request, Role::Reply, Role::Unknown}) EXPECT_EQ(role_from_name(role_name(r)), r);
  for (auto v : {Verdict::WellFormed, Verdict::Malformed}) EXPECT_EQ(verdict_from_name(verdict_name(v)), v);
  for (auto p : kAllProtocols) EXPECT_EQ(protocol_from_name(protocol_name(p)), p);
}

TEST(OpcodeTable, LoadsShippedTable) {
  auto t = OpcodeTable::load(std::filesystem::path(ICS_SCOPE_DATA_DIR) / "opcodes.json");
  EXPECT_EQ(t.action(ProtocolId::Modbus, 3), "read_holding_registers");
  EXPECT_EQ(t.action(ProtocolId::S7comm, 0x04), "read_var");
  EXPECT_FALSE(t.action(ProtocolId::Modbus, 200));
}
