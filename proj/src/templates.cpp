#include "icsscope/templates.hpp"

#include <fstream>
#include <json.hpp>
#include <limits>

#include "icsscope/bytes.hpp"

namespace icsscope {

using bytes::put_be16;
using bytes::put_be32;
using Buffer = std::vector<std::uint8_t>;

std::uint64_t Rng::uniform(std::uint64_t n) {
  // Rejection sampling keeps draws identical across standard libraries.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t v;
  do {
    v = engine_();
  } while (v >= limit);
  return v % n;
}

bool Rng::chance(double p) {
  double u = static_cast<double>(engine_() >> 11) * (1.0 / 9007199254740992.0);
  return u < p;
}

namespace {

std::uint16_t fold(std::uint32_t sum) {
  while (sum >> 16) sum = (sum & 0xFFFF) + (sum >> 16);
  return static_cast<std::uint16_t>(~sum);
}

std::uint32_t sum16(std::span<const std::uint8_t> data, std::uint32_t sum = 0) {
  for (std::size_t i = 0; i + 1 < data.size(); i += 2) sum += bytes::be16(data, i);
  if (data.size() % 2) sum += std::uint32_t{data.back()} << 8;
  return sum;
}

void put_mac(Buffer& out, MacAddress mac) {
  for (int shift = 40; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(mac >> shift));
}

Buffer assemble(const FrameSpec& spec, std::uint8_t proto, const Buffer& l4, std::optional<std::uint16_t> total_override = {}) {
  Buffer f;
  f.reserve(34 + l4.size());
  put_mac(f, spec.dst_mac);
  put_mac(f, spec.src_mac);
  put_be16(f, 0x0800);
  std::size_t ip = f.size();
  f.push_back(0x45);
  f.push_back(0x00);
  put_be16(f, total_override.value_or(static_cast<std::uint16_t>(20 + l4.size())));
  put_be16(f, spec.ip_id);
  put_be16(f, 0x4000);
  f.push_back(64);
  f.push_back(proto);
  put_be16(f, 0);
  put_be32(f, spec.src.value);
  put_be32(f, spec.dst.value);
  auto csum = fold(sum16(std::span<const std::uint8_t>(f).subspan(ip, 20)));
  f[ip + 10] = static_cast<std::uint8_t>(csum >> 8);
  f[ip + 11] = static_cast<std::uint8_t>(csum);
  f.insert(f.end(), l4.begin(), l4.end());
  return f;
}

std::uint16_t pseudo_checksum(const FrameSpec& spec, std::uint8_t proto, const Buffer& l4) {
  Buffer pseudo;
  put_be32(pseudo, spec.src.value);
  put_be32(pseudo, spec.dst.value);
  pseudo.push_back(0);
  pseudo.push_back(proto);
  put_be16(pseudo, static_cast<std::uint16_t>(l4.size()));
  return fold(sum16(l4, sum16(pseudo)));
}

}  // namespace

std::vector<std::uint8_t> build_frame(const FrameSpec& spec) {
  Buffer l4;
  if (spec.proto == ipproto::kUdp) {
    put_be16(l4, spec.src_port);
    put_be16(l4, spec.dst_port);
    put_be16(l4, static_cast<std::uint16_t>(8 + spec.payload.size()));
    put_be16(l4, 0);
    l4.insert(l4.end(), spec.payload.begin(), spec.payload.end());
    auto c = pseudo_checksum(spec, ipproto::kUdp, l4);
    if (c == 0) c = 0xFFFF;
    l4[6] = static_cast<std::uint8_t>(c >> 8);
    l4[7] = static_cast<std::uint8_t>(c);
  } else {
    std::size_t header = spec.tcp_timestamps ? 32 : 20;
    put_be16(l4, spec.src_port);
    put_be16(l4, spec.dst_port);
    put_be32(l4, 0x10000000u + spec.ip_id);  // seq
    put_be32(l4, 0x20000000u);               // ack
    l4.push_back(static_cast<std::uint8_t>((header / 4) << 4));
    l4.push_back(0x18);  // PSH, ACK
    put_be16(l4, 0xFFFF);
    put_be16(l4, 0);
    put_be16(l4, 0);
    if (spec.tcp_timestamps) {
      for (std::uint8_t b : {0x01, 0x01, 0x08, 0x0A}) l4.push_back(b);
      put_be32(l4, 0x00010000u + spec.ip_id);
      put_be32(l4, 0x00020000u);
    }
    l4.insert(l4.end(), spec.payload.begin(), spec.payload.end());
    auto c = pseudo_checksum(spec, ipproto::kTcp, l4);
    l4[16] = static_cast<std::uint8_t>(c >> 8);
    l4[17] = static_cast<std::uint8_t>(c);
  }
  return assemble(spec, spec.proto, l4);
}

std::vector<std::uint8_t> build_icmp_error(const FrameSpec& outer, std::uint8_t type, std::uint8_t code,
                                           std::span<const std::uint8_t> original_frame,
                                           std::size_t quoted_payload_bytes) {
  auto ip = original_frame.subspan(14);
  std::size_t ihl = std::size_t{ip[0] & 0x0Fu} * 4;
  std::size_t l4_header = ip[9] == ipproto::kUdp ? 8 : std::size_t{static_cast<std::uint8_t>(ip[ihl + 12] >> 4)} * 4;
  std::size_t quoted = std::min(ip.size(), ihl + l4_header + quoted_payload_bytes);

  Buffer icmp{type, code, 0, 0, 0, 0, 0, 0};
  icmp.insert(icmp.end(), ip.begin(), ip.begin() + static_cast<std::ptrdiff_t>(quoted));
  auto c = fold(sum16(icmp));
  icmp[2] = static_cast<std::uint8_t>(c >> 8);
  icmp[3] = static_cast<std::uint8_t>(c);
  return assemble(outer, ipproto::kIcmp, icmp);
}

namespace {

AppMessage message(ProtocolId p, std::uint8_t transport, std::uint16_t port, bool from_server, Buffer payload,
                   Role role, std::optional<std::uint32_t> fc, Verdict verdict = Verdict::WellFormed) {
  AppMessage m;
  m.protocol = p;
  m.transport = transport;
  m.server_port = port;
  m.from_server = from_server;
  m.tcp_timestamps = true;
  m.payload = std::move(payload);
  m.expected = Dissection{p, DissectorKind::Normal, role, fc, verdict};
  return m;
}

void append_crc(Buffer& out, std::size_t from) {
  auto crc = dnp3_crc(std::span<const std::uint8_t>(out).subspan(from));
  bytes::put_le16(out, crc);
}

// DNP3 link frame with a single user-data block (<= 16 bytes).
Buffer dnp3_frame(std::uint8_t control, std::uint16_t dst, std::uint16_t src, const Buffer& user) {
  Buffer f{0x05, 0x64, static_cast<std::uint8_t>(5 + user.size()), control};
  bytes::put_le16(f, dst);
  bytes::put_le16(f, src);
  append_crc(f, 0);
  if (!user.empty()) {
    std::size_t at = f.size();
    f.insert(f.end(), user.begin(), user.end());
    append_crc(f, at);
  }
  return f;
}

Buffer hart_pdu(std::uint8_t delimiter, std::uint8_t address, std::uint8_t command, const Buffer& data) {
  Buffer pdu{delimiter, address, command, static_cast<std::uint8_t>(data.size())};
  pdu.insert(pdu.end(), data.begin(), data.end());
  std::uint8_t check = 0;
  for (auto b : pdu) check ^= b;
  pdu.push_back(check);
  return pdu;
}

Buffer hart_message(std::uint8_t type, std::uint16_t seq, const Buffer& body) {
  Buffer m{0x01, type, 0x03, 0x00};
  put_be16(m, seq);
  put_be16(m, static_cast<std::uint16_t>(8 + body.size()));
  m.insert(m.end(), body.begin(), body.end());
  return m;
}

std::uint16_t rand16(Rng& rng) { return static_cast<std::uint16_t>(rng.uniform(0x10000)); }
// Modbus transaction ids stay below 0x1000 so the MBAP header never resembles a
// text protocol or TLS record prefix.
std::uint16_t modbus_tid(Rng& rng) { return static_cast<std::uint16_t>(rng.between(1, 0x0FFF)); }

}  // namespace

AppMessage golden_message(ProtocolId protocol) {
  using P = ProtocolId;
  switch (protocol) {
    case P::Modbus:
      return message(P::Modbus, ipproto::kTcp, 502, false,
                     {0x00, 0x01, 0x00, 0x00, 0x00, 0x06, 0x01, 0x03, 0x00, 0x00, 0x00, 0x0A}, Role::Request, 3);
    case P::S7comm:
      // Ack-Data answering "Setup communication".
      return message(P::S7comm, ipproto::kTcp, 102, true,
                     {0x03, 0x00, 0x00, 0x1B, 0x02, 0xF0, 0x80, 0x32, 0x03, 0x00, 0x00, 0x00, 0x01, 0x00, 0x08, 0x00,
                      0x00, 0x00, 0x00, 0xF0, 0x00, 0x00, 0x01, 0x00, 0x01, 0x01, 0xE0},
                     Role::Reply, 0xF0);
    case P::EthernetIP: {
      // SendRRData with an empty unconnected-data item.
      Buffer b{0x6F, 0x00, 0x10, 0x00};
      b.resize(24, 0x00);
      for (std::uint8_t x : {0, 0, 0, 0, 0, 0, 0x02, 0x00, 0, 0, 0, 0, 0xB2, 0x00, 0x00, 0x00}) b.push_back(x);
      auto m = message(P::EthernetIP, ipproto::kUdp, 44818, false, b, Role::Request, 0x6F);
      return m;
    }
    case P::BACnet:
      // ReadProperty(device,1 / present-value).
      return message(P::BACnet, ipproto::kUdp, 47808, false,
                     {0x81, 0x0A, 0x00, 0x11, 0x01, 0x04, 0x00, 0x05, 0x01, 0x0C, 0x0C, 0x02, 0x00, 0x00, 0x01, 0x19,
                      0x55},
                     Role::Request, 0x0C);
    case P::DNP3:
      // READ group 1 var 0, range 0..5, over UDP.
      return message(P::DNP3, ipproto::kUdp, 20000, false,
                     dnp3_frame(0xC4, 0x000A, 0x0001, {0xC0, 0xC1, 0x01, 0x01, 0x00, 0x00, 0x00, 0x05}),
                     Role::Request, 1);
    case P::HartIP:
      // Pass-through of HART command 0 to short address 0.
      return message(P::HartIP, ipproto::kTcp, 5094, false, hart_message(0x00, 2, hart_pdu(0x02, 0x80, 0x00, {})),
                     Role::Request, 3);
    case P::Iec104:
      // General interrogation (C_IC_NA_1), activation.
      return message(P::Iec104, ipproto::kTcp, 2404, false,
                     {0x68, 0x0E, 0x00, 0x00, 0x00, 0x00, 0x64, 0x01, 0x06, 0x00, 0x01, 0x00, 0x00, 0x00, 0x00, 0x14},
                     Role::Request, 100);
  }
  return {};
}

AppMessage golden_malformed_message(ProtocolId protocol) {
  using P = ProtocolId;
  auto m = golden_message(protocol);
  m.expected.verdict = Verdict::Malformed;
  switch (protocol) {
    case P::Modbus:
      m.payload[3] = 0x01;  // MBAP protocol id 0x0001
      break;
    case P::S7comm:
      m.payload = {0x03, 0x00, 0x00, 0x19, 0x02, 0xF0, 0x80, 0x33, 0x01, 0x00, 0x00, 0x00, 0x01,
                   0x00, 0x08, 0x00, 0x00, 0xF0, 0x00, 0x00, 0x01, 0x00, 0x01, 0x01, 0xE0};
      m.from_server = false;
      m.expected.role = Role::Unknown;
      m.expected.function_code.reset();
      break;
    case P::EthernetIP:
      m.payload[0] = 0xEF;  // command 0xBEEF
      m.payload[1] = 0xBE;
      m.expected.function_code = 0xBEEF;
      break;
    case P::BACnet:
      m.payload = {0x81, 0x0F, 0x00, 0x04};
      m.expected.function_code.reset();
      break;
    case P::DNP3:
      m.payload[8] ^= 0x01;  // header CRC
      m.expected.function_code.reset();
      break;
    case P::HartIP:
      m.payload[1] = 0x09;  // message type
      m.expected.function_code.reset();
      break;
    case P::Iec104:
      m.payload[1] = 0xFF;  // APDU length 255
      m.expected.function_code.reset();
      break;
  }
  return m;
}

AppMessage request_message(ProtocolId protocol, Rng& rng) {
  using P = ProtocolId;
  switch (protocol) {
    case P::Modbus: {
      auto fc = static_cast<std::uint8_t>(rng.between(1, 4));
      Buffer b;
      put_be16(b, modbus_tid(rng));
      put_be16(b, 0);
      put_be16(b, 6);
      b.push_back(static_cast<std::uint8_t>(rng.between(1, 247)));
      b.push_back(fc);
      put_be16(b, rand16(rng));
      put_be16(b, static_cast<std::uint16_t>(rng.between(1, 125)));
      return message(P::Modbus, ipproto::kTcp, 502, false, b, Role::Request, fc);
    }
    case P::S7comm: {
      Buffer b{0x03, 0x00, 0x00, 0x1F, 0x02, 0xF0, 0x80, 0x32, 0x01, 0x00, 0x00};
      put_be16(b, rand16(rng));
      for (std::uint8_t x : {0x00, 0x0E, 0x00, 0x00, 0x04, 0x01, 0x12, 0x0A, 0x10, 0x02, 0x00, 0x01}) b.push_back(x);
      put_be16(b, static_cast<std::uint16_t>(rng.between(1, 999)));
      b.push_back(0x84);
      for (int i = 0; i < 3; ++i) b.push_back(static_cast<std::uint8_t>(rng.uniform(256)));
      return message(P::S7comm, ipproto::kTcp, 102, false, b, Role::Request, 0x04);
    }
    case P::EthernetIP: {
      std::uint16_t cmd = rng.chance(0.5) ? 0x0063 : 0x0004;
      Buffer b;
      bytes::put_le16(b, cmd);
      bytes::put_le16(b, 0);
      b.resize(12, 0);
      for (int i = 0; i < 8; ++i) b.push_back(static_cast<std::uint8_t>(rng.uniform(256)));
      b.resize(24, 0);
      return message(P::EthernetIP, ipproto::kTcp, 44818, false, b, Role::Request, cmd);
    }
    case P::BACnet: {
      static constexpr std::uint8_t kProperties[] = {0x55, 0x4D, 0x1C, 0x24, 0x51};
      Buffer b{0x81, 0x0A, 0x00, 0x11, 0x01, 0x04, 0x00, 0x05};
      b.push_back(static_cast<std::uint8_t>(rng.uniform(256)));
      b.push_back(0x0C);
      b.push_back(0x0C);
      put_be32(b, (std::uint32_t{static_cast<std::uint8_t>(rng.uniform(6))} << 22) |
                      static_cast<std::uint32_t>(rng.uniform(1u << 22)));
      b.push_back(0x19);
      b.push_back(kProperties[rng.uniform(std::size(kProperties))]);
      return message(P::BACnet, ipproto::kUdp, 47808, false, b, Role::Request, 0x0C);
    }
    case P::DNP3: {
      auto seq = static_cast<std::uint8_t>(rng.uniform(16));
      auto frame = dnp3_frame(0xC4, rand16(rng), rand16(rng),
                              {static_cast<std::uint8_t>(0xC0 | seq), static_cast<std::uint8_t>(0xC0 | seq), 0x01,
                               0x3C, static_cast<std::uint8_t>(rng.between(1, 4)), 0x06});
      return message(P::DNP3, ipproto::kTcp, 20000, false, frame, Role::Request, 1);
    }
    case P::HartIP: {
      static constexpr std::uint8_t kCommands[] = {0, 1, 2, 3};
      auto body = hart_pdu(0x02, 0x80, kCommands[rng.uniform(4)], {});
      return message(P::HartIP, ipproto::kTcp, 5094, false, hart_message(0x00, rand16(rng), body), Role::Request, 3);
    }
    case P::Iec104: {
      auto tx = static_cast<std::uint16_t>(rng.uniform(0x8000) << 1);
      auto rx = static_cast<std::uint16_t>(rng.uniform(0x8000) << 1);
      auto ca = rand16(rng);
      Buffer b;
      std::uint8_t type;
      if (rng.chance(0.5)) {
        type = 100;
        b = {0x68, 0x0E};
        bytes::put_le16(b, tx);
        bytes::put_le16(b, rx);
        for (std::uint8_t x : {0x64, 0x01, 0x06, 0x00}) b.push_back(x);
        bytes::put_le16(b, ca);
        for (std::uint8_t x : {0x00, 0x00, 0x00, 0x14}) b.push_back(x);
      } else {
        type = 102;
        b = {0x68, 0x0D};
        bytes::put_le16(b, tx);
        bytes::put_le16(b, rx);
        for (std::uint8_t x : {0x66, 0x01, 0x05, 0x00}) b.push_back(x);
        bytes::put_le16(b, ca);
        for (int i = 0; i < 3; ++i) b.push_back(static_cast<std::uint8_t>(rng.uniform(256)));
      }
      return message(P::Iec104, ipproto::kTcp, 2404, false, b, Role::Request, type);
    }
  }
  return {};
}

AppMessage reply_message(ProtocolId protocol, Rng& rng) {
  using P = ProtocolId;
  switch (protocol) {
    case P::Modbus: {
      auto fc = static_cast<std::uint8_t>(rng.between(1, 4));
      Buffer b;
      put_be16(b, modbus_tid(rng));
      put_be16(b, 0);
      put_be16(b, 5);
      b.push_back(static_cast<std::uint8_t>(rng.between(1, 247)));
      b.push_back(fc);
      b.push_back(2);
      put_be16(b, rand16(rng));
      return message(P::Modbus, ipproto::kTcp, 502, true, b, Role::Reply, fc);
    }
    case P::S7comm: {
      Buffer b{0x03, 0x00, 0x00, 0x1B, 0x02, 0xF0, 0x80, 0x32, 0x03, 0x00, 0x00};
      put_be16(b, rand16(rng));
      for (std::uint8_t x : {0x00, 0x02, 0x00, 0x06, 0x00, 0x00, 0x04, 0x01, 0xFF, 0x04, 0x00, 0x10}) b.push_back(x);
      put_be16(b, rand16(rng));
      return message(P::S7comm, ipproto::kTcp, 102, true, b, Role::Reply, 0x04);
    }
    case P::EthernetIP: {
      std::uint16_t cmd = rng.chance(0.5) ? 0x0063 : 0x0004;
      Buffer b;
      bytes::put_le16(b, cmd);
      bytes::put_le16(b, 2);
      b.resize(12, 0);
      for (int i = 0; i < 8; ++i) b.push_back(static_cast<std::uint8_t>(rng.uniform(256)));
      b.resize(26, 0);
      return message(P::EthernetIP, ipproto::kTcp, 44818, true, b, Role::Reply, cmd);
    }
    case P::BACnet: {
      Buffer b{0x81, 0x0A, 0x00, 0x17, 0x01, 0x00, 0x30};
      b.push_back(static_cast<std::uint8_t>(rng.uniform(256)));
      b.push_back(0x0C);
      b.push_back(0x0C);
      put_be32(b, (2u << 22) | static_cast<std::uint32_t>(rng.uniform(1u << 22)));
      for (std::uint8_t x : {0x19, 0x55, 0x3E, 0x44}) b.push_back(x);
      put_be32(b, static_cast<std::uint32_t>(rng.next()));
      b.push_back(0x3F);
      return message(P::BACnet, ipproto::kUdp, 47808, true, b, Role::Reply, 0x0C);
    }
    case P::DNP3: {
      auto seq = static_cast<std::uint8_t>(rng.uniform(16));
      auto frame = dnp3_frame(0x44, rand16(rng), rand16(rng),
                              {static_cast<std::uint8_t>(0xC0 | seq), static_cast<std::uint8_t>(0xC0 | seq), 0x81,
                               0x00, 0x00});
      return message(P::DNP3, ipproto::kTcp, 20000, true, frame, Role::Reply, 0x81);
    }
    case P::HartIP: {
      auto body = hart_pdu(0x06, 0x80, static_cast<std::uint8_t>(rng.uniform(4)), {0x00, 0x00});
      return message(P::HartIP, ipproto::kTcp, 5094, true, hart_message(0x01, rand16(rng), body), Role::Reply, 3);
    }
    case P::Iec104: {
      Buffer b{0x68, 0x0E};
      bytes::put_le16(b, static_cast<std::uint16_t>(rng.uniform(0x8000) << 1));
      bytes::put_le16(b, static_cast<std::uint16_t>(rng.uniform(0x8000) << 1));
      for (std::uint8_t x : {0x64, 0x01, 0x07, 0x00}) b.push_back(x);
      bytes::put_le16(b, rand16(rng));
      for (std::uint8_t x : {0x00, 0x00, 0x00, 0x14}) b.push_back(x);
      return message(P::Iec104, ipproto::kTcp, 2404, true, b, Role::Reply, 100);
    }
  }
  return {};
}

AppMessage malformed_message(ProtocolId protocol, Rng& rng) {
  using P = ProtocolId;
  auto m = request_message(protocol, rng);
  m.expected.verdict = Verdict::Malformed;
  switch (protocol) {
    case P::Modbus:
      m.payload[3] = 0x01;
      break;
    case P::S7comm:
      m.payload[7] = 0x33;
      m.expected.role = Role::Unknown;
      m.expected.function_code.reset();
      break;
    case P::EthernetIP:
      m.payload[0] = 0xEF;
      m.payload[1] = 0xBE;
      m.expected.function_code = 0xBEEF;
      break;
    case P::BACnet:
      m.payload = {0x81, 0x0F, 0x00, 0x04};
      m.expected.function_code.reset();
      break;
    case P::DNP3:
      m.payload[8] ^= static_cast<std::uint8_t>(1u << rng.uniform(8));
      m.expected.function_code.reset();
      break;
    case P::HartIP:
      m.payload[1] = static_cast<std::uint8_t>(rng.between(4, 255));
      m.expected.function_code.reset();
      break;
    case P::Iec104:
      m.payload[1] = static_cast<std::uint8_t>(rng.between(254, 255));
      m.expected.function_code.reset();
      break;
  }
  return m;
}

AppMessage dns_decoy_message(Rng& rng) {
  // Transaction id 0x81xx reads as a BVLC header; flags 0x0100 as length 256.
  Buffer b{0x81, 0x00, 0x01, 0x00, 0x00, 0x01, 0x00, 0x00, 0x00, 0x00, 0x00, 0x01};
  static constexpr const char* kNames[] = {"example", "update", "time", "mail"};
  std::string label = kNames[rng.uniform(4)];
  b.push_back(static_cast<std::uint8_t>(label.size()));
  b.insert(b.end(), label.begin(), label.end());
  for (std::uint8_t x : std::initializer_list<std::uint8_t>{0x03, 'c', 'o', 'm', 0x00, 0x00, 0x01, 0x00, 0x01}) b.push_back(x);
  // OPT record padded so the datagram is exactly 256 bytes.
  for (std::uint8_t x : {0x00, 0x00, 0x29, 0x10, 0x00, 0x00, 0x00, 0x00, 0x00}) b.push_back(x);
  std::size_t rdlen = 256 - b.size() - 2;
  put_be16(b, static_cast<std::uint16_t>(rdlen));
  put_be16(b, 12);  // padding option
  put_be16(b, static_cast<std::uint16_t>(rdlen - 4));
  b.resize(256, 0x00);
  // Sent from a BACnet port to a DNS server on 53.
  auto m = message(ProtocolId::BACnet, ipproto::kUdp, 47808, true, b, Role::Reply, std::nullopt);
  m.client_port = 53;
  return m;
}

std::vector<std::uint8_t> golden_frame(const AppMessage& m) {
  FrameSpec spec;
  spec.proto = m.transport;
  spec.tcp_timestamps = m.tcp_timestamps;
  spec.payload = m.payload;
  spec.src = m.from_server ? kGoldenServer : kGoldenClient;
  spec.dst = m.from_server ? kGoldenClient : kGoldenServer;
  std::uint16_t client = m.client_port.value_or(kGoldenClientPort);
  spec.src_port = m.from_server ? m.server_port : client;
  spec.dst_port = m.from_server ? client : m.server_port;
  return build_frame(spec);
}

void write_golden_corpus(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json manifest = nlohmann::json::array();
  auto emit = [&](const AppMessage& m, const std::string& file) {
    PcapWriter writer(dir / file, 65535);
    writer.write(1'514'764'800'000'000LL, golden_frame(m));  // 2018-01-01T00:00:00Z
    nlohmann::json entry{{"file", file},
                         {"protocol", protocol_name(m.protocol)},
                         {"verdict", verdict_name(m.expected.verdict)},
                         {"role", role_name(m.expected.role)},
                         {"function_code", nullptr},
                         {"frame_length", golden_frame(m).size()}};
    if (m.expected.function_code) entry["function_code"] = *m.expected.function_code;
    manifest.push_back(entry);
  };
  for (auto p : kAllProtocols) {
    auto name = to_lower(protocol_name(p));
    emit(golden_message(p), name + ".pcap");
    emit(golden_malformed_message(p), name + "_malformed.pcap");
  }
  std::ofstream(dir / "manifest.json") << manifest.dump(2) << "\n";
}

}  // namespace icsscope
