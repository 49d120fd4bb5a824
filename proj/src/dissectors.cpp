#include "icsscope/dissectors.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <json.hpp>

#include "icsscope/bytes.hpp"

namespace icsscope {

using bytes::be16;
using bytes::le16;
using bytes::le32;

std::string_view kind_name(DissectorKind k) { return k == DissectorKind::Normal ? "Normal" : "Heuristic"; }

std::string_view role_name(Role r) {
  switch (r) {
    case Role::Request: return "Request";
    case Role::Reply: return "Reply";
    case Role::Unknown: return "Unknown";
  }
  return "?";
}

std::string_view verdict_name(Verdict v) { return v == Verdict::WellFormed ? "WellFormed" : "Malformed"; }

std::optional<DissectorKind> kind_from_name(std::string_view s) {
  if (s == "Normal") return DissectorKind::Normal;
  if (s == "Heuristic") return DissectorKind::Heuristic;
  return std::nullopt;
}

std::optional<Role> role_from_name(std::string_view s) {
  for (auto r : {Role::Request, Role::Reply, Role::Unknown}) {
    if (role_name(r) == s) return r;
  }
  return std::nullopt;
}

std::optional<Verdict> verdict_from_name(std::string_view s) {
  if (s == "WellFormed") return Verdict::WellFormed;
  if (s == "Malformed") return Verdict::Malformed;
  return std::nullopt;
}

namespace {

Dissection make(ProtocolId p, DissectorKind k, Role r, std::optional<std::uint32_t> fc, Verdict v) {
  return Dissection{p, k, r, fc, v};
}

// Heuristic dissectors never report Malformed: a failed check means the bytes
// belong to something else.
std::optional<Dissection> violation(ProtocolId p, DissectorKind k, Role r,
                                    std::optional<std::uint32_t> fc = std::nullopt) {
  if (k == DissectorKind::Heuristic) return std::nullopt;
  return make(p, k, r, fc, Verdict::Malformed);
}

constexpr std::array<std::uint16_t, 10> kEnipCommands = {0x0000, 0x0004, 0x0063, 0x0064, 0x0065,
                                                          0x0066, 0x006F, 0x0070, 0x0072, 0x0073};
constexpr std::array<std::uint32_t, 7> kEnipStatus = {0x0000, 0x0001, 0x0002, 0x0003, 0x0064, 0x0065, 0x0069};
constexpr std::array<std::uint8_t, 11> kS7Functions = {0x00, 0x04, 0x05, 0x1A, 0x1B, 0x1C,
                                                        0x1D, 0x1E, 0x1F, 0x28, 0x29};
constexpr std::array<std::uint8_t, 6> kIec104UFrames = {0x07, 0x0B, 0x13, 0x23, 0x43, 0x83};

bool iec104_type_defined(std::uint8_t t) {
  return (t >= 1 && t <= 21) || (t >= 30 && t <= 40) || (t >= 45 && t <= 51) || (t >= 58 && t <= 64) || t == 70 ||
         (t >= 100 && t <= 107) || (t >= 110 && t <= 113) || (t >= 120 && t <= 127);
}

template <typename C, typename V>
bool one_of(const C& c, V v) {
  return std::find(c.begin(), c.end(), v) != c.end();
}

std::array<std::uint16_t, 256> make_dnp3_table() {
  std::array<std::uint16_t, 256> t{};
  for (unsigned i = 0; i < 256; ++i) {
    std::uint16_t crc = static_cast<std::uint16_t>(i);
    for (int b = 0; b < 8; ++b) crc = (crc & 1) ? static_cast<std::uint16_t>((crc >> 1) ^ 0xA6BC) : crc >> 1;
    t[i] = crc;
  }
  return t;
}

}  // namespace

std::uint16_t dnp3_crc(std::span<const std::uint8_t> data) {
  static const auto table = make_dnp3_table();
  std::uint16_t crc = 0;
  for (auto b : data) crc = static_cast<std::uint16_t>((crc >> 8) ^ table[(crc ^ b) & 0xFF]);
  return static_cast<std::uint16_t>(~crc);
}

std::optional<Dissection> dissect_modbus(const PayloadView& p) {
  constexpr auto kP = ProtocolId::Modbus;
  constexpr auto kN = DissectorKind::Normal;
  const auto& b = p.bytes;
  if (b.size() < 8) return std::nullopt;
  std::uint16_t protocol_id = be16(b, 2);
  std::uint16_t length = be16(b, 4);
  std::uint8_t fc = b[7];
  Role role = fc >= 0x80 ? Role::Reply : p.port_role;
  if (protocol_id != 0 || length < 2 || 6u + length > p.wire_length || fc == 0) return violation(kP, kN, role, fc);
  return make(kP, kN, role, fc, Verdict::WellFormed);
}

std::optional<Dissection> dissect_bacnet(const PayloadView& p) {
  constexpr auto kP = ProtocolId::BACnet;
  constexpr auto kN = DissectorKind::Normal;
  const auto& b = p.bytes;
  if (p.transport != ipproto::kUdp || b.size() < 4 || b[0] != 0x81) return std::nullopt;
  std::uint8_t function = b[1];
  if (function > 0x0C || be16(b, 2) != p.wire_length) return violation(kP, kN, p.port_role);

  Role role = p.port_role;
  std::optional<std::uint32_t> service;
  std::size_t npdu = 0;
  if (function == 0x0A || function == 0x0B) npdu = 4;
  if (function == 0x04) npdu = 10;  // Forwarded-NPDU carries the originator's B/IP address first
  if (npdu != 0 && b.size() > npdu) {
    if (b[npdu] != 0x01) return violation(kP, kN, role);
    if (b.size() > npdu + 1) {
      std::uint8_t control = b[npdu + 1];
      std::size_t at = npdu + 2;
      bool readable = true;
      auto skip_address = [&] {
        if (b.size() <= at + 2) {
          readable = false;
          return;
        }
        at += 3 + b[at + 2];
      };
      if (control & 0x20) skip_address();
      if (readable && (control & 0x08)) skip_address();
      if (readable && (control & 0x20)) ++at;  // hop count
      if (readable && !(control & 0x80) && b.size() > at) {
        unsigned type = b[at] >> 4;
        std::size_t service_at = 0;
        switch (type) {
          case 0: service_at = at + 3; role = Role::Request; break;
          case 1: service_at = at + 1; role = Role::Request; break;
          case 2: case 3: case 5: service_at = at + 2; role = Role::Reply; break;
          case 6: case 7: role = Role::Reply; break;
          default: break;
        }
        if (service_at != 0 && b.size() > service_at) service = b[service_at];
      }
    }
  }
  return make(kP, kN, role, service, Verdict::WellFormed);
}

std::optional<Dissection> dissect_s7(const PayloadView& p, DissectorKind kind) {
  constexpr auto kP = ProtocolId::S7comm;
  const auto& b = p.bytes;
  if (p.transport != ipproto::kTcp || b.size() < 7 || b[0] != 0x03 || b[1] != 0x00) return std::nullopt;
  // COTP data transfer (DT) unit; connection setup units carry no S7 payload.
  if ((b[5] & 0xF0) != 0xF0) return std::nullopt;
  std::size_t s7 = 5u + b[4];
  if (b.size() < std::max<std::size_t>(17, s7 + 10)) return std::nullopt;
  if (b[s7] != 0x32) return violation(kP, kind, Role::Unknown);

  std::uint8_t rosctr = b[s7 + 1];
  Role role = Role::Unknown;
  switch (rosctr) {
    case 1: role = Role::Request; break;
    case 2: case 3: role = Role::Reply; break;
    case 7: break;
    default: return violation(kP, kind, Role::Unknown);
  }
  std::size_t header = (rosctr == 2 || rosctr == 3) ? 12 : 10;
  if (b.size() < s7 + header) return std::nullopt;
  std::size_t params = be16(b, s7 + 6);
  std::size_t data = be16(b, s7 + 8);
  std::size_t tpkt = be16(b, 2);
  if (tpkt != s7 + header + params + data || tpkt > p.wire_length) return violation(kP, kind, role);

  std::optional<std::uint32_t> fc;
  if (params > 0 && rosctr != 7) {
    std::size_t at = s7 + header;
    if (b.size() <= at) return std::nullopt;
    std::uint8_t function = b[at];
    std::size_t head = 1;
    if (function == 0xF0) head = 8;
    else if (function == 0x04 || function == 0x05) head = 2;
    else if (!one_of(kS7Functions, function)) return violation(kP, kind, role);
    if (b.size() < at + std::min(params, head)) return std::nullopt;
    fc = function;
  }
  return make(kP, kind, role, fc, Verdict::WellFormed);
}

std::optional<Dissection> dissect_ethernetip(const PayloadView& p) {
  constexpr auto kP = ProtocolId::EthernetIP;
  constexpr auto kN = DissectorKind::Normal;
  const auto& b = p.bytes;
  if (b.size() < 24) return std::nullopt;
  std::uint16_t command = le16(b, 0);
  std::uint16_t length = le16(b, 2);
  std::uint32_t status = le32(b, 8);
  if (!one_of(kEnipCommands, command) || 24u + length > p.wire_length || !one_of(kEnipStatus, status)) {
    return violation(kP, kN, p.port_role, command);
  }
  // SendRRData/SendUnitData: interface handle, timeout and item count precede the items.
  if ((command == 0x006F || command == 0x0070) && length >= 8 && b.size() < 32) return std::nullopt;
  return make(kP, kN, p.port_role, command, Verdict::WellFormed);
}

std::optional<Dissection> dissect_dnp3(const PayloadView& p, DissectorKind kind) {
  constexpr auto kP = ProtocolId::DNP3;
  const auto& b = p.bytes;
  if (b.size() < 10 || b[0] != 0x05 || b[1] != 0x64) return std::nullopt;
  std::size_t length = b[2];
  Role role = (b[3] & 0x80) ? Role::Request : Role::Reply;
  if (length < 5 || dnp3_crc(b.first(8)) != le16(b, 8)) return violation(kP, kind, role);
  std::size_t user = length - 5;
  std::size_t frame = 10 + user + 2 * ((user + 15) / 16);
  if (frame > p.wire_length) return violation(kP, kind, role);

  std::optional<std::uint32_t> fc;
  if (user > 0) {
    std::size_t block = std::min<std::size_t>(16, user);
    if (b.size() < 10 + block + 2) return std::nullopt;
    if (dnp3_crc(b.subspan(10, block)) != le16(b, 10 + block)) return violation(kP, kind, role);
    if (user >= 3) fc = b[12];
  }
  return make(kP, kind, role, fc, Verdict::WellFormed);
}

std::optional<Dissection> dissect_hartip(const PayloadView& p) {
  constexpr auto kP = ProtocolId::HartIP;
  constexpr auto kN = DissectorKind::Normal;
  const auto& b = p.bytes;
  if (b.size() < 8 || b[0] != 0x01) return std::nullopt;
  std::uint8_t type = b[1];
  std::uint8_t id = b[2];
  std::size_t length = be16(b, 6);
  Role role = Role::Unknown;
  switch (type) {
    case 0: role = Role::Request; break;
    case 1: case 3: role = Role::Reply; break;
    case 2: break;
    default: return violation(kP, kN, p.port_role);
  }
  if (id > 3 || length < 8 || length > p.wire_length) return violation(kP, kN, role);
  if (id == 3 && length >= 12) {
    // Pass-through: delimiter, address, command and byte count of the HART PDU.
    std::size_t address = (b.size() > 8 && (b[8] & 0x80)) ? 5 : 1;
    if (b.size() < 8 + 1 + address + 2) return std::nullopt;
    auto frame_type = b[8] & 0x07;
    if (frame_type != 1 && frame_type != 2 && frame_type != 6) return violation(kP, kN, role, id);
  }
  return make(kP, kN, role, id, Verdict::WellFormed);
}

std::optional<Dissection> dissect_iec104(const PayloadView& p, DissectorKind kind) {
  constexpr auto kP = ProtocolId::Iec104;
  const auto& b = p.bytes;
  if (p.transport != ipproto::kTcp || b.size() < 6 || b[0] != 0x68) return std::nullopt;
  Role role = kind == DissectorKind::Normal ? p.port_role : Role::Unknown;
  std::size_t length = b[1];
  if (length < 4 || length > 253 || 2 + length > p.wire_length) return violation(kP, kind, role);

  std::uint8_t control = b[2];
  if ((control & 0x01) == 0) {
    // I-format: the data unit identifier must follow.
    if (length < 10) return violation(kP, kind, role);
    if (b.size() < 10) return std::nullopt;
    if (!iec104_type_defined(b[6])) return violation(kP, kind, role);
    return make(kP, kind, role, b[6], Verdict::WellFormed);
  }
  if ((control & 0x03) == 0x01) {
    if (length != 4 || control != 0x01 || b[3] != 0) return violation(kP, kind, role);
    return make(kP, kind, role, std::nullopt, Verdict::WellFormed);
  }
  if (length != 4 || !one_of(kIec104UFrames, control) || b[3] != 0 || b[4] != 0 || b[5] != 0) {
    return violation(kP, kind, role);
  }
  return make(kP, kind, role, control, Verdict::WellFormed);
}

namespace {

std::optional<Dissection> run_normal(ProtocolId protocol, const PayloadView& view) {
  switch (protocol) {
    case ProtocolId::Modbus: return dissect_modbus(view);
    case ProtocolId::S7comm: return dissect_s7(view, DissectorKind::Normal);
    case ProtocolId::EthernetIP: return dissect_ethernetip(view);
    case ProtocolId::BACnet: return dissect_bacnet(view);
    case ProtocolId::DNP3: return dissect_dnp3(view, DissectorKind::Normal);
    case ProtocolId::HartIP: return dissect_hartip(view);
    case ProtocolId::Iec104: return dissect_iec104(view, DissectorKind::Normal);
  }
  return std::nullopt;
}

std::optional<Dissection> dissect_datagram(const Datagram& dg, const PortRegistry& ports) {
  if (!dg.has_ports || dg.payload.empty()) return std::nullopt;
  PayloadView view{dg.payload, dg.wire_payload_length, dg.proto, Role::Unknown};

  auto dst = ports.lookup(dg.dst_port);
  auto src = ports.lookup(dg.src_port);
  if (dst) {
    view.port_role = Role::Request;
    if (auto d = run_normal(*dst, view)) return d;
  }
  if (src && src != dst) {
    view.port_role = Role::Reply;
    if (auto d = run_normal(*src, view)) return d;
  }

  view.port_role = Role::Unknown;
  if (auto d = dissect_iec104(view, DissectorKind::Heuristic)) return d;
  if (auto d = dissect_dnp3(view, DissectorKind::Heuristic)) return d;
  if (auto d = dissect_s7(view, DissectorKind::Heuristic)) return d;
  return std::nullopt;
}

}  // namespace

std::optional<Dissection> dissect(const PacketRecord& record, const PortRegistry& ports) {
  auto dg = datagram_of(record);
  if (!dg) return std::nullopt;
  if (dg->proto == ipproto::kIcmp) {
    bool error_message = dg->icmp_type == 3 || dg->icmp_type == 11 || dg->icmp_type == 12;
    if (!error_message || !dg->has_icmp_header) return std::nullopt;
    auto inner = parse_datagram(dg->payload);
    if (!inner || (inner->proto != ipproto::kTcp && inner->proto != ipproto::kUdp)) return std::nullopt;
    return dissect_datagram(*inner, ports);
  }
  return dissect_datagram(*dg, ports);
}

std::optional<Dissection> dissect(const PacketRecord& record) {
  static const auto ports = PortRegistry::defaults();
  return dissect(record, ports);
}

OpcodeTable OpcodeTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open opcode table: " + path.string());
  OpcodeTable t;
  try {
    auto doc = nlohmann::json::parse(in);
    for (auto& [name, codes] : doc.items()) {
      auto proto = protocol_from_name(name);
      if (!proto) throw ConfigError("unknown protocol '" + name + "' in " + path.string());
      for (auto& [code, action] : codes.items()) {
        t.actions_[{*proto, static_cast<std::uint32_t>(std::stoul(code, nullptr, 0))}] = action.get<std::string>();
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("invalid opcode table " + path.string() + ": " + e.what());
  } catch (const std::logic_error& e) {
    throw ConfigError("invalid opcode table " + path.string() + ": " + e.what());
  }
  return t;
}

std::optional<std::string> OpcodeTable::action(ProtocolId protocol, std::uint32_t code) const {
  if (auto it = actions_.find({protocol, code}); it != actions_.end()) return it->second;
  return std::nullopt;
}

}  // namespace icsscope
