#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace icsscope {

enum class ProtocolId : std::uint8_t { Modbus, S7comm, EthernetIP, BACnet, DNP3, HartIP, Iec104 };

inline constexpr std::array<ProtocolId, 7> kAllProtocols = {
    ProtocolId::Modbus, ProtocolId::S7comm, ProtocolId::EthernetIP, ProtocolId::BACnet,
    ProtocolId::DNP3,   ProtocolId::HartIP, ProtocolId::Iec104,
};

constexpr std::string_view protocol_name(ProtocolId p) {
  switch (p) {
    case ProtocolId::Modbus: return "Modbus";
    case ProtocolId::S7comm: return "S7comm";
    case ProtocolId::EthernetIP: return "EthernetIP";
    case ProtocolId::BACnet: return "BACnet";
    case ProtocolId::DNP3: return "DNP3";
    case ProtocolId::HartIP: return "HartIP";
    case ProtocolId::Iec104: return "Iec104";
  }
  return "?";
}

constexpr std::optional<ProtocolId> protocol_from_name(std::string_view name) {
  for (auto p : kAllProtocols) {
    if (protocol_name(p) == name) return p;
  }
  return std::nullopt;
}

constexpr std::size_t index_of(ProtocolId p) { return static_cast<std::size_t>(p); }

// Smallest captured frame (Ethernet header included) from which the protocol
// is still identified, as measured by byte-wise truncation of reference packets.
constexpr std::size_t min_identifiable_length(ProtocolId p) {
  switch (p) {
    case ProtocolId::Modbus: return 74;
    case ProtocolId::S7comm: return 93;
    case ProtocolId::EthernetIP: return 74;
    case ProtocolId::BACnet: return 46;
    case ProtocolId::DNP3: return 62;
    case ProtocolId::HartIP: return 78;
    case ProtocolId::Iec104: return 76;
  }
  return 0;
}

}  // namespace icsscope
