#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "icsscope/capture.hpp"
#include "icsscope/protocol.hpp"

namespace icsscope {

enum class DissectorKind : std::uint8_t { Normal, Heuristic };
enum class Role : std::uint8_t { Request, Reply, Unknown };
enum class Verdict : std::uint8_t { WellFormed, Malformed };

std::string_view kind_name(DissectorKind k);
std::string_view role_name(Role r);
std::string_view verdict_name(Verdict v);
std::optional<DissectorKind> kind_from_name(std::string_view s);
std::optional<Role> role_from_name(std::string_view s);
std::optional<Verdict> verdict_from_name(std::string_view s);

struct Dissection {
  ProtocolId protocol{};
  DissectorKind kind{DissectorKind::Normal};
  Role role{Role::Unknown};
  std::optional<std::uint32_t> function_code;
  Verdict verdict{Verdict::WellFormed};

  bool operator==(const Dissection&) const = default;
};

/// Application payload handed to a protocol dissector.
struct PayloadView {
  std::span<const std::uint8_t> bytes;  // captured bytes (possibly snap-truncated)
  std::size_t wire_length{0};           // payload length on the wire
  std::uint8_t transport{ipproto::kTcp};
  Role port_role{Role::Unknown};        // role implied by which side holds the ICS port

  bool truncated() const { return bytes.size() < wire_length; }
};

// Each returns nullopt for "not this protocol". The heuristic variants turn any
// field violation into a rejection instead of a Malformed verdict.
std::optional<Dissection> dissect_modbus(const PayloadView& p);
std::optional<Dissection> dissect_bacnet(const PayloadView& p);
std::optional<Dissection> dissect_s7(const PayloadView& p, DissectorKind kind = DissectorKind::Normal);
std::optional<Dissection> dissect_ethernetip(const PayloadView& p);
std::optional<Dissection> dissect_dnp3(const PayloadView& p, DissectorKind kind = DissectorKind::Normal);
std::optional<Dissection> dissect_hartip(const PayloadView& p);
std::optional<Dissection> dissect_iec104(const PayloadView& p, DissectorKind kind = DissectorKind::Normal);

/// Identifies the ICS protocol of a record: the normal dissector registered on
/// dst_port, then src_port, then the heuristics [Iec104, DNP3, S7comm].
/// ICMP error messages are dissected through their quoted datagram.
std::optional<Dissection> dissect(const PacketRecord& record, const PortRegistry& ports);
std::optional<Dissection> dissect(const PacketRecord& record);

// DNP3 link-layer CRC (polynomial 0x3D65, reflected, complemented).
std::uint16_t dnp3_crc(std::span<const std::uint8_t> data);

/// Function-code to action-name mapping ("read", "write", ...) per protocol.
class OpcodeTable {
 public:
  static OpcodeTable load(const std::filesystem::path& path);
  std::optional<std::string> action(ProtocolId protocol, std::uint32_t code) const;

 private:
  std::map<std::pair<ProtocolId, std::uint32_t>, std::string> actions_;
};

}  // namespace icsscope
