#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "icsscope/capture.hpp"
#include "icsscope/dissectors.hpp"
#include "icsscope/protocol.hpp"

namespace icsscope {

/// Seeded generator with platform-independent draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform in [0, n); n > 0.
  std::uint64_t uniform(std::uint64_t n);
  // Uniform in [lo, hi].
  std::uint64_t between(std::uint64_t lo, std::uint64_t hi) { return lo + uniform(hi - lo + 1); }
  bool chance(double p);

 private:
  std::mt19937_64 engine_;
};

struct FrameSpec {
  MacAddress src_mac{0x020000000001};
  MacAddress dst_mac{0x020000000002};
  Ipv4 src;
  Ipv4 dst;
  std::uint8_t proto{ipproto::kTcp};
  std::uint16_t src_port{0};
  std::uint16_t dst_port{0};
  bool tcp_timestamps{true};  // 32-byte TCP header (NOP, NOP, timestamps) instead of 20
  std::uint16_t ip_id{0};
  std::vector<std::uint8_t> payload;
};

// Ethernet + IPv4 + TCP/UDP frame with valid checksums.
std::vector<std::uint8_t> build_frame(const FrameSpec& spec);

// ICMP error (e.g. type 3 code 3) from `src` to `dst` quoting the IPv4 datagram of `original`.
std::vector<std::uint8_t> build_icmp_error(const FrameSpec& outer, std::uint8_t type, std::uint8_t code,
                                           std::span<const std::uint8_t> original_frame,
                                           std::size_t quoted_payload_bytes);

/// One application message and what the dissector must report for it.
struct AppMessage {
  ProtocolId protocol{};
  std::uint8_t transport{ipproto::kTcp};
  std::uint16_t server_port{0};
  bool from_server{false};  // reply direction: server port is the source port
  bool tcp_timestamps{true};
  std::optional<std::uint16_t> client_port;  // fixed peer port, else an ephemeral one
  std::vector<std::uint8_t> payload;
  Dissection expected;
};

// Fixed reference packet per protocol; truncating its frame below
// min_identifiable_length() makes it unidentifiable.
AppMessage golden_message(ProtocolId protocol);
// Reference packet with one enumerated header field out of range.
AppMessage golden_malformed_message(ProtocolId protocol);

AppMessage request_message(ProtocolId protocol, Rng& rng);
AppMessage reply_message(ProtocolId protocol, Rng& rng);
AppMessage malformed_message(ProtocolId protocol, Rng& rng);
// BACnet-looking DNS query leaving from a BACnet port: WellFormed for the
// BACnet dissector, but fingerprinted as DNS.
AppMessage dns_decoy_message(Rng& rng);

inline constexpr Ipv4 kGoldenClient{192, 0, 2, 10};
inline constexpr Ipv4 kGoldenServer{198, 51, 100, 20};
inline constexpr std::uint16_t kGoldenClientPort = 49200;

// Complete frame for a message between the golden client and server.
std::vector<std::uint8_t> golden_frame(const AppMessage& message);

// Writes one pcap per golden message plus manifest.json
// ([{file, protocol, verdict, role, function_code}]).
void write_golden_corpus(const std::filesystem::path& dir);

}  // namespace icsscope
