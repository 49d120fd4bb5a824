#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "icsscope/net.hpp"
#include "icsscope/protocol.hpp"

namespace icsscope {

class CaptureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace ipproto {
inline constexpr std::uint8_t kIcmp = 1;
inline constexpr std::uint8_t kTcp = 6;
inline constexpr std::uint8_t kUdp = 17;
}  // namespace ipproto

struct CaptureMeta {
  std::string vantage{"default"};
  std::uint64_t sample_interval{1};
  std::uint32_t snap_len{65535};

  // Throws ConfigError on sample_interval < 1 or snap_len < 46.
  void validate() const;
};

/// One sampled, truncated Ethernet frame carrying an IPv4 ICMP/TCP/UDP datagram.
struct PacketRecord {
  std::int64_t ts_us{0};
  Ipv4 src_ip;
  Ipv4 dst_ip;
  std::uint8_t ip_proto{0};
  std::uint16_t src_port{0};
  std::uint16_t dst_port{0};
  std::vector<std::uint8_t> captured;  // from link-layer frame start
  std::uint32_t orig_len{0};
  std::string vantage;
  std::uint16_t ip_offset{14};  // IPv4 header position inside `captured`

  bool operator==(const PacketRecord&) const = default;

  bool has_ports() const { return ip_proto == ipproto::kTcp || ip_proto == ipproto::kUdp; }
  std::span<const std::uint8_t> ip_bytes() const {
    return std::span<const std::uint8_t>(captured).subspan(std::min<std::size_t>(ip_offset, captured.size()));
  }
};

using MacAddress = std::uint64_t;

MacAddress src_mac(const PacketRecord& record);
MacAddress dst_mac(const PacketRecord& record);
std::optional<MacAddress> parse_mac(std::string_view text);

/// View of an IPv4 datagram, which may be cut short by snap truncation.
struct Datagram {
  Ipv4 src;
  Ipv4 dst;
  std::uint8_t proto{0};
  bool first_fragment{true};
  bool has_ports{false};
  std::uint16_t src_port{0};
  std::uint16_t dst_port{0};
  std::uint8_t icmp_type{0};
  std::uint8_t icmp_code{0};
  bool has_icmp_header{false};
  std::span<const std::uint8_t> payload;  // captured transport payload (or ICMP body)
  std::size_t wire_payload_length{0};     // payload length according to the IP header
};

std::optional<Datagram> parse_datagram(std::span<const std::uint8_t> ip_bytes);

// Transport (or ICMP body) view of a record; absent if the IP header is unreadable.
std::optional<Datagram> datagram_of(const PacketRecord& record);

struct CaptureStats {
  std::uint64_t frames{0};
  std::uint64_t records{0};
  std::uint64_t skipped{0};
  std::uint64_t skipped_non_ipv4{0};
  std::uint64_t skipped_qinq{0};
  std::uint64_t skipped_transport{0};  // other IP protocols, fragments, unreadable headers
  bool truncated_tail{false};
};

// Applies snap truncation and normalizes one Ethernet frame; skipped frames are counted in `stats`.
std::optional<PacketRecord> decode_frame(std::int64_t ts_us, std::vector<std::uint8_t> frame, std::uint32_t orig_len,
                                         const CaptureMeta& meta, CaptureStats& stats);

/// Streaming reader for classic pcap files (both byte orders, µs and ns stamps).
class CaptureReader {
 public:
  CaptureReader(const std::filesystem::path& path, CaptureMeta meta);

  // Next IPv4 ICMP/TCP/UDP record, or nullopt at end of stream.
  std::optional<PacketRecord> next();

  const CaptureStats& stats() const { return stats_; }
  bool nanosecond_timestamps() const { return nanos_; }

 private:
  std::ifstream in_;
  std::filesystem::path path_;
  CaptureMeta meta_;
  CaptureStats stats_;
  bool swapped_{false};
  bool nanos_{false};
  bool done_{false};
};

struct Capture {
  std::vector<PacketRecord> records;
  CaptureStats stats;
};

Capture read_capture(const std::filesystem::path& path, const CaptureMeta& meta);

enum class TimestampPrecision { Micro, Nano };

class PcapWriter {
 public:
  PcapWriter(const std::filesystem::path& path, std::uint32_t snap_len,
             TimestampPrecision precision = TimestampPrecision::Micro);

  // Writes min(frame.size(), snap_len) bytes; orig_len defaults to the full frame size.
  void write(std::int64_t ts_us, std::span<const std::uint8_t> frame, std::optional<std::uint32_t> orig_len = {});
  void flush() { out_.flush(); }

 private:
  std::ofstream out_;
  std::uint32_t snap_len_;
  TimestampPrecision precision_;
};

enum class Direction : std::uint8_t { Request, Reply, Unrelated };

std::string_view direction_name(Direction d);
std::optional<Direction> direction_from_name(std::string_view name);

/// Well-known ICS port to protocol mapping.
class PortRegistry {
 public:
  static PortRegistry defaults();
  static PortRegistry load(const std::filesystem::path& path);

  void add(std::uint16_t port, ProtocolId protocol) { table_[port] = static_cast<std::int8_t>(protocol); }

  std::optional<ProtocolId> lookup(std::uint16_t port) const {
    auto v = table_[port];
    if (v < 0) return std::nullopt;
    return static_cast<ProtocolId>(v);
  }
  bool contains(std::uint16_t port) const { return table_[port] >= 0; }
  std::vector<std::uint16_t> ports_of(ProtocolId protocol) const;

 private:
  PortRegistry() { table_.fill(-1); }
  std::array<std::int8_t, 65536> table_;
};

// Request iff dst_port is registered; Reply iff only src_port is; else Unrelated.
Direction direction(const PacketRecord& record, const PortRegistry& ports);

}  // namespace icsscope
