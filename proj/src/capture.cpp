#include "icsscope/capture.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <json.hpp>

#include "icsscope/bytes.hpp"

namespace icsscope {

using bytes::be16;

void CaptureMeta::validate() const {
  if (sample_interval < 1) throw ConfigError("vantage '" + vantage + "': sample_interval must be >= 1");
  if (snap_len < 46) throw ConfigError("vantage '" + vantage + "': snap_len must be >= 46");
}

namespace {

MacAddress mac_at(const std::vector<std::uint8_t>& frame, std::size_t at) {
  if (frame.size() < at + 6) return 0;
  MacAddress m = 0;
  for (std::size_t i = 0; i < 6; ++i) m = (m << 8) | frame[at + i];
  return m;
}

constexpr std::uint16_t kEtherIpv4 = 0x0800;
constexpr std::uint16_t kEtherVlan = 0x8100;
constexpr std::uint16_t kEtherQinq = 0x88A8;

std::uint32_t swap32(std::uint32_t v) {
  return (v >> 24) | ((v >> 8) & 0xFF00) | ((v << 8) & 0xFF0000) | (v << 24);
}

}  // namespace

MacAddress src_mac(const PacketRecord& record) { return mac_at(record.captured, 6); }
MacAddress dst_mac(const PacketRecord& record) { return mac_at(record.captured, 0); }

std::optional<MacAddress> parse_mac(std::string_view text) {
  if (text.size() != 17) return std::nullopt;
  MacAddress m = 0;
  for (std::size_t i = 0; i < 6; ++i) {
    if (i > 0 && text[i * 3 - 1] != ':' && text[i * 3 - 1] != '-') return std::nullopt;
    unsigned v = 0;
    for (std::size_t k = 0; k < 2; ++k) {
      char c = text[i * 3 + k];
      v <<= 4;
      if (c >= '0' && c <= '9') v |= c - '0';
      else if (c >= 'a' && c <= 'f') v |= c - 'a' + 10;
      else if (c >= 'A' && c <= 'F') v |= c - 'A' + 10;
      else return std::nullopt;
    }
    m = (m << 8) | v;
  }
  return m;
}

std::optional<Datagram> parse_datagram(std::span<const std::uint8_t> ip) {
  if (ip.size() < 20 || (ip[0] >> 4) != 4) return std::nullopt;
  std::size_t ihl = std::size_t{ip[0] & 0x0Fu} * 4;
  if (ihl < 20 || ip.size() < ihl) return std::nullopt;

  Datagram d;
  std::size_t total = be16(ip, 2);
  d.first_fragment = (be16(ip, 6) & 0x1FFF) == 0;
  d.proto = ip[9];
  d.src = Ipv4{bytes::be32(ip, 12)};
  d.dst = Ipv4{bytes::be32(ip, 16)};

  std::size_t wire_l4 = total > ihl ? total - ihl : 0;
  // Bytes past the IP total length are link-layer padding.
  auto l4 = ip.subspan(ihl, std::min(ip.size() - ihl, wire_l4));

  switch (d.proto) {
    case ipproto::kUdp: {
      if (l4.size() >= 4) {
        d.has_ports = true;
        d.src_port = be16(l4, 0);
        d.dst_port = be16(l4, 2);
      }
      d.payload = l4.size() > 8 ? l4.subspan(8) : std::span<const std::uint8_t>{};
      d.wire_payload_length = wire_l4 > 8 ? wire_l4 - 8 : 0;
      break;
    }
    case ipproto::kTcp: {
      if (l4.size() >= 4) {
        d.has_ports = true;
        d.src_port = be16(l4, 0);
        d.dst_port = be16(l4, 2);
      }
      if (l4.size() >= 13) {
        std::size_t hdr = std::size_t{static_cast<std::uint8_t>(l4[12] >> 4)} * 4;
        if (hdr >= 20 && l4.size() > hdr) d.payload = l4.subspan(hdr);
        d.wire_payload_length = hdr >= 20 && wire_l4 > hdr ? wire_l4 - hdr : 0;
      }
      break;
    }
    case ipproto::kIcmp: {
      if (l4.size() >= 2) {
        d.icmp_type = l4[0];
        d.icmp_code = l4[1];
      }
      d.has_icmp_header = l4.size() >= 8;
      d.payload = l4.size() > 8 ? l4.subspan(8) : std::span<const std::uint8_t>{};
      d.wire_payload_length = wire_l4 > 8 ? wire_l4 - 8 : 0;
      break;
    }
    default:
      break;
  }
  return d;
}

std::optional<Datagram> datagram_of(const PacketRecord& record) { return parse_datagram(record.ip_bytes()); }

CaptureReader::CaptureReader(const std::filesystem::path& path, CaptureMeta meta)
    : in_(path, std::ios::binary), path_(path), meta_(std::move(meta)) {
  if (!in_) throw CaptureError("cannot open capture file: " + path.string());
  std::array<std::uint8_t, 24> header{};
  in_.read(reinterpret_cast<char*>(header.data()), header.size());
  if (in_.gcount() != static_cast<std::streamsize>(header.size())) {
    throw CaptureError("truncated pcap file header: " + path.string());
  }
  auto magic = bytes::le32(header, 0);
  switch (magic) {
    case 0xA1B2C3D4: break;
    case 0xA1B23C4D: nanos_ = true; break;
    case 0xD4C3B2A1: swapped_ = true; break;
    case 0x4D3CB2A1: swapped_ = nanos_ = true; break;
    default: throw CaptureError("unknown pcap magic in " + path.string());
  }
  auto linktype = bytes::le32(header, 20);
  if (swapped_) linktype = swap32(linktype);
  if ((linktype & 0xFFFF) != 1) {
    throw CaptureError("unsupported link type " + std::to_string(linktype) + " in " + path.string());
  }
}

std::optional<PacketRecord> CaptureReader::next() {
  while (!done_) {
    std::array<std::uint8_t, 16> rh{};
    in_.read(reinterpret_cast<char*>(rh.data()), rh.size());
    auto got = in_.gcount();
    if (got == 0) {
      done_ = true;
      break;
    }
    auto field = [&](std::size_t at) {
      auto v = bytes::le32(rh, at);
      return swapped_ ? swap32(v) : v;
    };
    if (got != static_cast<std::streamsize>(rh.size())) {
      spdlog::warn("{}: truncated record header after {} frames", path_.string(), stats_.frames);
      stats_.truncated_tail = true;
      done_ = true;
      break;
    }
    std::uint32_t sec = field(0), frac = field(4), incl = field(8), orig = field(12);
    if (incl > (1u << 26)) {
      spdlog::warn("{}: implausible record length {} after {} frames", path_.string(), incl, stats_.frames);
      stats_.truncated_tail = true;
      done_ = true;
      break;
    }
    std::vector<std::uint8_t> frame(incl);
    in_.read(reinterpret_cast<char*>(frame.data()), incl);
    if (in_.gcount() != static_cast<std::streamsize>(incl)) {
      spdlog::warn("{}: truncated final record after {} frames", path_.string(), stats_.frames);
      stats_.truncated_tail = true;
      done_ = true;
      break;
    }
    ++stats_.frames;
    std::int64_t ts_us = std::int64_t{sec} * 1'000'000 + (nanos_ ? frac / 1000 : frac);
    if (frame.size() > meta_.snap_len) frame.resize(meta_.snap_len);
    if (auto rec = decode_frame(ts_us, std::move(frame), std::max(orig, incl), meta_, stats_)) {
      ++stats_.records;
      return rec;
    }
    ++stats_.skipped;
  }
  return std::nullopt;
}

std::optional<PacketRecord> decode_frame(std::int64_t ts_us, std::vector<std::uint8_t> frame,
                                        std::uint32_t orig_len, const CaptureMeta& meta, CaptureStats& stats_) {
  if (frame.size() > meta.snap_len) frame.resize(meta.snap_len);
  orig_len = std::max<std::uint32_t>(orig_len, static_cast<std::uint32_t>(frame.size()));
  if (frame.size() < 14) {
    ++stats_.skipped_non_ipv4;
    return std::nullopt;
  }
  std::uint16_t ethertype = be16(frame, 12);
  std::uint16_t ip_offset = 14;
  if (ethertype == kEtherQinq) {
    ++stats_.skipped_qinq;
    return std::nullopt;
  }
  if (ethertype == kEtherVlan) {
    if (frame.size() < 18) {
      ++stats_.skipped_non_ipv4;
      return std::nullopt;
    }
    ethertype = be16(frame, 16);
    ip_offset = 18;
    if (ethertype == kEtherVlan || ethertype == kEtherQinq) {
      ++stats_.skipped_qinq;
      return std::nullopt;
    }
  }
  if (ethertype != kEtherIpv4) {
    ++stats_.skipped_non_ipv4;
    return std::nullopt;
  }
  auto dg = parse_datagram(std::span<const std::uint8_t>(frame).subspan(ip_offset));
  if (!dg || !dg->first_fragment ||
      (dg->proto != ipproto::kIcmp && dg->proto != ipproto::kTcp && dg->proto != ipproto::kUdp) ||
      (dg->proto != ipproto::kIcmp && !dg->has_ports)) {
    ++stats_.skipped_transport;
    return std::nullopt;
  }
  PacketRecord rec;
  rec.ts_us = ts_us;
  rec.src_ip = dg->src;
  rec.dst_ip = dg->dst;
  rec.ip_proto = dg->proto;
  rec.src_port = dg->src_port;
  rec.dst_port = dg->dst_port;
  rec.orig_len = orig_len;
  rec.vantage = meta.vantage;
  rec.ip_offset = ip_offset;
  rec.captured = std::move(frame);
  return rec;
}

Capture read_capture(const std::filesystem::path& path, const CaptureMeta& meta) {
  CaptureReader reader(path, meta);
  Capture out;
  while (auto rec = reader.next()) out.records.push_back(std::move(*rec));
  out.stats = reader.stats();
  return out;
}

PcapWriter::PcapWriter(const std::filesystem::path& path, std::uint32_t snap_len, TimestampPrecision precision)
    : out_(path, std::ios::binary | std::ios::trunc), snap_len_(snap_len), precision_(precision) {
  if (!out_) throw CaptureError("cannot create capture file: " + path.string());
  std::vector<std::uint8_t> header;
  bytes::put_le32(header, precision == TimestampPrecision::Nano ? 0xA1B23C4D : 0xA1B2C3D4);
  bytes::put_le16(header, 2);
  bytes::put_le16(header, 4);
  bytes::put_le32(header, 0);
  bytes::put_le32(header, 0);
  bytes::put_le32(header, snap_len);
  bytes::put_le32(header, 1);
  out_.write(reinterpret_cast<const char*>(header.data()), static_cast<std::streamsize>(header.size()));
}

void PcapWriter::write(std::int64_t ts_us, std::span<const std::uint8_t> frame, std::optional<std::uint32_t> orig_len) {
  auto incl = static_cast<std::uint32_t>(std::min<std::size_t>(frame.size(), snap_len_));
  std::int64_t sec = ts_us / 1'000'000;
  std::int64_t us = ts_us % 1'000'000;
  std::vector<std::uint8_t> rh;
  bytes::put_le32(rh, static_cast<std::uint32_t>(sec));
  bytes::put_le32(rh, static_cast<std::uint32_t>(precision_ == TimestampPrecision::Nano ? us * 1000 : us));
  bytes::put_le32(rh, incl);
  bytes::put_le32(rh, orig_len.value_or(static_cast<std::uint32_t>(frame.size())));
  out_.write(reinterpret_cast<const char*>(rh.data()), static_cast<std::streamsize>(rh.size()));
  out_.write(reinterpret_cast<const char*>(frame.data()), incl);
  if (!out_) throw CaptureError("write failed");
}

std::string_view direction_name(Direction d) {
  switch (d) {
    case Direction::Request: return "Request";
    case Direction::Reply: return "Reply";
    case Direction::Unrelated: return "Unrelated";
  }
  return "?";
}

std::optional<Direction> direction_from_name(std::string_view name) {
  for (auto d : {Direction::Request, Direction::Reply, Direction::Unrelated}) {
    if (direction_name(d) == name) return d;
  }
  return std::nullopt;
}

PortRegistry PortRegistry::defaults() {
  PortRegistry r;
  r.add(502, ProtocolId::Modbus);
  r.add(102, ProtocolId::S7comm);
  for (std::uint16_t p : {2221, 2222, 44818}) r.add(p, ProtocolId::EthernetIP);
  for (std::uint16_t p = 47808; p <= 47823; ++p) r.add(p, ProtocolId::BACnet);
  r.add(20000, ProtocolId::DNP3);
  r.add(5094, ProtocolId::HartIP);
  r.add(2404, ProtocolId::Iec104);
  return r;
}

PortRegistry PortRegistry::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open port registry: " + path.string());
  PortRegistry r;
  try {
    auto doc = nlohmann::json::parse(in);
    for (auto& [name, ports] : doc.items()) {
      auto proto = protocol_from_name(name);
      if (!proto) throw ConfigError("unknown protocol '" + name + "' in " + path.string());
      for (auto& p : ports) {
        if (p.is_number_unsigned()) {
          r.add(p.get<std::uint16_t>(), *proto);
          continue;
        }
        auto text = p.get<std::string>();
        auto dash = text.find('-');
        auto lo = std::stoul(text.substr(0, dash));
        auto hi = dash == std::string::npos ? lo : std::stoul(text.substr(dash + 1));
        if (lo > hi || hi > 65535) throw ConfigError("bad port range '" + text + "' in " + path.string());
        for (auto port = lo; port <= hi; ++port) r.add(static_cast<std::uint16_t>(port), *proto);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("invalid port registry " + path.string() + ": " + e.what());
  } catch (const std::logic_error& e) {
    throw ConfigError("invalid port registry " + path.string() + ": " + e.what());
  }
  return r;
}

std::vector<std::uint16_t> PortRegistry::ports_of(ProtocolId protocol) const {
  std::vector<std::uint16_t> out;
  for (std::size_t p = 0; p < table_.size(); ++p) {
    if (table_[p] == static_cast<std::int8_t>(protocol)) out.push_back(static_cast<std::uint16_t>(p));
  }
  return out;
}

Direction direction(const PacketRecord& record, const PortRegistry& ports) {
  if (!record.has_ports()) return Direction::Unrelated;
  if (ports.contains(record.dst_port)) return Direction::Request;
  if (ports.contains(record.src_port)) return Direction::Reply;
  return Direction::Unrelated;
}

}  // namespace icsscope
