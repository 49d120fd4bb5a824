#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "icsscope/capture.hpp"
#include "icsscope/templates.hpp"

namespace testing_support {

using namespace icsscope;

inline std::filesystem::path fresh_dir(const std::string& name) {
  auto dir = std::filesystem::path(ICS_SCOPE_TEST_TMP) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void spit(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline PacketRecord record_of(const std::vector<std::uint8_t>& frame, std::uint32_t snap_len = 65535,
                              std::int64_t ts_us = 0) {
  CaptureMeta meta;
  meta.snap_len = snap_len;
  CaptureStats stats;
  auto r = decode_frame(ts_us, frame, static_cast<std::uint32_t>(frame.size()), meta, stats);
  if (!r) throw std::runtime_error("frame did not decode");
  return *r;
}

inline PacketRecord record_of(const AppMessage& m, std::uint32_t snap_len = 65535) {
  return record_of(golden_frame(m), snap_len);
}

inline std::vector<std::uint8_t> udp_frame(Ipv4 src, Ipv4 dst, std::uint16_t sport, std::uint16_t dport,
                                           std::vector<std::uint8_t> payload) {
  FrameSpec s;
  s.src = src;
  s.dst = dst;
  s.proto = ipproto::kUdp;
  s.src_port = sport;
  s.dst_port = dport;
  s.payload = std::move(payload);
  return build_frame(s);
}

inline std::vector<std::uint8_t> tcp_frame(Ipv4 src, Ipv4 dst, std::uint16_t sport, std::uint16_t dport,
                                           std::vector<std::uint8_t> payload, bool timestamps = true) {
  FrameSpec s;
  s.src = src;
  s.dst = dst;
  s.src_port = sport;
  s.dst_port = dport;
  s.tcp_timestamps = timestamps;
  s.payload = std::move(payload);
  return build_frame(s);
}

}  // namespace testing_support

namespace testing_support {

// 100 candidates (1 ICMP-tunnelled, 85 malformed, 1 DPI decoy, 13 clean) plus
// 20 non-ICS frames that never become candidates.
inline std::vector<PacketRecord> planted_corpus(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<std::uint8_t>> frames;
  auto inner = golden_frame(golden_message(ProtocolId::Modbus));
  FrameSpec outer;
  outer.src = kGoldenServer;
  outer.dst = kGoldenClient;
  frames.push_back(build_icmp_error(outer, 3, 3, inner, inner.size()));
  for (int i = 0; i < 85; ++i) frames.push_back(golden_frame(malformed_message(kAllProtocols[i % 7], rng)));
  frames.push_back(golden_frame(dns_decoy_message(rng)));
  for (int i = 0; i < 13; ++i) {
    auto p = kAllProtocols[i % 7];
    frames.push_back(golden_frame(i % 2 ? reply_message(p, rng) : request_message(p, rng)));
  }
  const std::string get = "GET / HTTP/1.1\r\n\r\n";
  for (int i = 0; i < 20; ++i) {
    frames.push_back(tcp_frame(kGoldenClient, kGoldenServer, static_cast<std::uint16_t>(50000 + i), 80,
                               {get.begin(), get.end()}));
  }
  std::vector<PacketRecord> out;
  std::vector<std::size_t> order(frames.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.uniform(i)]);
  for (auto i : order) out.push_back(record_of(frames[i]));
  return out;
}

}  // namespace testing_support
