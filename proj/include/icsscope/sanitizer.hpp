#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "icsscope/capture.hpp"
#include "icsscope/dissectors.hpp"

namespace icsscope {

enum class SanitizeVerdict : std::uint8_t { Kept, DroppedTunnel, DroppedMalformed, DroppedKnownProtocol };

std::string_view sanitize_verdict_name(SanitizeVerdict v);
std::optional<SanitizeVerdict> sanitize_verdict_from_name(std::string_view s);

/// Payload signatures of common non-ICS protocols.
class DpiCatalog {
 public:
  struct Signature {
    std::string name;
    std::optional<std::uint8_t> transport;  // nullopt matches TCP and UDP
    std::optional<std::uint16_t> port_hint;  // matches either endpoint
    std::vector<std::uint8_t> prefix;
    std::vector<std::uint8_t> mask;          // same length as prefix
  };

  static DpiCatalog load(const std::filesystem::path& path);
  // `origin` names the source in error messages.
  static DpiCatalog parse(std::string_view json_text, const std::string& origin);
  // Signatures for HTTP, TLS, SSH, DNS, NTP and SMTP.
  static DpiCatalog builtin();
  static std::string_view builtin_json();

  void add(Signature sig);
  const std::vector<Signature>& signatures() const { return signatures_; }

  // Name of the first matching signature, if any.
  std::optional<std::string> match(const PacketRecord& record) const;

 private:
  std::vector<Signature> signatures_;
};

// Step 1: ICMP error messages whose quoted datagram carried the ICS bytes.
SanitizeVerdict strip_tunnels(const PacketRecord& record, const Dissection& dissection);
// Step 2.
SanitizeVerdict drop_malformed(const Dissection& dissection);
// Step 3.
SanitizeVerdict dpi_cross_check(const PacketRecord& record, const DpiCatalog& catalog);

struct SanitizeCounts {
  std::uint64_t candidates_in{0};
  std::uint64_t after_step1{0};
  std::uint64_t after_step2{0};
  std::uint64_t after_step3{0};
  std::uint64_t port_only_count{0};

  SanitizeCounts& operator+=(const SanitizeCounts& o);
  bool operator==(const SanitizeCounts&) const = default;

  // Share of candidates_in remaining, in percent; nullopt when there were no candidates.
  std::optional<double> remaining_pct(std::uint64_t remaining) const;
  // Port-only detections relative to the sanitized count, in percent.
  std::optional<double> port_only_pct() const;
};

struct SanitizeReport {
  std::map<std::string, SanitizeCounts> by_vantage;

  SanitizeReport& operator+=(const SanitizeReport& o);
  SanitizeCounts total() const;
};

struct Candidate {
  const PacketRecord* record;
  Dissection dissection;
};

enum class SanitizeStep : std::uint8_t { Tunnel, Malformed, Dpi };
inline constexpr std::array<SanitizeStep, 3> kDefaultStepOrder = {SanitizeStep::Tunnel, SanitizeStep::Malformed,
                                                                  SanitizeStep::Dpi};

struct SanitizeResult {
  std::vector<Candidate> kept;           // input order preserved
  std::vector<SanitizeVerdict> verdicts;  // index-aligned with the input
  SanitizeReport report;
};

// The first failing step in `order` determines a candidate's verdict.
SanitizeVerdict judge(const Candidate& candidate, const DpiCatalog& catalog,
                      const std::array<SanitizeStep, 3>& order = kDefaultStepOrder);

SanitizeResult sanitize(std::span<const Candidate> candidates, const DpiCatalog& catalog,
                        const std::array<SanitizeStep, 3>& order = kDefaultStepOrder);

// Records whose source or destination port is a registered ICS port.
std::uint64_t port_only_baseline(std::span<const PacketRecord> records, const PortRegistry& ports);
bool port_only_match(const PacketRecord& record, const PortRegistry& ports);

}  // namespace icsscope
