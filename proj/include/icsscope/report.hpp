#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "icsscope/pipeline.hpp"

namespace icsscope {

// Fixed-precision rendering used by every report ("" for nullopt).
std::string format_number(std::optional<double> v);

// `opcodes` adds an "action" field when the function code is known.
nlohmann::json dissection_json(std::size_t index, const Dissection& d, const OpcodeTable* opcodes = nullptr);
nlohmann::json packet_json(const PacketResult& r, const OpcodeTable* opcodes = nullptr);

// sanitize.csv / sanitize.json only.
void write_sanitize_report(const SanitizeReport& report, const std::filesystem::path& dir);

// The full bundle: sanitize, filters, transitions, domestic, daily, stability,
// asn_protocols, scan_overlap, rank, packets.jsonl and summary.json.
void write_report(const Analysis& analysis, const PipelineConfig& config, const std::filesystem::path& dir);

}  // namespace icsscope
