#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "hopflab/drift_functionals.hpp"
#include "hopflab/experiments.hpp"

namespace hopflab {

/// FNV-1a over the raw config bytes; reports carry it so a CSV can be traced
/// back to the exact config that produced it.
std::uint64_t fnv1a64(const std::string& bytes);
std::string hash_hex(std::uint64_t h);

/// Fixed "%.12e" formatting; CSV bodies must be byte-identical across reruns
/// and across --jobs settings.
std::string format_number(double v);

void write_csv(const std::filesystem::path& path, const std::string& config_hash,
               const std::string& header, const std::vector<std::string>& rows);

std::vector<std::string> hopf_scan_rows(const HopfScanReport& report);
std::vector<std::string> sufficiency_rows(const SufficiencyReport& report);

/// JSON summary with a metadata block (timestamps live here, not in CSVs).
void write_summary_json(const std::filesystem::path& path, const std::string& config_hash,
                        const nlohmann::json& payload);

}  // namespace hopflab
