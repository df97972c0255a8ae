#include "hopflab/report.hpp"

#include <cstdio>
#include <ctime>
#include <fstream>

#include <nlohmann/json.hpp>

namespace hopflab {

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12e", v);
    return buf;
}

void write_csv(const std::filesystem::path& path, const std::string& config_hash,
               const std::string& header, const std::vector<std::string>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "# config_hash=" << config_hash << "\n";
    out << header << "\n";
    for (const std::string& row : rows) out << row << "\n";
}

std::vector<std::string> hopf_scan_rows(const HopfScanReport& report) {
    std::vector<std::string> rows;
    rows.reserve(report.rows.size());
    for (const HopfScanRow& r : report.rows) {
        rows.push_back(format_number(r.rho) + "," + format_number(r.dnv0) + "," +
                       format_number(r.c) + "," + format_number(r.psi_term) + "," +
                       format_number(r.z_minus_psi) + "," + format_number(r.v_minus_z) + "," +
                       r.status);
    }
    return rows;
}

std::vector<std::string> sufficiency_rows(const SufficiencyReport& report) {
    std::vector<std::string> rows;
    rows.reserve(report.rows.size());
    for (const SufficiencyRow& r : report.rows) {
        rows.push_back(format_number(r.r) + "," + format_number(r.omega_value) + "," +
                       format_number(r.bound_rhs) + "," + format_number(r.ratio));
    }
    return rows;
}

void write_summary_json(const std::filesystem::path& path, const std::string& config_hash,
                        const nlohmann::json& payload) {
    nlohmann::json root = payload;
    root["config_hash"] = config_hash;
    std::time_t now = std::time(nullptr);
    char stamp[32];
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    root["metadata"] = {{"generated_at", stamp}};
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << root.dump(2) << "\n";
}

}  // namespace hopflab
