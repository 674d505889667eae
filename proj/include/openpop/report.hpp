#ifndef OPENPOP_REPORT_HPP
#define OPENPOP_REPORT_HPP

#include <cstdint>
#include <string>

#include <json.hpp>

namespace openpop {

/// Canonical float formatting for machine-readable outputs: 17 significant
/// digits, one fixed byte representation per value.
std::string format_double(double v);

/// Serializes with sorted keys and format_double for every floating-point
/// number (non-finite values become the strings "inf"/"-inf"/"nan"), so a
/// report's bytes depend only on its values.
std::string canonical_json(const nlohmann::json& j);

/// FNV-1a over the canonical serialization.
std::uint64_t config_fingerprint(const nlohmann::json& doc);

std::string to_hex(std::uint64_t v);

void write_text_file(const std::string& path, const std::string& content);

} // namespace openpop

#endif // OPENPOP_REPORT_HPP
