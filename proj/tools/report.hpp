#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "abba/estimators.hpp"

namespace abba::cli {

// Machine-readable result of one estimate, ss-estimate or sweep run.
struct Report {
  std::string command;
  std::string tool_version;
  std::string config_digest;
  std::optional<std::uint64_t> seed;
  nlohmann::json parameters = nlohmann::json::object();
  std::size_t records_A = 0;
  std::size_t records_B = 0;
  std::size_t excluded_records = 0;
  std::vector<RatioEstimate> estimates;
  std::vector<std::string> warnings;
  std::vector<SweepRow> sweep;
  std::optional<double> selected_t_B;
};

nlohmann::json to_json(const RatioEstimate& e);
RatioEstimate estimate_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Report& report);
Report report_from_json(const nlohmann::json& j);

// Fixed-width text rendering.
void render_table(std::ostream& out, const Report& report);

// FNV-1a 64-bit over `text`, as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view text);

}  // namespace abba::cli
