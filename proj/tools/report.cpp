#include "report.hpp"

#include <cstdio>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace abba::cli {

using nlohmann::json;

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> read_optional(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<double>();
}

}  // namespace

json to_json(const RatioEstimate& e) {
  return {{"metric", std::string(to_string(e.metric))},
          {"method", std::string(to_string(e.method))},
          {"point", e.point},
          {"ci_low", optional_number(e.ci_low)},
          {"ci_high", optional_number(e.ci_high)},
          {"ci_level", optional_number(e.ci_level)},
          {"replicates", e.replicates ? json(*e.replicates) : json(nullptr)},
          {"dropped_replicates", e.dropped_replicates}};
}

RatioEstimate estimate_from_json(const json& j) {
  RatioEstimate e;
  const auto metric = parse_metric(j.at("metric").get<std::string>());
  const auto method = parse_method(j.at("method").get<std::string>());
  if (!metric || !method) throw std::invalid_argument("report: unknown metric or method");
  e.metric = *metric;
  e.method = *method;
  e.point = j.at("point").get<double>();
  e.ci_low = read_optional(j, "ci_low");
  e.ci_high = read_optional(j, "ci_high");
  e.ci_level = read_optional(j, "ci_level");
  if (auto it = j.find("replicates"); it != j.end() && !it->is_null())
    e.replicates = it->get<std::size_t>();
  e.dropped_replicates = j.value("dropped_replicates", std::size_t{0});
  return e;
}

json to_json(const Report& r) {
  json j;
  j["command"] = r.command;
  j["tool_version"] = r.tool_version;
  j["config_digest"] = r.config_digest;
  j["seed"] = r.seed ? json(*r.seed) : json(nullptr);
  j["parameters"] = r.parameters;
  j["records"] = {{"A", r.records_A}, {"B", r.records_B}};
  j["excluded_records"] = r.excluded_records;
  j["estimates"] = json::array();
  for (const auto& e : r.estimates) j["estimates"].push_back(to_json(e));
  j["warnings"] = r.warnings;
  j["sweep"] = json::array();
  for (const auto& row : r.sweep)
    j["sweep"].push_back({{"t_B", row.t_B},
                          {"rFPR", to_json(row.rfpr)},
                          {"rRecall", to_json(row.rrecall)},
                          {"region", std::string(to_string(row.region))}});
  j["selected_t_B"] = optional_number(r.selected_t_B);
  return j;
}

Report report_from_json(const json& j) {
  Report r;
  r.command = j.at("command").get<std::string>();
  r.tool_version = j.at("tool_version").get<std::string>();
  r.config_digest = j.at("config_digest").get<std::string>();
  if (!j.at("seed").is_null()) r.seed = j["seed"].get<std::uint64_t>();
  r.parameters = j.at("parameters");
  r.records_A = j.at("records").at("A").get<std::size_t>();
  r.records_B = j.at("records").at("B").get<std::size_t>();
  r.excluded_records = j.at("excluded_records").get<std::size_t>();
  for (const auto& e : j.at("estimates")) r.estimates.push_back(estimate_from_json(e));
  r.warnings = j.at("warnings").get<std::vector<std::string>>();
  for (const auto& row : j.at("sweep")) {
    SweepRow s;
    s.t_B = row.at("t_B").get<double>();
    s.rfpr = estimate_from_json(row.at("rFPR"));
    s.rrecall = estimate_from_json(row.at("rRecall"));
    s.region = classify(s.rrecall.point, s.rfpr.point);
    if (row.at("region").get<std::string>() != to_string(s.region))
      throw std::invalid_argument("report: sweep region does not match its ratios");
    r.sweep.push_back(s);
  }
  r.selected_t_B = read_optional(j, "selected_t_B");
  return r;
}

namespace {

std::string interval(const RatioEstimate& e) {
  if (!e.has_interval()) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "[%.4f, %.4f]", *e.ci_low, *e.ci_high);
  return buf;
}

}  // namespace

void render_table(std::ostream& out, const Report& r) {
  out << r.command << "  records A=" << r.records_A << " B=" << r.records_B;
  if (r.excluded_records) out << "  unlabeled excluded=" << r.excluded_records;
  if (r.seed) out << "  seed=" << *r.seed;
  out << '\n';
  const auto flags = out.flags();
  out << std::fixed << std::setprecision(4);
  if (!r.estimates.empty()) {
    out << std::left << std::setw(9) << "metric" << std::setw(17) << "method" << std::right
        << std::setw(9) << "point" << "  interval\n";
    for (const auto& e : r.estimates)
      out << std::left << std::setw(9) << to_string(e.metric) << std::setw(17) << to_string(e.method)
          << std::right << std::setw(9) << e.point << "  " << interval(e) << '\n';
  }
  if (!r.sweep.empty()) {
    out << std::right << std::setw(8) << "t_B" << std::setw(11) << "FPR Ratio" << std::setw(14)
        << "Recall Ratio" << "  region\n";
    for (const auto& row : r.sweep) {
      out << std::setw(8) << row.t_B << std::setw(11) << row.rfpr.point << std::setw(14)
          << row.rrecall.point << "  " << to_string(row.region);
      if (r.selected_t_B && *r.selected_t_B == row.t_B) out << "  <- selected";
      out << '\n';
    }
  }
  out.flags(flags);
  for (const auto& w : r.warnings) out << "warning: " << w << '\n';
}

std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace abba::cli
