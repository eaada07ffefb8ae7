#include "abba/record.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "abba/error.hpp"

namespace abba {

using nlohmann::json;

std::string_view to_string(Arm arm) noexcept { return arm == Arm::A ? "A" : "B"; }

std::optional<Arm> parse_arm(std::string_view text) noexcept {
  if (text == "A") return Arm::A;
  if (text == "B") return Arm::B;
  return std::nullopt;
}

void validate(const UtteranceRecord& r) {
  if (r.id.empty()) throw ValidationError("record has an empty id");
  if (!std::isfinite(r.collector_score) || !std::isfinite(r.cross_score))
    throw ValidationError("record " + r.id + ": scores must be finite");
  if (r.soft_tp_prob) {
    const double p = *r.soft_tp_prob;
    if (!(p >= 0.0 && p <= 1.0))
      throw ValidationError("record " + r.id + ": soft_tp_prob " + std::to_string(p) +
                            " outside [0,1]");
  }
  if (!std::isfinite(r.sampling_weight) || r.sampling_weight < 0.0)
    throw ValidationError("record " + r.id + ": sampling_weight must be finite and >= 0");
}

Dataset::Dataset(std::vector<UtteranceRecord> records) {
  records_.reserve(records.size());
  for (auto& r : records) add(std::move(r));
}

void Dataset::add(UtteranceRecord record) {
  validate(record);
  if (!ids_.insert(record.id).second)
    throw ValidationError("duplicate record id " + record.id);
  (record.arm == Arm::A ? count_a_ : count_b_) += 1;
  records_.push_back(std::move(record));
}

void validate(const ArmTraffic& traffic, const Dataset& dataset) {
  for (Arm arm : {Arm::A, Arm::B}) {
    if (traffic.of(arm) < dataset.count(arm))
      throw ValidationError("streams_" + std::string(to_string(arm)) + " (" +
                            std::to_string(traffic.of(arm)) + ") is below the " +
                            std::to_string(dataset.count(arm)) + " records collected");
  }
}

namespace {

double number_field(const json& j, const char* key, std::size_t line) {
  auto it = j.find(key);
  if (it == j.end()) throw FormatError(line, std::string("missing field '") + key + "'");
  if (!it->is_number()) throw FormatError(line, std::string("field '") + key + "' must be a number");
  return it->get<double>();
}

UtteranceRecord parse_record(const json& j, std::size_t line) {
  if (!j.is_object()) throw FormatError(line, "expected a JSON object");
  UtteranceRecord r;

  auto id = j.find("id");
  if (id == j.end() || !id->is_string()) throw FormatError(line, "field 'id' must be a string");
  r.id = id->get<std::string>();

  auto arm = j.find("arm");
  if (arm == j.end() || !arm->is_string()) throw FormatError(line, "field 'arm' must be \"A\" or \"B\"");
  auto parsed = parse_arm(arm->get_ref<const std::string&>());
  if (!parsed) throw FormatError(line, "field 'arm' must be \"A\" or \"B\"");
  r.arm = *parsed;

  r.collector_score = number_field(j, "collector_score", line);
  r.cross_score = number_field(j, "cross_score", line);

  if (auto it = j.find("hard_label"); it != j.end() && !it->is_null()) {
    if (!it->is_number_integer() || (it->get<int>() != 0 && it->get<int>() != 1))
      throw FormatError(line, "field 'hard_label' must be 0, 1 or null");
    r.hard_label = it->get<int>() == 1;
  }
  if (auto it = j.find("soft_tp_prob"); it != j.end() && !it->is_null()) {
    if (!it->is_number()) throw FormatError(line, "field 'soft_tp_prob' must be a number or null");
    r.soft_tp_prob = it->get<double>();
  }
  if (auto it = j.find("stratum"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw FormatError(line, "field 'stratum' must be a string");
    r.stratum = it->get<std::string>();
  }
  if (auto it = j.find("sampling_weight"); it != j.end() && !it->is_null()) {
    if (!it->is_number()) throw FormatError(line, "field 'sampling_weight' must be a number");
    r.sampling_weight = it->get<double>();
  }
  return r;
}

}  // namespace

Dataset read_dataset(std::istream& in) {
  Dataset dataset;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw FormatError(line, std::string("malformed JSON: ") + e.what());
    }
    try {
      dataset.add(parse_record(j, line));
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(line) + ": " + e.what());
    }
  }
  return dataset;
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return read_dataset(in);
}

std::string to_json_line(const UtteranceRecord& r) {
  json j = json::object();
  j["id"] = r.id;
  j["arm"] = std::string(to_string(r.arm));
  j["collector_score"] = r.collector_score;
  j["cross_score"] = r.cross_score;
  j["hard_label"] = r.hard_label ? json(*r.hard_label ? 1 : 0) : json(nullptr);
  j["soft_tp_prob"] = r.soft_tp_prob ? json(*r.soft_tp_prob) : json(nullptr);
  j["stratum"] = r.stratum;
  j["sampling_weight"] = r.sampling_weight;
  return j.dump();
}

void write_dataset(std::ostream& out, const Dataset& dataset) {
  for (const auto& r : dataset) out << to_json_line(r) << '\n';
}

void save_dataset(const std::filesystem::path& path, const Dataset& dataset) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  write_dataset(out, dataset);
}

ArmTraffic parse_traffic(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(0, std::string("traffic: malformed JSON: ") + e.what());
  }
  if (j.contains("traffic")) j = j["traffic"];
  ArmTraffic t;
  for (const char* key : {"streams_A", "streams_B"}) {
    if (!j.contains(key) || !j[key].is_number_unsigned())
      throw FormatError(0, std::string("traffic: '") + key + "' must be a non-negative integer");
  }
  t.streams_A = j["streams_A"].get<std::uint64_t>();
  t.streams_B = j["streams_B"].get<std::uint64_t>();
  return t;
}

ArmTraffic load_traffic(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_traffic(ss.str());
}

Dataset retain_collected(const Dataset& dataset, const Thresholds& thresholds) {
  Dataset kept;
  for (const auto& r : dataset)
    if (collector_accepts(r, thresholds)) kept.add(r);
  return kept;
}

}  // namespace abba
