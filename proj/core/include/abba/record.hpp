#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace abba {

// The two deployment populations: A is the baseline, B the candidate.
enum class Arm : std::uint8_t { A, B };

constexpr Arm opposite(Arm arm) noexcept { return arm == Arm::A ? Arm::B : Arm::A; }
std::string_view to_string(Arm arm) noexcept;
std::optional<Arm> parse_arm(std::string_view text) noexcept;

// One utterance collected online by the model of `arm` and decoded offline by
// the other model.
struct UtteranceRecord {
  std::string id;
  Arm arm = Arm::A;
  double collector_score = 0.0;  // score of the model that collected it
  double cross_score = 0.0;      // score of the other model, decoded offline
  std::optional<bool> hard_label;
  std::optional<double> soft_tp_prob;
  std::string stratum = "default";
  double sampling_weight = 1.0;  // inverse-probability weight
};

struct Thresholds {
  double t_A = 0.5;
  double t_B = 0.5;

  double of(Arm model) const noexcept { return model == Arm::A ? t_A : t_B; }
};

// True when the opposite model accepts the record offline (strict s > t).
inline bool cross_accepted(const UtteranceRecord& r, const Thresholds& t) noexcept {
  return r.cross_score > t.of(opposite(r.arm));
}

// True when the collecting model would still accept the record at `t`.
inline bool collector_accepts(const UtteranceRecord& r, const Thresholds& t) noexcept {
  return r.collector_score > t.of(r.arm);
}

// Total online opportunities (collected + rejected) per arm.
struct ArmTraffic {
  std::uint64_t streams_A = 0;
  std::uint64_t streams_B = 0;

  std::uint64_t of(Arm arm) const noexcept { return arm == Arm::A ? streams_A : streams_B; }
};

// Validated, in-memory collection of records with unique ids.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<UtteranceRecord> records);

  // Throws ValidationError on duplicate id, soft_tp_prob outside [0,1],
  // negative or non-finite weight, or non-finite scores.
  void add(UtteranceRecord record);

  std::span<const UtteranceRecord> records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }
  std::size_t count(Arm arm) const noexcept { return arm == Arm::A ? count_a_ : count_b_; }
  bool contains(const std::string& id) const { return ids_.contains(id); }

  auto begin() const noexcept { return records_.begin(); }
  auto end() const noexcept { return records_.end(); }

 private:
  std::vector<UtteranceRecord> records_;
  std::unordered_set<std::string> ids_;
  std::size_t count_a_ = 0;
  std::size_t count_b_ = 0;
};

// Checks the record against every field invariant; throws ValidationError.
void validate(const UtteranceRecord& record);

// Throws ValidationError when an arm reports fewer streams than collected records.
void validate(const ArmTraffic& traffic, const Dataset& dataset);

// Line-delimited JSON, one record per line. Blank lines are skipped.
Dataset read_dataset(std::istream& in);
Dataset load_dataset(const std::filesystem::path& path);
std::string to_json_line(const UtteranceRecord& record);
void write_dataset(std::ostream& out, const Dataset& dataset);
void save_dataset(const std::filesystem::path& path, const Dataset& dataset);

// Traffic as JSON: {"streams_A": n, "streams_B": n}, either at the top level
// or under a "traffic" key (as in simulator sidecars).
ArmTraffic parse_traffic(std::string_view json);
ArmTraffic load_traffic(const std::filesystem::path& path);

// Records the collecting model would still have accepted at `thresholds`.
Dataset retain_collected(const Dataset& dataset, const Thresholds& thresholds);

}  // namespace abba
