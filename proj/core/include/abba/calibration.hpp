#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>

#include "abba/record.hpp"

namespace abba {

// A machine score paired with its reference label. Hard labels are 0 or 1;
// any target in [0, 1] is accepted so fitted curves can be refit.
struct CalibrationPair {
  double machine_score = 0.0;
  double target = 0.0;
};

// Cubic map from label-machine score to true-positive probability.
struct CalibrationModel {
  std::array<double, 4> coefficients{};  // c0 + c1 m + c2 m^2 + c3 m^3
  double domain_lo = 0.0;
  double domain_hi = 1.0;
  bool monotone_on_domain = true;

  // Raw cubic value, no clamping.
  double polynomial(double score) const noexcept;
  // Score clamped to the fit domain, result clamped to [0, 1].
  double apply(double score) const noexcept;
};

// Weighted least-squares cubic fit. Needs at least 8 pairs, two distinct
// targets and two distinct scores; throws ValidationError otherwise.
// A non-monotone fit is reported through monotone_on_domain, not rejected.
CalibrationModel fit_calibration(std::span<const CalibrationPair> pairs,
                                 std::span<const double> weights = {});

// {"coefficients":[c0,c1,c2,c3],"score_domain":[lo,hi],"monotone":bool}
std::string to_json(const CalibrationModel& model);
CalibrationModel calibration_from_json(std::string_view json);
void save_calibration(const std::filesystem::path& path, const CalibrationModel& model);
CalibrationModel load_calibration(const std::filesystem::path& path);

using MachineScores = std::unordered_map<std::string, double>;

// Line-delimited {"id": "...", "machine_score": x}.
MachineScores read_machine_scores(std::istream& in);
MachineScores load_machine_scores(const std::filesystem::path& path);

// Copy of `dataset` with soft_tp_prob = model.apply(score) on every record.
// Hard labels are untouched. Throws ValidationError listing ids without a score.
Dataset annotate_soft(const Dataset& dataset, const CalibrationModel& model,
                      const MachineScores& machine_scores);

}  // namespace abba
