#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "abba/record.hpp"

namespace abba {

// Weighted hard-label aggregates. "joint" means the record was also accepted
// offline by the model that did not collect it.
struct ContingencyCounts {
  double pos_A = 0.0;           // labeled positives collected by A
  double neg_A = 0.0;           // labeled negatives collected by A
  double pos_B = 0.0;
  double neg_B = 0.0;
  double tp_joint_on_A = 0.0;   // A-collected positives also accepted by B
  double fp_joint_on_A = 0.0;   // A-collected negatives also accepted by B
  double tp_joint_on_B = 0.0;   // B-collected positives also accepted by A
  double fp_joint_on_B = 0.0;
  std::size_t unlabeled_excluded = 0;

  // Positives of A rejected by B, and vice versa.
  double miss_B() const noexcept { return pos_A - tp_joint_on_A; }
  double miss_A() const noexcept { return pos_B - tp_joint_on_B; }
  // False positives accepted only by the collecting model.
  double fp_only_A() const noexcept { return neg_A - fp_joint_on_A; }
  double fp_only_B() const noexcept { return neg_B - fp_joint_on_B; }

  double tp_joint() const noexcept { return tp_joint_on_A + tp_joint_on_B; }
  double fp_joint() const noexcept { return fp_joint_on_A + fp_joint_on_B; }

  // Share of jointly accepted records that came from arm A (alpha) and arm B
  // (beta). Empty when nothing was jointly accepted.
  std::optional<double> alpha() const noexcept;
  std::optional<double> beta() const noexcept;

  // The same table with the roles of A and B exchanged.
  ContingencyCounts mirrored() const noexcept;
};

// Weighted sums of the true-positive probability p and of (1 - p).
struct SoftLabelSums {
  double tp_all_A = 0.0;
  double tp_joint_A = 0.0;
  double fp_all_A = 0.0;
  double fp_joint_A = 0.0;
  double tp_all_B = 0.0;
  double tp_joint_B = 0.0;
  double fp_all_B = 0.0;
  double fp_joint_B = 0.0;
  std::vector<std::string> missing_ids;  // records without soft_tp_prob
};

// A record reduced to what the estimators consume.
struct Observation {
  Arm arm = Arm::A;
  bool joint = false;
  double weight = 1.0;
  signed char label = -1;  // -1 unlabeled, else 0/1
  double tp_prob = -1.0;   // < 0 when absent
};

Observation observe(const UtteranceRecord& record, const Thresholds& thresholds) noexcept;
void accumulate(ContingencyCounts& counts, const Observation& obs) noexcept;
void accumulate(SoftLabelSums& sums, const Observation& obs) noexcept;

// Records without a hard label are skipped and counted in unlabeled_excluded.
ContingencyCounts build_counts(const Dataset& dataset, const Thresholds& thresholds);
SoftLabelSums build_soft_sums(const Dataset& dataset, const Thresholds& thresholds);

}  // namespace abba
