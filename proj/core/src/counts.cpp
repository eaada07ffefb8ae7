#include "abba/counts.hpp"

namespace abba {

std::optional<double> ContingencyCounts::alpha() const noexcept {
  const double total = tp_joint() + fp_joint();
  if (total <= 0.0) return std::nullopt;
  return (tp_joint_on_A + fp_joint_on_A) / total;
}

std::optional<double> ContingencyCounts::beta() const noexcept {
  const double total = tp_joint() + fp_joint();
  if (total <= 0.0) return std::nullopt;
  return (tp_joint_on_B + fp_joint_on_B) / total;
}

ContingencyCounts ContingencyCounts::mirrored() const noexcept {
  ContingencyCounts m;
  m.pos_A = pos_B;
  m.neg_A = neg_B;
  m.pos_B = pos_A;
  m.neg_B = neg_A;
  m.tp_joint_on_A = tp_joint_on_B;
  m.fp_joint_on_A = fp_joint_on_B;
  m.tp_joint_on_B = tp_joint_on_A;
  m.fp_joint_on_B = fp_joint_on_A;
  m.unlabeled_excluded = unlabeled_excluded;
  return m;
}

Observation observe(const UtteranceRecord& r, const Thresholds& t) noexcept {
  Observation o;
  o.arm = r.arm;
  o.joint = cross_accepted(r, t);
  o.weight = r.sampling_weight;
  if (r.hard_label) o.label = *r.hard_label ? 1 : 0;
  if (r.soft_tp_prob) o.tp_prob = *r.soft_tp_prob;
  return o;
}

void accumulate(ContingencyCounts& c, const Observation& o) noexcept {
  if (o.label < 0) {
    ++c.unlabeled_excluded;
    return;
  }
  const bool a = o.arm == Arm::A;
  if (o.label == 1) {
    (a ? c.pos_A : c.pos_B) += o.weight;
    if (o.joint) (a ? c.tp_joint_on_A : c.tp_joint_on_B) += o.weight;
  } else {
    (a ? c.neg_A : c.neg_B) += o.weight;
    if (o.joint) (a ? c.fp_joint_on_A : c.fp_joint_on_B) += o.weight;
  }
}

void accumulate(SoftLabelSums& s, const Observation& o) noexcept {
  if (o.tp_prob < 0.0) return;
  const double tp = o.weight * o.tp_prob;
  const double fp = o.weight * (1.0 - o.tp_prob);
  if (o.arm == Arm::A) {
    s.tp_all_A += tp;
    s.fp_all_A += fp;
    if (o.joint) {
      s.tp_joint_A += tp;
      s.fp_joint_A += fp;
    }
  } else {
    s.tp_all_B += tp;
    s.fp_all_B += fp;
    if (o.joint) {
      s.tp_joint_B += tp;
      s.fp_joint_B += fp;
    }
  }
}

ContingencyCounts build_counts(const Dataset& dataset, const Thresholds& thresholds) {
  ContingencyCounts c;
  for (const auto& r : dataset) accumulate(c, observe(r, thresholds));
  return c;
}

SoftLabelSums build_soft_sums(const Dataset& dataset, const Thresholds& thresholds) {
  SoftLabelSums s;
  for (const auto& r : dataset) {
    if (!r.soft_tp_prob) {
      s.missing_ids.push_back(r.id);
      continue;
    }
    accumulate(s, observe(r, thresholds));
  }
  return s;
}

}  // namespace abba
