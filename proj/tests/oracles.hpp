#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "abba/counts.hpp"
#include "abba/record.hpp"

namespace abba::test {

// Naive tallies computed straight from the record list, written without the
// library's Observation/accumulate path so the two can be compared.
struct NaiveCounts {
  double pos[2] = {0, 0};
  double neg[2] = {0, 0};
  double tp_joint[2] = {0, 0};
  double fp_joint[2] = {0, 0};
  std::size_t unlabeled = 0;
};

inline NaiveCounts naive_counts(const Dataset& d, const Thresholds& t) {
  NaiveCounts c;
  for (const auto& r : d) {
    if (!r.hard_label) {
      ++c.unlabeled;
      continue;
    }
    const int side = r.arm == Arm::A ? 0 : 1;
    const double other = r.arm == Arm::A ? t.t_B : t.t_A;
    const bool joint = r.cross_score > other;
    if (*r.hard_label) {
      c.pos[side] += r.sampling_weight;
      if (joint) c.tp_joint[side] += r.sampling_weight;
    } else {
      c.neg[side] += r.sampling_weight;
      if (joint) c.fp_joint[side] += r.sampling_weight;
    }
  }
  return c;
}

inline double naive_rrecall(const NaiveCounts& c) {
  return (c.tp_joint[0] / c.pos[0]) * (c.pos[1] / c.tp_joint[1]);
}
inline double naive_rfpr(const NaiveCounts& c) {
  return (c.fp_joint[0] / c.neg[0]) * (c.neg[1] / c.fp_joint[1]);
}

inline UtteranceRecord make_record(std::string id, Arm arm, double collector, double cross,
                                   std::optional<bool> label, double weight = 1.0) {
  UtteranceRecord r;
  r.id = std::move(id);
  r.arm = arm;
  r.collector_score = collector;
  r.cross_score = cross;
  r.hard_label = label;
  r.sampling_weight = weight;
  return r;
}

// Small random dataset whose records all clear the collector threshold 0.5.
// Every (arm, label) cell gets at least one cross-accepted record so the
// direct ratios are defined.
inline Dataset random_small_dataset(std::uint64_t seed, bool binary_soft = false) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> size(4, 30);
  std::uniform_real_distribution<double> score(0.0, 1.0);
  std::uniform_real_distribution<double> above(0.5001, 1.0);
  std::bernoulli_distribution coin(0.5);
  std::vector<UtteranceRecord> out;
  int next = 0;
  auto push = [&](Arm arm, bool label, double cross) {
    auto r = make_record("r" + std::to_string(next++), arm, above(rng), cross, label);
    if (binary_soft) r.soft_tp_prob = label ? 1.0 : 0.0;
    out.push_back(std::move(r));
  };
  for (Arm arm : {Arm::A, Arm::B}) {
    for (bool label : {false, true}) push(arm, label, 0.9);
    const int n = size(rng);
    for (int i = 0; i < n; ++i) push(arm, coin(rng), score(rng));
  }
  return Dataset(std::move(out));
}

// Swaps the roles of the two arms.
inline Dataset swap_arms(const Dataset& d) {
  std::vector<UtteranceRecord> out(d.begin(), d.end());
  for (auto& r : out) r.arm = opposite(r.arm);
  return Dataset(std::move(out));
}

inline Dataset scale_weights(const Dataset& d, double c) {
  std::vector<UtteranceRecord> out(d.begin(), d.end());
  for (auto& r : out) r.sampling_weight *= c;
  return Dataset(std::move(out));
}

// Every A record duplicated into arm B with cross_score = collector_score.
inline Dataset a_vs_a(const Dataset& d) {
  std::vector<UtteranceRecord> out;
  for (const auto& r : d) {
    if (r.arm != Arm::A) continue;
    auto a = r;
    a.cross_score = a.collector_score;
    auto b = a;
    b.id += "-copy";
    b.arm = Arm::B;
    out.push_back(std::move(a));
    out.push_back(std::move(b));
  }
  return Dataset(std::move(out));
}

inline bool rel_close(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}

struct TableRow {
  double pos_A, neg_A, pos_B, neg_B, tp_on_A, fp_on_A, tp_on_B, fp_on_B, rrecall, rfpr;
};

inline const std::vector<TableRow>& consistency_tables() {
  static const std::vector<TableRow> rows = {
#include "oracle/consistency_tables.inc"
  };
  return rows;
}

inline ContingencyCounts to_counts(const TableRow& t) {
  ContingencyCounts c;
  c.pos_A = t.pos_A;
  c.neg_A = t.neg_A;
  c.pos_B = t.pos_B;
  c.neg_B = t.neg_B;
  c.tp_joint_on_A = t.tp_on_A;
  c.fp_joint_on_A = t.fp_on_A;
  c.tp_joint_on_B = t.tp_on_B;
  c.fp_joint_on_B = t.fp_on_B;
  return c;
}

}  // namespace abba::test
