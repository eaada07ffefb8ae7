#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "abba/counts.hpp"
#include "abba/record.hpp"

namespace abba {

enum class Metric { rrecall, rfpr };
enum class Method { direct, approx, semi_supervised, ab_test };

std::string_view to_string(Metric metric) noexcept;
std::string_view to_string(Method method) noexcept;
std::optional<Metric> parse_metric(std::string_view text) noexcept;
std::optional<Method> parse_method(std::string_view text) noexcept;

// Candidate-over-baseline ratio with an optional bootstrap interval.
struct RatioEstimate {
  Metric metric = Metric::rrecall;
  Method method = Method::direct;
  double point = 1.0;
  std::optional<double> ci_low;
  std::optional<double> ci_high;
  std::optional<double> ci_level;
  std::optional<std::size_t> replicates;
  std::size_t dropped_replicates = 0;

  bool has_interval() const noexcept { return ci_low.has_value() && ci_high.has_value(); }
};

// Every named estimator the bootstrap can resample.
enum class Estimator {
  rrecall_direct,
  rfpr_direct,
  rrecall_approx,
  rfpr_approx,
  rfpr_ab_test,
  ss_rrecall,
  ss_rfpr,
};

Metric metric_of(Estimator e) noexcept;
Method method_of(Estimator e) noexcept;
std::optional<Estimator> estimator_for(Metric metric, Method method) noexcept;
std::string_view to_string(Estimator e) noexcept;

// Cross-decoded ratios from hard-label counts. The direct forms are exact
// under random arm assignment; the approximate forms additionally assume the
// TP:FP mix among jointly accepted records is the same in both arms, which
// lets the plentiful true positives stabilise the FP ratio. All throw
// UndefinedRatioError naming the zero term.
RatioEstimate rrecall_direct(const ContingencyCounts& counts);
RatioEstimate rfpr_direct(const ContingencyCounts& counts);
RatioEstimate rrecall_approx(const ContingencyCounts& counts);
RatioEstimate rfpr_approx(const ContingencyCounts& counts);

// Classic A/B baseline: labeled false positives per unit of arm traffic.
RatioEstimate rfpr_ab_test(const ContingencyCounts& counts, const ArmTraffic& traffic);

// Soft-label forms. Throw MissingSoftLabelsError if any record lacks soft_tp_prob.
RatioEstimate ss_rrecall(const Dataset& dataset, const Thresholds& thresholds);
RatioEstimate ss_rfpr(const Dataset& dataset, const Thresholds& thresholds);
RatioEstimate ss_rrecall(const SoftLabelSums& sums);
RatioEstimate ss_rfpr(const SoftLabelSums& sums);

// Point value of `e` from pre-aggregated inputs, or nullopt when undefined.
// `traffic` is only consulted by rfpr_ab_test.
std::optional<double> try_evaluate(Estimator e, const ContingencyCounts& counts,
                                   const SoftLabelSums& sums,
                                   const std::optional<ArmTraffic>& traffic) noexcept;

// Full-dataset estimate; throws like the individual estimators.
RatioEstimate estimate(Estimator e, const Dataset& dataset, const Thresholds& thresholds,
                       const std::optional<ArmTraffic>& traffic = std::nullopt);

struct BaseMetrics {
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> fpr;
  std::optional<double> fdr;
};

// Each metric is empty when its own denominator is zero.
BaseMetrics base_metrics(double tp, double fp, double fn, double tn) noexcept;

enum class Region { both_improve, recall_only, fpr_only, both_degrade };
std::string_view to_string(Region region) noexcept;
Region classify(double rrecall, double rfpr) noexcept;

struct SweepRow {
  double t_B = 0.0;
  RatioEstimate rfpr;
  RatioEstimate rrecall;
  Region region = Region::both_improve;
};

// Re-thresholds B at each grid point. `deployment` carries t_A and the
// threshold B was collected under; grid points below the latter cannot be
// reconstructed and are rejected with ValidationError.
std::vector<SweepRow> threshold_sweep(const Dataset& dataset, const Thresholds& deployment,
                                      std::span<const double> t_B_grid, Method method);

enum class SelectionGoal { match_fpr, match_recall, dominate };
std::optional<SelectionGoal> parse_goal(std::string_view text) noexcept;

// match_fpr: rFPR closest to 1 from below, ties to higher rRecall.
// match_recall: rRecall closest to 1 from above, ties to lower rFPR.
// dominate: strictly better on both ratios, highest rRecall.
std::optional<SweepRow> select_threshold(std::span<const SweepRow> rows, SelectionGoal goal);

}  // namespace abba
