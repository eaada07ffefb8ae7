#include "abba/estimators.hpp"

#include <algorithm>
#include <string>

#include "abba/error.hpp"

namespace abba {

std::string_view to_string(Metric metric) noexcept {
  return metric == Metric::rrecall ? "rRecall" : "rFPR";
}

std::string_view to_string(Method method) noexcept {
  switch (method) {
    case Method::direct: return "direct";
    case Method::approx: return "approx";
    case Method::semi_supervised: return "semi_supervised";
    case Method::ab_test: return "ab_test";
  }
  return "?";
}

std::optional<Metric> parse_metric(std::string_view text) noexcept {
  if (text == "rRecall") return Metric::rrecall;
  if (text == "rFPR") return Metric::rfpr;
  return std::nullopt;
}

std::optional<Method> parse_method(std::string_view text) noexcept {
  if (text == "direct") return Method::direct;
  if (text == "approx") return Method::approx;
  if (text == "semi_supervised" || text == "ss") return Method::semi_supervised;
  if (text == "ab_test" || text == "abtest") return Method::ab_test;
  return std::nullopt;
}

Metric metric_of(Estimator e) noexcept {
  switch (e) {
    case Estimator::rrecall_direct:
    case Estimator::rrecall_approx:
    case Estimator::ss_rrecall: return Metric::rrecall;
    default: return Metric::rfpr;
  }
}

Method method_of(Estimator e) noexcept {
  switch (e) {
    case Estimator::rrecall_direct:
    case Estimator::rfpr_direct: return Method::direct;
    case Estimator::rrecall_approx:
    case Estimator::rfpr_approx: return Method::approx;
    case Estimator::rfpr_ab_test: return Method::ab_test;
    case Estimator::ss_rrecall:
    case Estimator::ss_rfpr: return Method::semi_supervised;
  }
  return Method::direct;
}

std::optional<Estimator> estimator_for(Metric metric, Method method) noexcept {
  const bool recall = metric == Metric::rrecall;
  switch (method) {
    case Method::direct: return recall ? Estimator::rrecall_direct : Estimator::rfpr_direct;
    case Method::approx: return recall ? Estimator::rrecall_approx : Estimator::rfpr_approx;
    case Method::semi_supervised: return recall ? Estimator::ss_rrecall : Estimator::ss_rfpr;
    case Method::ab_test:
      if (recall) return std::nullopt;
      return Estimator::rfpr_ab_test;
  }
  return std::nullopt;
}

std::string_view to_string(Estimator e) noexcept {
  switch (e) {
    case Estimator::rrecall_direct: return "rrecall_direct";
    case Estimator::rfpr_direct: return "rfpr_direct";
    case Estimator::rrecall_approx: return "rrecall_approx";
    case Estimator::rfpr_approx: return "rfpr_approx";
    case Estimator::rfpr_ab_test: return "rfpr_ab_test";
    case Estimator::ss_rrecall: return "ss_rrecall";
    case Estimator::ss_rfpr: return "ss_rfpr";
  }
  return "?";
}

namespace {

// Either a value or the name of the quantity that was zero.
struct Ratio {
  double value = 0.0;
  const char* zero_term = nullptr;
};

Ratio undefined(const char* term) { return {0.0, term}; }

// (n1 * n2) / (d1 * d2), multiplied before dividing so mirror-image inputs
// give exactly 1.
Ratio cross_ratio(double n1, double d1, const char* d1_name, double n2, double d2,
                  const char* d2_name) {
  if (!(d1 > 0.0)) return undefined(d1_name);
  if (!(d2 > 0.0)) return undefined(d2_name);
  return {(n1 * n2) / (d1 * d2)};
}

Ratio recall_direct(const ContingencyCounts& c) {
  return cross_ratio(c.tp_joint_on_A, c.pos_A, "NPos_A", c.pos_B, c.tp_joint_on_B, "NTP_AB_on_B");
}

Ratio fpr_direct(const ContingencyCounts& c) {
  return cross_ratio(c.fp_joint_on_A, c.neg_A, "NNeg_A", c.neg_B, c.fp_joint_on_B, "NFP_AB_on_B");
}

// alpha (excl_other + beta * joint) / (beta (excl_self + alpha * joint))
Ratio pooled(const ContingencyCounts& c, double excl_num, double excl_den, double joint,
             const char* den_name) {
  const auto alpha = c.alpha();
  const auto beta = c.beta();
  if (!alpha || !beta) return undefined("NTP_AB + NFP_AB");
  if (!(*beta > 0.0)) return undefined("beta");
  const double den = excl_den + *alpha * joint;
  if (!(den > 0.0)) return undefined(den_name);
  return {(*alpha * (excl_num + *beta * joint)) / (*beta * den)};
}

Ratio recall_approx(const ContingencyCounts& c) {
  return pooled(c, c.miss_A(), c.miss_B(), c.tp_joint(), "Nmiss_B + alpha*NTP_AB");
}

Ratio fpr_approx(const ContingencyCounts& c) {
  return pooled(c, c.fp_only_B(), c.fp_only_A(), c.fp_joint(), "NFP_A + alpha*NFP_AB");
}

Ratio fpr_ab_test(const ContingencyCounts& c, const ArmTraffic& t) {
  if (t.streams_A == 0) return undefined("streams_A");
  if (t.streams_B == 0) return undefined("streams_B");
  if (!(c.neg_A > 0.0)) return undefined("NNeg_A");
  return {(c.neg_B * static_cast<double>(t.streams_A)) /
          (c.neg_A * static_cast<double>(t.streams_B))};
}

Ratio ss_recall(const SoftLabelSums& s) {
  return cross_ratio(s.tp_joint_A, s.tp_all_A, "sum p over A", s.tp_all_B, s.tp_joint_B,
                     "sum p over B jointly accepted");
}

Ratio ss_fpr(const SoftLabelSums& s) {
  return cross_ratio(s.fp_joint_A, s.fp_all_A, "sum (1-p) over A", s.fp_all_B, s.fp_joint_B,
                     "sum (1-p) over B jointly accepted");
}

RatioEstimate finish(Ratio r, Estimator e) {
  if (r.zero_term) throw UndefinedRatioError(std::string(to_string(e)), r.zero_term);
  RatioEstimate out;
  out.metric = metric_of(e);
  out.method = method_of(e);
  out.point = r.value;
  return out;
}

SoftLabelSums complete_soft_sums(const Dataset& dataset, const Thresholds& thresholds) {
  SoftLabelSums sums = build_soft_sums(dataset, thresholds);
  if (!sums.missing_ids.empty()) throw MissingSoftLabelsError(std::move(sums.missing_ids));
  return sums;
}

}  // namespace

RatioEstimate rrecall_direct(const ContingencyCounts& c) {
  return finish(recall_direct(c), Estimator::rrecall_direct);
}
RatioEstimate rfpr_direct(const ContingencyCounts& c) {
  return finish(fpr_direct(c), Estimator::rfpr_direct);
}
RatioEstimate rrecall_approx(const ContingencyCounts& c) {
  return finish(recall_approx(c), Estimator::rrecall_approx);
}
RatioEstimate rfpr_approx(const ContingencyCounts& c) {
  return finish(fpr_approx(c), Estimator::rfpr_approx);
}
RatioEstimate rfpr_ab_test(const ContingencyCounts& c, const ArmTraffic& t) {
  return finish(fpr_ab_test(c, t), Estimator::rfpr_ab_test);
}
RatioEstimate ss_rrecall(const SoftLabelSums& s) {
  if (!s.missing_ids.empty()) throw MissingSoftLabelsError(s.missing_ids);
  return finish(ss_recall(s), Estimator::ss_rrecall);
}
RatioEstimate ss_rfpr(const SoftLabelSums& s) {
  if (!s.missing_ids.empty()) throw MissingSoftLabelsError(s.missing_ids);
  return finish(ss_fpr(s), Estimator::ss_rfpr);
}
RatioEstimate ss_rrecall(const Dataset& d, const Thresholds& t) {
  return finish(ss_recall(complete_soft_sums(d, t)), Estimator::ss_rrecall);
}
RatioEstimate ss_rfpr(const Dataset& d, const Thresholds& t) {
  return finish(ss_fpr(complete_soft_sums(d, t)), Estimator::ss_rfpr);
}

std::optional<double> try_evaluate(Estimator e, const ContingencyCounts& c,
                                   const SoftLabelSums& s,
                                   const std::optional<ArmTraffic>& traffic) noexcept {
  Ratio r;
  switch (e) {
    case Estimator::rrecall_direct: r = recall_direct(c); break;
    case Estimator::rfpr_direct: r = fpr_direct(c); break;
    case Estimator::rrecall_approx: r = recall_approx(c); break;
    case Estimator::rfpr_approx: r = fpr_approx(c); break;
    case Estimator::rfpr_ab_test:
      if (!traffic) return std::nullopt;
      r = fpr_ab_test(c, *traffic);
      break;
    case Estimator::ss_rrecall: r = ss_recall(s); break;
    case Estimator::ss_rfpr: r = ss_fpr(s); break;
  }
  if (r.zero_term) return std::nullopt;
  return r.value;
}

RatioEstimate estimate(Estimator e, const Dataset& d, const Thresholds& t,
                       const std::optional<ArmTraffic>& traffic) {
  switch (e) {
    case Estimator::rrecall_direct: return rrecall_direct(build_counts(d, t));
    case Estimator::rfpr_direct: return rfpr_direct(build_counts(d, t));
    case Estimator::rrecall_approx: return rrecall_approx(build_counts(d, t));
    case Estimator::rfpr_approx: return rfpr_approx(build_counts(d, t));
    case Estimator::rfpr_ab_test:
      if (!traffic) throw ValidationError("rfpr_ab_test requires arm traffic");
      validate(*traffic, d);
      return rfpr_ab_test(build_counts(d, t), *traffic);
    case Estimator::ss_rrecall: return ss_rrecall(d, t);
    case Estimator::ss_rfpr: return ss_rfpr(d, t);
  }
  throw Error("unknown estimator");
}

BaseMetrics base_metrics(double tp, double fp, double fn, double tn) noexcept {
  BaseMetrics m;
  if (tp + fp > 0.0) {
    m.precision = tp / (tp + fp);
    m.fdr = fp / (tp + fp);
  }
  if (tp + fn > 0.0) m.recall = tp / (tp + fn);
  if (fp + tn > 0.0) m.fpr = fp / (fp + tn);
  return m;
}

std::string_view to_string(Region region) noexcept {
  switch (region) {
    case Region::both_improve: return "both_improve";
    case Region::recall_only: return "recall_only";
    case Region::fpr_only: return "fpr_only";
    case Region::both_degrade: return "both_degrade";
  }
  return "?";
}

Region classify(double rrecall, double rfpr) noexcept {
  const bool recall_ok = rrecall >= 1.0;
  const bool fpr_ok = rfpr <= 1.0;
  if (recall_ok && fpr_ok) return Region::both_improve;
  if (recall_ok) return Region::recall_only;
  if (fpr_ok) return Region::fpr_only;
  return Region::both_degrade;
}

std::vector<SweepRow> threshold_sweep(const Dataset& dataset, const Thresholds& deployment,
                                      std::span<const double> grid, Method method) {
  if (method != Method::direct && method != Method::approx)
    throw ValidationError("threshold sweep supports the direct and approx methods only");
  std::vector<SweepRow> rows;
  rows.reserve(grid.size());
  for (double t : grid) {
    if (t < deployment.t_B)
      throw ValidationError("t_B " + std::to_string(t) + " is below the deployment threshold " +
                            std::to_string(deployment.t_B) +
                            "; records B rejected online were never collected");
    const Thresholds at{deployment.t_A, t};
    const ContingencyCounts counts = build_counts(retain_collected(dataset, at), at);
    SweepRow row;
    row.t_B = t;
    try {
      row.rfpr = method == Method::direct ? rfpr_direct(counts) : rfpr_approx(counts);
      row.rrecall = method == Method::direct ? rrecall_direct(counts) : rrecall_approx(counts);
    } catch (const UndefinedRatioError& e) {
      throw UndefinedRatioError(e.estimator() + " at t_B=" + std::to_string(t), e.term());
    }
    row.region = classify(row.rrecall.point, row.rfpr.point);
    rows.push_back(row);
  }
  return rows;
}

std::optional<SelectionGoal> parse_goal(std::string_view text) noexcept {
  if (text == "match_fpr") return SelectionGoal::match_fpr;
  if (text == "match_recall") return SelectionGoal::match_recall;
  if (text == "dominate") return SelectionGoal::dominate;
  return std::nullopt;
}

std::optional<SweepRow> select_threshold(std::span<const SweepRow> rows, SelectionGoal goal) {
  const SweepRow* best = nullptr;
  auto better = [goal](const SweepRow& a, const SweepRow& b) {
    switch (goal) {
      case SelectionGoal::match_fpr:
        if (a.rfpr.point != b.rfpr.point) return a.rfpr.point > b.rfpr.point;
        return a.rrecall.point > b.rrecall.point;
      case SelectionGoal::match_recall:
        if (a.rrecall.point != b.rrecall.point) return a.rrecall.point < b.rrecall.point;
        return a.rfpr.point < b.rfpr.point;
      case SelectionGoal::dominate:
        return a.rrecall.point > b.rrecall.point;
    }
    return false;
  };
  auto qualifies = [goal](const SweepRow& r) {
    switch (goal) {
      case SelectionGoal::match_fpr: return r.rfpr.point <= 1.0;
      case SelectionGoal::match_recall: return r.rrecall.point >= 1.0;
      case SelectionGoal::dominate: return r.rrecall.point > 1.0 && r.rfpr.point < 1.0;
    }
    return false;
  };
  for (const auto& row : rows)
    if (qualifies(row) && (!best || better(row, *best))) best = &row;
  if (!best) return std::nullopt;
  return *best;
}

}  // namespace abba
