#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "abba/record.hpp"

namespace abba {

// One annotation stratum, e.g. the records on which the two models disagree.
struct StratumSpec {
  std::string name;
  double weight = 0.0;        // population share, strata sum to 1
  double expected_fpr = 0.0;  // anticipated FPR in the stratum, in (0, 1)
};

struct StratumAllocation {
  std::string name;
  double exact_share = 0.0;       // fractional Neyman share of the budget
  std::uint64_t annotations = 0;  // rounded count
};

struct AllocationPlan {
  std::uint64_t budget = 0;
  std::vector<StratumAllocation> strata;
  // Variance reduction of the stratified FPR estimate against simple random
  // sampling of the same size.
  double efficiency = 0.0;
  double overall_fpr = 0.0;
  bool overall_fpr_overridden = false;
};

// Throws ValidationError on invalid strata.
void validate(std::span<const StratumSpec> strata);

// Neyman allocation: N_j proportional to w_j sqrt(p_j (1 - p_j)), rounded by
// largest remainder so the counts add up to `budget`. The efficiency uses the
// pooled FPR sum_j w_j p_j unless `overall_fpr` is supplied.
AllocationPlan neyman_allocate(std::uint64_t budget, std::span<const StratumSpec> strata,
                               std::optional<double> overall_fpr = std::nullopt);

// Inverse-probability weight per stratum: population share over annotated share.
std::vector<double> derive_weights(const AllocationPlan& plan, std::span<const StratumSpec> strata,
                                   std::span<const std::uint64_t> annotated);

// Copy of `dataset` with sampling_weight set from the record's stratum.
// Throws ValidationError for a record whose stratum has no weight.
Dataset with_stratum_weights(const Dataset& dataset, const std::map<std::string, double>& weights);

// JSON array of {"name", "weight", "expected_fpr"}.
std::vector<StratumSpec> parse_strata(std::string_view json);
std::vector<StratumSpec> load_strata(const std::filesystem::path& path);

}  // namespace abba
