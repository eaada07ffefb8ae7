#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "abba/estimators.hpp"
#include "abba/record.hpp"

namespace abba {

struct BootstrapConfig {
  std::uint64_t seed;
  std::size_t replicates = 1000;
  double level = 0.95;
};

// Estimator value on each resampled dataset, indexed by replicate. Records
// are resampled with replacement within each arm, keeping arm sizes fixed.
// Undefined replicates hold NaN. Deterministic for a given seed regardless
// of `threads` (0 picks the hardware concurrency).
std::vector<double> bootstrap_replicates(const Dataset& dataset, const Thresholds& thresholds,
                                         Estimator estimator, const BootstrapConfig& config,
                                         const std::optional<ArmTraffic>& traffic = std::nullopt,
                                         unsigned threads = 0);

// Percentile interval around the full-sample point estimate. Undefined
// replicates are dropped; more than half dropped throws DegenerateBootstrapError.
RatioEstimate bootstrap_ci(const Dataset& dataset, const Thresholds& thresholds,
                           Estimator estimator, const BootstrapConfig& config,
                           const std::optional<ArmTraffic>& traffic = std::nullopt);

// Linear-interpolation quantile of sorted values, q in [0, 1].
double quantile_sorted(const std::vector<double>& sorted, double q);

}  // namespace abba
