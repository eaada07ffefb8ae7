#include "abba/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <thread>

#include "abba/counts.hpp"
#include "abba/error.hpp"
#include "abba/random.hpp"

namespace abba {

namespace {

bool uses_soft_labels(Estimator e) {
  return e == Estimator::ss_rrecall || e == Estimator::ss_rfpr;
}

// One arm: its full size and the records the estimator actually reads.
// Drawing n records with replacement and keeping the relevant ones is the
// same as drawing Binomial(n, relevant/n) of them uniformly from the
// relevant pool.
struct ArmPool {
  std::uint64_t size = 0;
  std::vector<Observation> relevant;
};

double replicate(const ArmPool (&pools)[2], Estimator e, const std::optional<ArmTraffic>& traffic,
                 std::uint64_t seed, std::uint64_t index) {
  SplitMix64 rng = stream_for(seed, index);
  ContingencyCounts counts;
  SoftLabelSums sums;
  const bool soft = uses_soft_labels(e);
  for (const ArmPool& pool : pools) {
    if (pool.relevant.empty()) continue;
    std::uint64_t draws = pool.size;
    if (pool.relevant.size() < pool.size) {
      std::binomial_distribution<std::uint64_t> kept(
          pool.size, static_cast<double>(pool.relevant.size()) / static_cast<double>(pool.size));
      draws = kept(rng);
    }
    std::uniform_int_distribution<std::size_t> pick(0, pool.relevant.size() - 1);
    for (std::uint64_t i = 0; i < draws; ++i) {
      const Observation& o = pool.relevant[pick(rng)];
      if (soft)
        accumulate(sums, o);
      else
        accumulate(counts, o);
    }
  }
  return try_evaluate(e, counts, sums, traffic).value_or(std::numeric_limits<double>::quiet_NaN());
}

}  // namespace

std::vector<double> bootstrap_replicates(const Dataset& dataset, const Thresholds& thresholds,
                                         Estimator estimator, const BootstrapConfig& config,
                                         const std::optional<ArmTraffic>& traffic,
                                         unsigned threads) {
  if (config.replicates < 1) throw ValidationError("bootstrap needs at least one replicate");
  if (!(config.level > 0.0 && config.level < 1.0))
    throw ValidationError("bootstrap level must lie in (0, 1)");

  ArmPool pools[2];
  const bool soft = uses_soft_labels(estimator);
  for (const auto& r : dataset) {
    ArmPool& pool = pools[r.arm == Arm::A ? 0 : 1];
    ++pool.size;
    const Observation o = observe(r, thresholds);
    if (soft ? o.tp_prob >= 0.0 : o.label >= 0) pool.relevant.push_back(o);
  }

  std::vector<double> values(config.replicates);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(
      std::min<std::size_t>(threads, std::max<std::size_t>(1, config.replicates / 64)));

  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      values[i] = replicate(pools, estimator, traffic, config.seed, i);
  };
  if (threads <= 1) {
    run(0, values.size());
  } else {
    std::vector<std::jthread> workers;
    const std::size_t chunk = (values.size() + threads - 1) / threads;
    for (std::size_t begin = 0; begin < values.size(); begin += chunk)
      workers.emplace_back(run, begin, std::min(values.size(), begin + chunk));
  }
  return values;
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw ValidationError("quantile of an empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0) return sorted[lo];
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

RatioEstimate bootstrap_ci(const Dataset& dataset, const Thresholds& thresholds,
                           Estimator estimator, const BootstrapConfig& config,
                           const std::optional<ArmTraffic>& traffic) {
  RatioEstimate result = estimate(estimator, dataset, thresholds, traffic);

  std::vector<double> values = bootstrap_replicates(dataset, thresholds, estimator, config, traffic);
  const auto total = values.size();
  std::erase_if(values, [](double v) { return std::isnan(v); });
  const std::size_t dropped = total - values.size();
  if (2 * dropped > total)
    throw DegenerateBootstrapError(
        std::string(to_string(estimator)) + ": " + std::to_string(dropped) + " of " +
        std::to_string(total) +
        " bootstrap replicates were undefined; use the approx estimator for sparse false positives");
  std::sort(values.begin(), values.end());

  const double tail = (1.0 - config.level) / 2.0;
  // Percentile bounds may exclude the full-sample point on skewed samples;
  // the reported interval always contains it.
  result.ci_low = std::min(quantile_sorted(values, tail), result.point);
  result.ci_high = std::max(quantile_sorted(values, 1.0 - tail), result.point);
  result.ci_level = config.level;
  result.replicates = total;
  result.dropped_replicates = dropped;
  return result;
}

}  // namespace abba
