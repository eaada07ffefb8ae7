#include "abba/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "abba/error.hpp"

namespace abba {

namespace {
constexpr double kWeightTolerance = 1e-9;

double spread(double p) { return std::sqrt(p * (1.0 - p)); }
}  // namespace

void validate(std::span<const StratumSpec> strata) {
  if (strata.empty()) throw ValidationError("at least one stratum is required");
  double total = 0.0;
  for (const auto& s : strata) {
    if (!(s.weight >= 0.0 && s.weight <= 1.0))
      throw ValidationError("stratum " + s.name + ": weight must lie in [0, 1]");
    if (!(s.expected_fpr > 0.0 && s.expected_fpr < 1.0))
      throw ValidationError("stratum " + s.name + ": expected_fpr must lie in (0, 1)");
    total += s.weight;
  }
  if (std::abs(total - 1.0) > kWeightTolerance)
    throw ValidationError("stratum weights sum to " + std::to_string(total) + ", not 1");
}

AllocationPlan neyman_allocate(std::uint64_t budget, std::span<const StratumSpec> strata,
                               std::optional<double> overall_fpr) {
  validate(strata);
  if (budget < strata.size())
    throw ValidationError("budget " + std::to_string(budget) + " is smaller than the " +
                          std::to_string(strata.size()) + " strata");
  if (overall_fpr && !(*overall_fpr > 0.0 && *overall_fpr < 1.0))
    throw ValidationError("overall FPR must lie in (0, 1)");

  double denom = 0.0;
  double pooled = 0.0;
  for (const auto& s : strata) {
    denom += s.weight * spread(s.expected_fpr);
    pooled += s.weight * s.expected_fpr;
  }

  AllocationPlan plan;
  plan.budget = budget;
  plan.overall_fpr = overall_fpr.value_or(pooled);
  plan.overall_fpr_overridden = overall_fpr.has_value();
  plan.efficiency = 1.0 - denom * denom / (plan.overall_fpr * (1.0 - plan.overall_fpr));

  std::vector<double> remainders;
  std::uint64_t assigned = 0;
  for (const auto& s : strata) {
    StratumAllocation a;
    a.name = s.name;
    a.exact_share = s.weight * spread(s.expected_fpr) / denom;
    const double exact = a.exact_share * static_cast<double>(budget);
    a.annotations = static_cast<std::uint64_t>(std::floor(exact));
    assigned += a.annotations;
    remainders.push_back(exact - std::floor(exact));
    plan.strata.push_back(std::move(a));
  }

  // Largest remainder; ties go to the earlier stratum.
  std::vector<std::size_t> order(strata.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainders[a] > remainders[b]; });
  for (std::size_t i = 0; assigned < budget; ++i, ++assigned)
    ++plan.strata[order[i % order.size()]].annotations;
  return plan;
}

std::vector<double> derive_weights(const AllocationPlan& plan, std::span<const StratumSpec> strata,
                                   std::span<const std::uint64_t> annotated) {
  validate(strata);
  if (plan.strata.size() != strata.size() || annotated.size() != strata.size())
    throw ValidationError("plan, strata and annotated counts must cover the same strata");
  const double total = static_cast<double>(std::accumulate(annotated.begin(), annotated.end(),
                                                           std::uint64_t{0}));
  std::vector<double> weights;
  weights.reserve(strata.size());
  for (std::size_t j = 0; j < strata.size(); ++j) {
    if (plan.strata[j].name != strata[j].name)
      throw ValidationError("plan stratum " + plan.strata[j].name + " does not match " +
                            strata[j].name);
    if (annotated[j] == 0) {
      if (strata[j].weight > 0.0)
        throw ValidationError("stratum " + strata[j].name + " has no annotations");
      weights.push_back(0.0);
      continue;
    }
    weights.push_back(strata[j].weight / (static_cast<double>(annotated[j]) / total));
  }
  return weights;
}

Dataset with_stratum_weights(const Dataset& dataset, const std::map<std::string, double>& weights) {
  Dataset out;
  for (const auto& r : dataset) {
    auto it = weights.find(r.stratum);
    if (it == weights.end())
      throw ValidationError("record " + r.id + ": no weight for stratum " + r.stratum);
    UtteranceRecord copy = r;
    copy.sampling_weight = it->second;
    out.add(std::move(copy));
  }
  return out;
}

std::vector<StratumSpec> parse_strata(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(0, std::string("strata: malformed JSON: ") + e.what());
  }
  if (!j.is_array()) throw FormatError(0, "strata: expected a JSON array");
  std::vector<StratumSpec> strata;
  for (const auto& item : j) {
    try {
      strata.push_back({item.at("name").get<std::string>(), item.at("weight").get<double>(),
                        item.at("expected_fpr").get<double>()});
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(0, std::string("strata: ") + e.what());
    }
  }
  return strata;
}

std::vector<StratumSpec> load_strata(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_strata(ss.str());
}

}  // namespace abba
