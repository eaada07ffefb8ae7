#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "abba/record.hpp"

namespace abba {

// Threshold both simulated models were deployed at; cross_score > this
// marks a cross-accept.
inline constexpr double kSimulatedThreshold = 0.5;

struct GroundTruth {
  double rrecall = 1.0;
  double rfpr = 1.0;
};

// Paired deployment: streams are split between arms, each collecting model
// accepts by its own recall/FPR, and the other model re-decodes the accepts.
struct AbbaSimConfig {
  double p_positive = 0.3;
  double recall_A = 0.8;
  double fpr_A = 0.1;
  double recall_B = 0.82;
  double fpr_B = 0.075;
  double cross_tp_given_A = 0.95;  // P(B accepts | A accepted, positive)
  double cross_fp_given_A = 0.5;   // P(B accepts | A accepted, negative)
  std::uint64_t n_streams = 10'000;
  double arm_split = 0.5;          // share of streams served by A
  std::optional<std::uint64_t> n_labeled = 500;  // empty: label every accept
  std::uint64_t seed = 0;
};

// P(A accepts | B accepted, L) for L = 1 and L = 0, implied by both arms
// sharing one joint acceptance law. Throws ConfigError if either leaves (0, 1].
struct ReverseConditionals {
  double tp = 0.0;
  double fp = 0.0;
};
ReverseConditionals reverse_conditionals(const AbbaSimConfig& config);

struct AbbaSimulation {
  Dataset dataset;
  ArmTraffic traffic;
  GroundTruth truth;
  ReverseConditionals reverse;
};

AbbaSimulation simulate_abba(const AbbaSimConfig& config);

struct BetaParams {
  double a = 1.0;
  double b = 1.0;
};

// Beta law of the machine's TP probability per (collecting arm, true label).
struct LabelMachineSpec {
  BetaParams A_negative;
  BetaParams A_positive;
  BetaParams B_negative;
  BetaParams B_positive;

  const BetaParams& at(Arm arm, bool positive) const noexcept {
    if (arm == Arm::A) return positive ? A_positive : A_negative;
    return positive ? B_positive : B_negative;
  }
};

// "M1": accurate on both arms. "M2": inflated p on A's false positives.
// "M3": deflated p on A's true positives. Empty for unknown names.
std::optional<LabelMachineSpec> label_machine_preset(std::string_view name);

struct SsSimConfig {
  double tp_fraction_A = 0.4;       // share of A's collections that are TPs
  double tp_fraction_B = 0.2;
  double cross_tp_given_A = 0.9;    // P(B accepts | A collected, L=1)
  double cross_fp_given_A = 0.3;    // P(B accepts | A collected, L=0)
  double cross_tp_given_B = 0.8;    // P(A accepts | B collected, L=1)
  double cross_fp_given_B = 0.6;    // P(A accepts | B collected, L=0)
  std::uint64_t n_per_arm = 50'000;
  LabelMachineSpec machine = *label_machine_preset("M1");
  std::uint64_t seed = 0;
};

struct SsSimulation {
  Dataset dataset;  // soft_tp_prob from the machine, hard_label = truth
  GroundTruth expected;
};

SsSimulation simulate_ss(const SsSimConfig& config);

// JSON documents mirroring the config fields. Missing fields keep their
// defaults; "machine" may be a preset name or
// {"A": {"negative": [a, b], "positive": [a, b]}, "B": {...}}.
// Throws ConfigError naming the offending field.
AbbaSimConfig abba_config_from_json(std::string_view json);
SsSimConfig ss_config_from_json(std::string_view json);
std::string to_json(const AbbaSimConfig& config);
std::string to_json(const SsSimConfig& config);

// Sidecar written next to a simulated dataset: traffic, ground truth, config.
std::string sidecar_json(const AbbaSimConfig& config, const AbbaSimulation& sim);
std::string sidecar_json(const SsSimConfig& config, const SsSimulation& sim);

}  // namespace abba
