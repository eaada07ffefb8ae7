#include "abba/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iterator>
#include <vector>

#include <nlohmann/json.hpp>

#include "abba/error.hpp"
#include "abba/random.hpp"

namespace abba {

using nlohmann::json;

namespace {

// Keeps the label-subset draw out of the per-stream seed space.
constexpr std::uint64_t kLabelStream = 0x4c4142454c53ULL;

void require_open_unit(double v, const char* field) {
  if (!(v > 0.0 && v < 1.0)) throw ConfigError(field, "must lie in (0, 1)");
}

void require_half_open_unit(double v, const char* field) {
  if (!(v > 0.0 && v <= 1.0)) throw ConfigError(field, "must lie in (0, 1]");
}

std::string stream_id(char prefix, std::uint64_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%08llu", prefix, static_cast<unsigned long long>(index));
  return buf;
}

// Accepted scores sit above the threshold, skewed high for positives and
// low for negatives; rejected scores sit below it with the same skew.
double accepted_score(SplitMix64& rng, bool positive) {
  const double u = 1.0 - rng.uniform();  // (0, 1]
  const double s = kSimulatedThreshold + (1.0 - kSimulatedThreshold) * std::pow(u, positive ? 0.5 : 2.0);
  return std::max(s, std::nextafter(kSimulatedThreshold, 1.0));
}

double rejected_score(SplitMix64& rng, bool positive) {
  return kSimulatedThreshold * std::pow(rng.uniform(), positive ? 0.5 : 2.0);
}

UtteranceRecord make_record(SplitMix64& rng, std::string id, Arm arm, bool positive, bool joint) {
  UtteranceRecord r;
  r.id = std::move(id);
  r.arm = arm;
  r.collector_score = accepted_score(rng, positive);
  r.cross_score = joint ? accepted_score(rng, positive) : rejected_score(rng, positive);
  r.hard_label = positive;
  r.stratum = joint ? "agree" : "disagree";
  return r;
}

void validate(const AbbaSimConfig& c) {
  require_open_unit(c.p_positive, "p_positive");
  require_open_unit(c.recall_A, "recall_A");
  require_open_unit(c.fpr_A, "fpr_A");
  require_open_unit(c.recall_B, "recall_B");
  require_open_unit(c.fpr_B, "fpr_B");
  require_half_open_unit(c.cross_tp_given_A, "cross_tp_given_A");
  require_half_open_unit(c.cross_fp_given_A, "cross_fp_given_A");
  require_open_unit(c.arm_split, "arm_split");
  if (c.n_streams == 0) throw ConfigError("n_streams", "must be positive");
}

void validate(const BetaParams& p, const char* field) {
  if (!(p.a > 0.0 && p.b > 0.0 && std::isfinite(p.a) && std::isfinite(p.b)))
    throw ConfigError(field, "Beta parameters must be positive and finite");
}

void validate(const SsSimConfig& c) {
  require_open_unit(c.tp_fraction_A, "tp_fraction_A");
  require_open_unit(c.tp_fraction_B, "tp_fraction_B");
  require_half_open_unit(c.cross_tp_given_A, "cross_tp_given_A");
  require_half_open_unit(c.cross_fp_given_A, "cross_fp_given_A");
  require_half_open_unit(c.cross_tp_given_B, "cross_tp_given_B");
  require_half_open_unit(c.cross_fp_given_B, "cross_fp_given_B");
  if (c.n_per_arm == 0) throw ConfigError("n_per_arm", "must be positive");
  validate(c.machine.A_negative, "machine.A.negative");
  validate(c.machine.A_positive, "machine.A.positive");
  validate(c.machine.B_negative, "machine.B.negative");
  validate(c.machine.B_positive, "machine.B.positive");
}

}  // namespace

ReverseConditionals reverse_conditionals(const AbbaSimConfig& c) {
  validate(c);
  ReverseConditionals r;
  r.tp = c.recall_A * c.cross_tp_given_A / c.recall_B;
  r.fp = c.fpr_A * c.cross_fp_given_A / c.fpr_B;
  if (!(r.tp > 0.0 && r.tp <= 1.0))
    throw ConfigError("recall_A/cross_tp_given_A/recall_B",
                      "implied P(A accepts | B accepted, positive) = " + std::to_string(r.tp) +
                          " lies outside (0, 1]");
  if (!(r.fp > 0.0 && r.fp <= 1.0))
    throw ConfigError("fpr_A/cross_fp_given_A/fpr_B",
                      "implied P(A accepts | B accepted, negative) = " + std::to_string(r.fp) +
                          " lies outside (0, 1]");
  return r;
}

AbbaSimulation simulate_abba(const AbbaSimConfig& c) {
  AbbaSimulation sim;
  sim.reverse = reverse_conditionals(c);
  sim.truth = {c.recall_B / c.recall_A, c.fpr_B / c.fpr_A};

  const auto n_A = static_cast<std::uint64_t>(std::llround(static_cast<double>(c.n_streams) * c.arm_split));
  sim.traffic = {n_A, c.n_streams - n_A};

  std::vector<UtteranceRecord> accepts;
  for (std::uint64_t i = 0; i < c.n_streams; ++i) {
    SplitMix64 rng = stream_for(c.seed, i);
    const Arm arm = i < n_A ? Arm::A : Arm::B;
    const bool positive = rng.bernoulli(c.p_positive);
    const double accept_p = arm == Arm::A ? (positive ? c.recall_A : c.fpr_A)
                                          : (positive ? c.recall_B : c.fpr_B);
    if (!rng.bernoulli(accept_p)) continue;
    const double cross_p = arm == Arm::A ? (positive ? c.cross_tp_given_A : c.cross_fp_given_A)
                                         : (positive ? sim.reverse.tp : sim.reverse.fp);
    const bool joint = rng.bernoulli(cross_p);
    accepts.push_back(make_record(rng, stream_id('s', i), arm, positive, joint));
  }

  if (c.n_labeled) {
    if (*c.n_labeled > accepts.size())
      throw ConfigError("n_labeled", std::to_string(*c.n_labeled) + " exceeds the " +
                                         std::to_string(accepts.size()) + " simulated accepts");
    std::vector<std::size_t> all(accepts.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    std::vector<std::size_t> chosen;
    chosen.reserve(*c.n_labeled);
    SplitMix64 rng = stream_for(c.seed ^ kLabelStream, 0);
    std::sample(all.begin(), all.end(), std::back_inserter(chosen), *c.n_labeled, rng);
    std::vector<bool> keep(accepts.size(), false);
    for (std::size_t i : chosen) keep[i] = true;
    for (std::size_t i = 0; i < accepts.size(); ++i)
      if (!keep[i]) accepts[i].hard_label.reset();
  }

  sim.dataset = Dataset(std::move(accepts));
  return sim;
}

std::optional<LabelMachineSpec> label_machine_preset(std::string_view name) {
  const BetaParams accurate_neg{2.0, 1000.0};
  const BetaParams accurate_pos{300.0, 5.0};
  LabelMachineSpec m{accurate_neg, accurate_pos, accurate_neg, accurate_pos};
  if (name == "M1") return m;
  if (name == "M2") {
    m.A_negative = {5.0, 100.0};
    return m;
  }
  if (name == "M3") {
    m.A_positive = {100.0, 10.0};
    return m;
  }
  return std::nullopt;
}

SsSimulation simulate_ss(const SsSimConfig& c) {
  validate(c);
  SsSimulation sim;
  sim.expected = {c.cross_tp_given_A / c.cross_tp_given_B, c.cross_fp_given_A / c.cross_fp_given_B};

  std::vector<UtteranceRecord> records;
  records.reserve(2 * c.n_per_arm);
  for (Arm arm : {Arm::A, Arm::B}) {
    const bool a = arm == Arm::A;
    const std::uint64_t offset = a ? 0 : c.n_per_arm;
    for (std::uint64_t i = 0; i < c.n_per_arm; ++i) {
      SplitMix64 rng = stream_for(c.seed, offset + i);
      const bool positive = rng.bernoulli(a ? c.tp_fraction_A : c.tp_fraction_B);
      const double cross_p = a ? (positive ? c.cross_tp_given_A : c.cross_fp_given_A)
                               : (positive ? c.cross_tp_given_B : c.cross_fp_given_B);
      const bool joint = rng.bernoulli(cross_p);
      UtteranceRecord r = make_record(rng, stream_id(a ? 'a' : 'b', i), arm, positive, joint);
      const BetaParams& beta = c.machine.at(arm, positive);
      r.soft_tp_prob = sample_beta(rng, beta.a, beta.b);
      records.push_back(std::move(r));
    }
  }
  sim.dataset = Dataset(std::move(records));
  return sim;
}

namespace {

json parse_object(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config", "expected a JSON object");
  return j;
}

template <class T>
void read(const json& j, const char* key, T& out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError(key, "has the wrong type");
  }
}

BetaParams read_beta(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ConfigError(field, "expected [a, b]");
  return {j[0].get<double>(), j[1].get<double>()};
}

LabelMachineSpec read_machine(const json& j) {
  if (j.is_string()) {
    auto preset = label_machine_preset(j.get<std::string>());
    if (!preset) throw ConfigError("machine", "unknown preset " + j.get<std::string>());
    return *preset;
  }
  if (!j.is_object()) throw ConfigError("machine", "expected a preset name or an object");
  LabelMachineSpec m;
  for (const char* arm : {"A", "B"}) {
    const std::string base = std::string("machine.") + arm;
    if (!j.contains(arm) || !j[arm].is_object()) throw ConfigError(base, "missing");
    const json& a = j[arm];
    if (!a.contains("negative")) throw ConfigError(base + ".negative", "missing");
    if (!a.contains("positive")) throw ConfigError(base + ".positive", "missing");
    const BetaParams neg = read_beta(a["negative"], base + ".negative");
    const BetaParams pos = read_beta(a["positive"], base + ".positive");
    if (arm[0] == 'A') {
      m.A_negative = neg;
      m.A_positive = pos;
    } else {
      m.B_negative = neg;
      m.B_positive = pos;
    }
  }
  return m;
}

json beta_json(const BetaParams& p) { return json::array({p.a, p.b}); }

json machine_json(const LabelMachineSpec& m) {
  return {{"A", {{"negative", beta_json(m.A_negative)}, {"positive", beta_json(m.A_positive)}}},
          {"B", {{"negative", beta_json(m.B_negative)}, {"positive", beta_json(m.B_positive)}}}};
}

json config_json(const AbbaSimConfig& c) {
  return {{"p_positive", c.p_positive},
          {"recall_A", c.recall_A},
          {"fpr_A", c.fpr_A},
          {"recall_B", c.recall_B},
          {"fpr_B", c.fpr_B},
          {"cross_tp_given_A", c.cross_tp_given_A},
          {"cross_fp_given_A", c.cross_fp_given_A},
          {"n_streams", c.n_streams},
          {"arm_split", c.arm_split},
          {"n_labeled", c.n_labeled ? json(*c.n_labeled) : json(nullptr)},
          {"seed", c.seed}};
}

json config_json(const SsSimConfig& c) {
  return {{"tp_fraction_A", c.tp_fraction_A},
          {"tp_fraction_B", c.tp_fraction_B},
          {"cross_tp_given_A", c.cross_tp_given_A},
          {"cross_fp_given_A", c.cross_fp_given_A},
          {"cross_tp_given_B", c.cross_tp_given_B},
          {"cross_fp_given_B", c.cross_fp_given_B},
          {"n_per_arm", c.n_per_arm},
          {"machine", machine_json(c.machine)},
          {"seed", c.seed}};
}

}  // namespace

AbbaSimConfig abba_config_from_json(std::string_view text) {
  const json j = parse_object(text);
  AbbaSimConfig c;
  read(j, "p_positive", c.p_positive);
  read(j, "recall_A", c.recall_A);
  read(j, "fpr_A", c.fpr_A);
  read(j, "recall_B", c.recall_B);
  read(j, "fpr_B", c.fpr_B);
  read(j, "cross_tp_given_A", c.cross_tp_given_A);
  read(j, "cross_fp_given_A", c.cross_fp_given_A);
  read(j, "n_streams", c.n_streams);
  read(j, "arm_split", c.arm_split);
  read(j, "seed", c.seed);
  if (auto it = j.find("n_labeled"); it != j.end()) {
    if (it->is_null())
      c.n_labeled.reset();
    else if (it->is_number_unsigned())
      c.n_labeled = it->get<std::uint64_t>();
    else
      throw ConfigError("n_labeled", "must be a non-negative integer or null");
  }
  reverse_conditionals(c);
  return c;
}

SsSimConfig ss_config_from_json(std::string_view text) {
  const json j = parse_object(text);
  SsSimConfig c;
  read(j, "tp_fraction_A", c.tp_fraction_A);
  read(j, "tp_fraction_B", c.tp_fraction_B);
  read(j, "cross_tp_given_A", c.cross_tp_given_A);
  read(j, "cross_fp_given_A", c.cross_fp_given_A);
  read(j, "cross_tp_given_B", c.cross_tp_given_B);
  read(j, "cross_fp_given_B", c.cross_fp_given_B);
  read(j, "n_per_arm", c.n_per_arm);
  read(j, "seed", c.seed);
  if (auto it = j.find("machine"); it != j.end()) c.machine = read_machine(*it);
  validate(c);
  return c;
}

std::string to_json(const AbbaSimConfig& c) { return config_json(c).dump(); }
std::string to_json(const SsSimConfig& c) { return config_json(c).dump(); }

std::string sidecar_json(const AbbaSimConfig& c, const AbbaSimulation& sim) {
  json j;
  j["kind"] = "abba";
  j["seed"] = c.seed;
  j["traffic"] = {{"streams_A", sim.traffic.streams_A}, {"streams_B", sim.traffic.streams_B}};
  j["ground_truth"] = {{"rRecall", sim.truth.rrecall}, {"rFPR", sim.truth.rfpr}};
  j["reverse_conditionals"] = {{"tp", sim.reverse.tp}, {"fp", sim.reverse.fp}};
  j["thresholds"] = {{"t_A", kSimulatedThreshold}, {"t_B", kSimulatedThreshold}};
  j["records"] = {{"A", sim.dataset.count(Arm::A)}, {"B", sim.dataset.count(Arm::B)}};
  j["config"] = config_json(c);
  return j.dump(2);
}

std::string sidecar_json(const SsSimConfig& c, const SsSimulation& sim) {
  json j;
  j["kind"] = "ss";
  j["seed"] = c.seed;
  j["ground_truth"] = {{"rRecall", sim.expected.rrecall}, {"rFPR", sim.expected.rfpr}};
  j["thresholds"] = {{"t_A", kSimulatedThreshold}, {"t_B", kSimulatedThreshold}};
  j["records"] = {{"A", sim.dataset.count(Arm::A)}, {"B", sim.dataset.count(Arm::B)}};
  j["config"] = config_json(c);
  return j.dump(2);
}

}  // namespace abba
