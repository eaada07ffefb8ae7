#include "abba/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "abba/error.hpp"

namespace abba {

using nlohmann::json;

namespace {

constexpr std::size_t kMinPairs = 8;
constexpr int kMonotoneGrid = 1000;

double horner(const std::array<double, 4>& c, double x) noexcept {
  return ((c[3] * x + c[2]) * x + c[1]) * x + c[0];
}

bool increasing_on(const std::array<double, 4>& c, double lo, double hi) {
  for (int i = 0; i < kMonotoneGrid; ++i) {
    const double m = lo + (hi - lo) * i / (kMonotoneGrid - 1);
    if (c[1] + 2.0 * c[2] * m + 3.0 * c[3] * m * m < 0.0) return false;
  }
  return true;
}

}  // namespace

double CalibrationModel::polynomial(double score) const noexcept {
  return horner(coefficients, score);
}

double CalibrationModel::apply(double score) const noexcept {
  if (std::isnan(score)) score = domain_lo;
  const double m = std::clamp(score, domain_lo, domain_hi);
  return std::clamp(polynomial(m), 0.0, 1.0);
}

CalibrationModel fit_calibration(std::span<const CalibrationPair> pairs,
                                 std::span<const double> weights) {
  if (pairs.size() < kMinPairs)
    throw ValidationError("calibration needs at least " + std::to_string(kMinPairs) +
                          " pairs, got " + std::to_string(pairs.size()));
  if (!weights.empty() && weights.size() != pairs.size())
    throw ValidationError("calibration weights must match the number of pairs");

  double lo = pairs.front().machine_score, hi = lo;
  double tmin = pairs.front().target, tmax = tmin;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    if (!std::isfinite(p.machine_score)) throw ValidationError("calibration score is not finite");
    if (!(p.target >= 0.0 && p.target <= 1.0))
      throw ValidationError("calibration target outside [0, 1]");
    if (!weights.empty() && !(weights[i] >= 0.0 && std::isfinite(weights[i])))
      throw ValidationError("calibration weights must be finite and >= 0");
    lo = std::min(lo, p.machine_score);
    hi = std::max(hi, p.machine_score);
    tmin = std::min(tmin, p.target);
    tmax = std::max(tmax, p.target);
  }
  if (tmin == tmax) throw ValidationError("calibration input has a single label class");
  if (lo == hi) throw ValidationError("calibration input has a constant machine score");

  // Solve on scores mapped to [-1, 1] for conditioning, then expand back.
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const auto n = static_cast<Eigen::Index>(pairs.size());
  Eigen::MatrixXd design(n, 4);
  Eigen::VectorXd target(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& p = pairs[static_cast<std::size_t>(i)];
    const double w = weights.empty() ? 1.0 : std::sqrt(weights[static_cast<std::size_t>(i)]);
    const double u = (p.machine_score - mid) / half;
    design(i, 0) = w;
    design(i, 1) = w * u;
    design(i, 2) = w * u * u;
    design(i, 3) = w * u * u * u;
    target(i) = w * p.target;
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < 4)
    throw ValidationError("calibration input has fewer than four distinct weighted scores");
  const Eigen::Vector4d b = qr.solve(target);

  // u = s m + o; expand sum_k b_k u^k into powers of m.
  const double s = 1.0 / half;
  const double o = -mid / half;
  constexpr double binom[4][4] = {{1, 0, 0, 0}, {1, 1, 0, 0}, {1, 2, 1, 0}, {1, 3, 3, 1}};
  CalibrationModel model;
  for (int k = 0; k < 4; ++k)
    for (int j = 0; j <= k; ++j)
      model.coefficients[j] += b[k] * binom[k][j] * std::pow(s, j) * std::pow(o, k - j);
  model.domain_lo = lo;
  model.domain_hi = hi;
  model.monotone_on_domain = increasing_on(model.coefficients, lo, hi);
  return model;
}

std::string to_json(const CalibrationModel& m) {
  json j;
  j["coefficients"] = m.coefficients;
  j["score_domain"] = {m.domain_lo, m.domain_hi};
  j["monotone"] = m.monotone_on_domain;
  return j.dump();
}

CalibrationModel calibration_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(0, std::string("calibration: malformed JSON: ") + e.what());
  }
  CalibrationModel m;
  try {
    const auto& c = j.at("coefficients");
    const auto& d = j.at("score_domain");
    if (!c.is_array() || c.size() != 4) throw FormatError(0, "calibration: need 4 coefficients");
    if (!d.is_array() || d.size() != 2) throw FormatError(0, "calibration: score_domain needs [lo, hi]");
    for (std::size_t i = 0; i < 4; ++i) m.coefficients[i] = c[i].get<double>();
    m.domain_lo = d[0].get<double>();
    m.domain_hi = d[1].get<double>();
    m.monotone_on_domain = j.value("monotone", true);
  } catch (const json::exception& e) {
    throw FormatError(0, std::string("calibration: ") + e.what());
  }
  if (!(m.domain_lo < m.domain_hi))
    throw ValidationError("calibration: score_domain lower bound must be below the upper bound");
  return m;
}

void save_calibration(const std::filesystem::path& path, const CalibrationModel& model) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << to_json(model) << '\n';
}

CalibrationModel load_calibration(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return calibration_from_json(ss.str());
}

MachineScores read_machine_scores(std::istream& in) {
  MachineScores scores;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw FormatError(line, std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("id") || !j["id"].is_string())
      throw FormatError(line, "field 'id' must be a string");
    if (!j.contains("machine_score") || !j["machine_score"].is_number())
      throw FormatError(line, "field 'machine_score' must be a number");
    auto [it, fresh] = scores.emplace(j["id"].get<std::string>(), j["machine_score"].get<double>());
    if (!fresh) throw ValidationError("line " + std::to_string(line) + ": duplicate id " + it->first);
  }
  return scores;
}

MachineScores load_machine_scores(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return read_machine_scores(in);
}

Dataset annotate_soft(const Dataset& dataset, const CalibrationModel& model,
                      const MachineScores& machine_scores) {
  std::vector<std::string> missing;
  std::vector<UtteranceRecord> out;
  out.reserve(dataset.size());
  for (const auto& r : dataset) {
    auto it = machine_scores.find(r.id);
    if (it == machine_scores.end()) {
      missing.push_back(r.id);
      continue;
    }
    UtteranceRecord copy = r;
    copy.soft_tp_prob = model.apply(it->second);
    out.push_back(std::move(copy));
  }
  if (!missing.empty()) {
    std::string msg = "no machine score for " + std::to_string(missing.size()) + " record(s):";
    for (std::size_t i = 0; i < std::min<std::size_t>(missing.size(), 20); ++i) msg += " " + missing[i];
    if (missing.size() > 20) msg += " ...";
    throw ValidationError(msg);
  }
  return Dataset(std::move(out));
}

}  // namespace abba
