#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "abba/calibration.hpp"
#include "abba/error.hpp"
#include "oracles.hpp"

using namespace abba;

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Bernoulli(sigmoid(0.2 (m - 25))) labels on a dense grid over [0, 50].
std::vector<CalibrationPair> sigmoid_corpus(std::uint64_t seed, int per_score = 200) {
  std::mt19937_64 rng(seed);
  std::vector<CalibrationPair> pairs;
  for (int m = 0; m <= 50; ++m) {
    std::bernoulli_distribution draw(sigmoid(0.2 * (m - 25)));
    for (int k = 0; k < per_score; ++k) pairs.push_back({double(m), draw(rng) ? 1.0 : 0.0});
  }
  return pairs;
}

}  // namespace

TEST_SUITE("calibration") {
  TEST_CASE("zero and saturated polynomials") {
    CalibrationModel zero;
    zero.domain_lo = 0;
    zero.domain_hi = 50;
    for (double m : {-5.0, 0.0, 12.5, 50.0, 99.0}) CHECK(zero.apply(m) == 0.0);
    CalibrationModel two = zero;
    two.coefficients = {2, 0, 0, 0};
    for (double m : {-5.0, 0.0, 12.5, 50.0, 99.0}) CHECK(two.apply(m) == 1.0);
  }

  TEST_CASE("apply clamps the score to the fit domain") {
    CalibrationModel m;
    m.coefficients = {0, 0.02, 0, 0};
    m.domain_lo = 0;
    m.domain_hi = 40;
    CHECK(m.apply(100.0) == doctest::Approx(0.8));
    CHECK(m.apply(-10.0) == 0.0);
    CHECK(m.polynomial(100.0) == doctest::Approx(2.0));
  }

  TEST_CASE("synthetic sigmoid recovery") {
    const auto pairs = sigmoid_corpus(2024);
    const CalibrationModel model = fit_calibration(pairs);
    double mae = 0;
    for (int m = 0; m <= 50; ++m) mae += std::abs(model.apply(m) - sigmoid(0.2 * (m - 25)));
    mae /= 51;
    CHECK(mae < 0.05);
    CHECK(model.apply(25) == doctest::Approx(0.5).epsilon(0.1));
    CHECK(std::abs(model.apply(25) - 0.5) <= 0.05);
    CHECK(model.domain_lo == 0);
    CHECK(model.domain_hi == 50);
    CHECK(model.apply(0) < 0.1);
    CHECK(model.apply(50) > 0.9);
  }

  TEST_CASE("single class and constant score are rejected") {
    std::vector<CalibrationPair> ones;
    for (int i = 0; i < 10; ++i) ones.push_back({double(i), 1.0});
    CHECK_THROWS_AS(fit_calibration(ones), ValidationError);
    std::vector<CalibrationPair> flat;
    for (int i = 0; i < 10; ++i) flat.push_back({3.0, double(i % 2)});
    CHECK_THROWS_AS(fit_calibration(flat), ValidationError);
    std::vector<CalibrationPair> few = {{0, 0}, {1, 1}, {2, 0}, {3, 1}};
    CHECK_THROWS_AS(fit_calibration(few), ValidationError);
  }

  TEST_CASE("a single low-score negative among positives") {
    // Nineteen positives at scores 1..19 and one negative at score 0. The
    // cubic overshoots around the plateau; the negative still gets the lowest
    // probability.
    std::vector<CalibrationPair> pairs = {{0.0, 0.0}};
    for (int i = 1; i < 20; ++i) pairs.push_back({double(i), 1.0});
    const CalibrationModel model = fit_calibration(pairs);
    double lowest = 1.0;
    for (int i = 1; i < 20; ++i) lowest = std::min(lowest, model.apply(i));
    CHECK(model.apply(0) < lowest);
    CHECK(model.apply(19) > model.apply(0));
    CHECK(model.apply(19) > 0.9);
    CHECK_FALSE(model.monotone_on_domain);
  }

  TEST_CASE("a monotone corpus is diagnosed as monotone") {
    std::vector<CalibrationPair> pairs;
    for (int i = 0; i <= 20; ++i) pairs.push_back({double(i), i / 20.0});
    pairs.push_back({0.0, 0.0});
    pairs.push_back({20.0, 1.0});
    const CalibrationModel model = fit_calibration(pairs);
    CHECK(model.monotone_on_domain);
  }

  TEST_CASE("fit is invariant to pair order") {
    auto pairs = sigmoid_corpus(5, 20);
    const CalibrationModel a = fit_calibration(pairs);
    std::mt19937_64 rng(99);
    std::shuffle(pairs.begin(), pairs.end(), rng);
    const CalibrationModel b = fit_calibration(pairs);
    for (int m = 0; m <= 50; ++m) CHECK(a.polynomial(m) == doctest::Approx(b.polynomial(m)).epsilon(1e-10));
  }

  TEST_CASE("refitting on the model's own outputs reproduces the curve") {
    std::vector<CalibrationPair> pairs;
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> score(0.0, 50.0);
    for (int i = 0; i < 400; ++i) {
      const double m = score(rng);
      const double u = m / 50.0;
      pairs.push_back({m, std::clamp(0.1 + 0.5 * u * u + 0.3 * u * u * u + 0.05 * (i % 3 - 1), 0.0, 1.0)});
    }
    const CalibrationModel model = fit_calibration(pairs);
    std::vector<CalibrationPair> own;
    for (const auto& p : pairs) own.push_back({p.machine_score, model.apply(p.machine_score)});
    const CalibrationModel refit = fit_calibration(own);
    for (int i = 0; i <= 1000; ++i) {
      const double m = model.domain_lo + (model.domain_hi - model.domain_lo) * i / 1000.0;
      CHECK(std::abs(refit.apply(m) - model.apply(m)) < 1e-6);
    }
  }

  TEST_CASE("weights act like repetition") {
    std::vector<CalibrationPair> pairs, repeated;
    std::vector<double> weights;
    const auto base = sigmoid_corpus(17, 3);
    for (std::size_t i = 0; i < base.size(); ++i) {
      const int w = 1 + int(i % 3);
      pairs.push_back(base[i]);
      weights.push_back(w);
      for (int k = 0; k < w; ++k) repeated.push_back(base[i]);
    }
    const auto a = fit_calibration(pairs, weights);
    const auto b = fit_calibration(repeated);
    for (int m = 0; m <= 50; m += 5) CHECK(a.polynomial(m) == doctest::Approx(b.polynomial(m)).epsilon(1e-9));
  }

  TEST_CASE("model JSON round-trips") {
    const CalibrationModel model = fit_calibration(sigmoid_corpus(3, 10));
    const CalibrationModel back = calibration_from_json(to_json(model));
    CHECK(back.coefficients == model.coefficients);
    CHECK(back.domain_lo == model.domain_lo);
    CHECK(back.domain_hi == model.domain_hi);
    CHECK(back.monotone_on_domain == model.monotone_on_domain);
    CHECK_THROWS(calibration_from_json(R"({"coefficients":[1,2,3],"score_domain":[0,1]})"));
    CHECK_THROWS(calibration_from_json(R"({"coefficients":[1,2,3,4],"score_domain":[1,1]})"));
  }

  TEST_CASE("annotate_soft") {
    CalibrationModel model;
    model.coefficients = {0, 0.02, 0, 0};
    model.domain_lo = 0;
    model.domain_hi = 40;

    CHECK(annotate_soft(Dataset{}, model, {}).size() == 0);

    Dataset d;
    d.add(test::make_record("x", Arm::A, .9, .9, true));
    d.add(test::make_record("y", Arm::B, .9, .9, false));
    const Dataset top = annotate_soft(d, model, {{"x", 40.0}, {"y", 40.0}});
    for (const auto& r : top) {
      CHECK(*r.soft_tp_prob == doctest::Approx(0.8));
      CHECK(r.hard_label.has_value());
    }
    CHECK(*top.records()[0].hard_label == true);

    try {
      annotate_soft(d, model, {{"x", 1.0}});
      FAIL("expected missing scores");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("y") != std::string::npos);
    }
  }

  TEST_CASE("machine score lines") {
    std::istringstream in("{\"id\":\"x\",\"machine_score\":3.5}\n\n{\"id\":\"y\",\"machine_score\":-1}\n");
    const auto scores = read_machine_scores(in);
    CHECK(scores.size() == 2);
    CHECK(scores.at("x") == 3.5);
    std::istringstream bad("{\"id\":\"x\"}\n");
    CHECK_THROWS_AS(read_machine_scores(bad), FormatError);
  }
}
