#include <doctest.h>

#include <cmath>

#include "abba/error.hpp"
#include "abba/estimators.hpp"
#include "oracles.hpp"

using namespace abba;
using abba::test::make_record;

namespace {

ContingencyCounts worked_counts() {
  ContingencyCounts c;
  c.tp_joint_on_A = 90;
  c.fp_joint_on_A = 9;
  c.tp_joint_on_B = 60;
  c.fp_joint_on_B = 6;
  c.pos_A = 100;  // miss_B = 10
  c.pos_B = 70;   // miss_A = 10
  c.neg_A = 20;   // fp_only_A = 11
  c.neg_B = 10;   // fp_only_B = 4
  return c;
}

ContingencyCounts symmetric_counts() {
  ContingencyCounts c;
  c.pos_A = c.pos_B = 50;
  c.neg_A = c.neg_B = 20;
  c.tp_joint_on_A = c.tp_joint_on_B = 40;
  c.fp_joint_on_A = c.fp_joint_on_B = 7;
  return c;
}

SweepRow row(double tb, double rfpr, double rrecall) {
  SweepRow r;
  r.t_B = tb;
  r.rfpr.point = rfpr;
  r.rfpr.metric = Metric::rfpr;
  r.rrecall.point = rrecall;
  r.region = classify(rrecall, rfpr);
  return r;
}

std::vector<SweepRow> decision_rows() {
  return {row(0.1, 1.5, 1.20), row(0.2, 1.0, 1.05), row(0.3, 0.8, 1.01), row(0.4, 0.7, 0.98)};
}

}  // namespace

TEST_SUITE("estimators") {
  TEST_CASE("direct rRecall by substitution") {
    ContingencyCounts c;
    c.tp_joint_on_A = 95;
    c.pos_A = 100;
    c.pos_B = 100;
    c.tp_joint_on_B = 80;
    const auto e = rrecall_direct(c);
    CHECK(e.point == doctest::Approx(1.1875).epsilon(1e-15));
    CHECK(e.metric == Metric::rrecall);
    CHECK(e.method == Method::direct);
  }

  TEST_CASE("direct rFPR by substitution") {
    ContingencyCounts c;
    c.fp_joint_on_A = 9;
    c.neg_A = 20;
    c.neg_B = 10;
    c.fp_joint_on_B = 6;
    CHECK(rfpr_direct(c).point == doctest::Approx(0.75).epsilon(1e-15));
  }

  TEST_CASE("symmetric counts give exactly one") {
    const auto c = symmetric_counts();
    CHECK(rrecall_direct(c).point == 1.0);
    CHECK(rfpr_direct(c).point == 1.0);
    CHECK(rrecall_approx(c).point == 1.0);
    CHECK(rfpr_approx(c).point == 1.0);
  }

  TEST_CASE("worked example: approx equals direct when the joint mix matches") {
    const auto c = worked_counts();
    REQUIRE(*c.alpha() == doctest::Approx(0.6));
    CHECK(rrecall_approx(c).point == doctest::Approx(1.05).epsilon(1e-14));
    CHECK(rrecall_direct(c).point == doctest::Approx(1.05).epsilon(1e-14));
    CHECK(rfpr_approx(c).point == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(rfpr_direct(c).point == doctest::Approx(0.75).epsilon(1e-14));
  }

  TEST_CASE("zero denominators name the term") {
    ContingencyCounts c = worked_counts();
    c.fp_joint_on_B = 0;
    try {
      rfpr_direct(c);
      FAIL("expected an undefined ratio");
    } catch (const UndefinedRatioError& e) {
      CHECK(e.term() == "NFP_AB_on_B");
    }
    CHECK_NOTHROW(rfpr_approx(c));
    CHECK_THROWS_AS(rrecall_direct(ContingencyCounts{}), UndefinedRatioError);
    CHECK_THROWS_AS(rrecall_approx(ContingencyCounts{}), UndefinedRatioError);
  }

  TEST_CASE("A/B-test baseline") {
    ContingencyCounts c;
    c.neg_A = 10;
    c.neg_B = 10;
    CHECK(rfpr_ab_test(c, {1000, 2000}).point == doctest::Approx(0.5));
    CHECK(rfpr_ab_test(c, {500, 500}).point == 1.0);
    CHECK_THROWS_AS(rfpr_ab_test(c, {0, 500}), UndefinedRatioError);
    c.neg_A = 0;
    CHECK_THROWS_AS(rfpr_ab_test(c, {500, 500}), UndefinedRatioError);
  }

  TEST_CASE("consistency tables: approx equals direct and the exact rational value") {
    for (const auto& t : test::consistency_tables()) {
      const auto c = test::to_counts(t);
      CHECK(test::rel_close(rrecall_approx(c).point, rrecall_direct(c).point, 1e-12));
      CHECK(test::rel_close(rfpr_approx(c).point, rfpr_direct(c).point, 1e-12));
      CHECK(test::rel_close(rrecall_direct(c).point, t.rrecall, 1e-14));
      CHECK(test::rel_close(rfpr_direct(c).point, t.rfpr, 1e-14));
    }
  }

  TEST_CASE("mirrored counts invert every ratio") {
    for (const auto& t : test::consistency_tables()) {
      const auto c = test::to_counts(t);
      const auto m = c.mirrored();
      CHECK(test::rel_close(rrecall_direct(m).point, 1.0 / rrecall_direct(c).point, 1e-14));
      CHECK(test::rel_close(rfpr_direct(m).point, 1.0 / rfpr_direct(c).point, 1e-14));
      CHECK(test::rel_close(rrecall_approx(m).point, 1.0 / rrecall_approx(c).point, 1e-14));
      CHECK(test::rel_close(rfpr_approx(m).point, 1.0 / rfpr_approx(c).point, 1e-14));
    }
  }

  TEST_CASE("direct estimates match the naive record oracle") {
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
      const Dataset d = test::random_small_dataset(seed);
      const Thresholds t{0.5, 0.5};
      const auto n = test::naive_counts(d, t);
      CHECK(test::rel_close(estimate(Estimator::rrecall_direct, d, t).point, test::naive_rrecall(n), 1e-14));
      CHECK(test::rel_close(estimate(Estimator::rfpr_direct, d, t).point, test::naive_rfpr(n), 1e-14));
    }
  }

  TEST_CASE("weight scaling leaves every estimator unchanged") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const Dataset d = test::random_small_dataset(seed, true);
      const Dataset s = test::scale_weights(d, 3.7);
      const Thresholds t{0.5, 0.5};
      for (Estimator e : {Estimator::rrecall_direct, Estimator::rfpr_direct, Estimator::rrecall_approx,
                          Estimator::rfpr_approx, Estimator::ss_rrecall, Estimator::ss_rfpr}) {
        CHECK(test::rel_close(estimate(e, d, t).point, estimate(e, s, t).point, 1e-13));
      }
    }
  }

  TEST_CASE("swapping arms inverts every ratio on datasets") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const Dataset d = test::random_small_dataset(seed, true);
      const Dataset s = test::swap_arms(d);
      const Thresholds t{0.5, 0.5};
      for (Estimator e : {Estimator::rrecall_direct, Estimator::rfpr_direct, Estimator::rrecall_approx,
                          Estimator::rfpr_approx, Estimator::ss_rrecall, Estimator::ss_rfpr}) {
        CHECK(test::rel_close(estimate(e, s, t).point, 1.0 / estimate(e, d, t).point, 1e-13));
      }
    }
  }

  TEST_CASE("A-vs-A duplicated dataset gives exactly one") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const Dataset d = test::a_vs_a(test::random_small_dataset(seed, true));
      const Thresholds t{0.5, 0.5};
      for (Estimator e : {Estimator::rrecall_direct, Estimator::rfpr_direct, Estimator::rrecall_approx,
                          Estimator::rfpr_approx, Estimator::ss_rrecall, Estimator::ss_rfpr}) {
        CHECK(estimate(e, d, t).point == 1.0);
      }
    }
  }

  TEST_CASE("binary soft labels degenerate to the direct estimators") {
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
      const Dataset d = test::random_small_dataset(seed, true);
      const Thresholds t{0.5, 0.5};
      CHECK(test::rel_close(ss_rrecall(d, t).point, estimate(Estimator::rrecall_direct, d, t).point, 1e-12));
      CHECK(test::rel_close(ss_rfpr(d, t).point, estimate(Estimator::rfpr_direct, d, t).point, 1e-12));
    }
  }

  TEST_CASE("soft estimators are one when every record is cross-accepted") {
    Dataset d;
    const double p[] = {0.1, 0.7, 0.95, 0.3};
    for (int i = 0; i < 4; ++i) {
      auto r = make_record("r" + std::to_string(i), i % 2 ? Arm::B : Arm::A, .9, .99, std::nullopt);
      r.soft_tp_prob = p[i];
      d.add(r);
    }
    CHECK(ss_rrecall(d, {0.5, 0.5}).point == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(ss_rfpr(d, {0.5, 0.5}).point == doctest::Approx(1.0).epsilon(1e-15));
  }

  TEST_CASE("missing soft labels are listed") {
    Dataset d;
    auto r = make_record("with", Arm::A, .9, .9, true);
    r.soft_tp_prob = 0.5;
    d.add(r);
    d.add(make_record("without", Arm::B, .9, .9, true));
    try {
      ss_rrecall(d, {0.5, 0.5});
      FAIL("expected missing soft labels");
    } catch (const MissingSoftLabelsError& e) {
      REQUIRE(e.ids().size() == 1);
      CHECK(e.ids()[0] == "without");
    }
  }

  TEST_CASE("base metrics") {
    auto m = base_metrics(90, 10, 0, 0);
    CHECK(*m.recall == 1.0);
    CHECK(*m.precision == doctest::Approx(0.9));
    CHECK(*m.fpr == 1.0);
    CHECK(*m.fdr == doctest::Approx(0.1));

    m = base_metrics(25, 25, 25, 25);
    CHECK(*m.precision == 0.5);
    CHECK(*m.recall == 0.5);
    CHECK(*m.fpr == 0.5);
    CHECK(*m.fdr == 0.5);

    m = base_metrics(8, 2, 2, 88);
    CHECK(*m.precision == doctest::Approx(0.8));
    CHECK(*m.recall == doctest::Approx(0.8));
    CHECK(*m.fpr == doctest::Approx(1.0 / 45.0));
    CHECK(*m.fdr == doctest::Approx(0.2));

    m = base_metrics(0, 0, 5, 5);
    CHECK_FALSE(m.precision.has_value());
    CHECK_FALSE(m.fdr.has_value());
    CHECK(*m.recall == 0.0);
    CHECK(*m.fpr == 0.0);
  }

  TEST_CASE("region classification") {
    CHECK(classify(1.0, 1.0) == Region::both_improve);
    CHECK(classify(1.2, 1.5) == Region::recall_only);
    CHECK(classify(0.98, 0.7) == Region::fpr_only);
    CHECK(classify(0.9, 1.1) == Region::both_degrade);
  }

  TEST_CASE("threshold selection on the worked sweep table") {
    const auto rows = decision_rows();
    auto pick = select_threshold(rows, SelectionGoal::match_fpr);
    REQUIRE(pick.has_value());
    CHECK(pick->t_B == 0.2);
    pick = select_threshold(rows, SelectionGoal::dominate);
    REQUIRE(pick.has_value());
    CHECK(pick->t_B == 0.3);
    pick = select_threshold(rows, SelectionGoal::match_recall);
    REQUIRE(pick.has_value());
    CHECK(pick->t_B == 0.3);
  }

  TEST_CASE("no qualifying row selects nothing") {
    const std::vector<SweepRow> rows = {row(0.1, 1.5, 0.9)};
    CHECK_FALSE(select_threshold(rows, SelectionGoal::dominate).has_value());
  }

  TEST_CASE("sweep at the deployment threshold equals the base estimate") {
    const Dataset d = test::random_small_dataset(7);
    const Thresholds t{0.5, 0.5};
    const double grid[] = {0.5};
    const auto rows = threshold_sweep(d, t, grid, Method::direct);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].rrecall.point == estimate(Estimator::rrecall_direct, d, t).point);
    CHECK(rows[0].rfpr.point == estimate(Estimator::rfpr_direct, d, t).point);
    CHECK(rows[0].region == classify(rows[0].rrecall.point, rows[0].rfpr.point));
  }

  TEST_CASE("sweep rejects grid points below the deployment threshold") {
    const Dataset d = test::random_small_dataset(7);
    const double grid[] = {0.4, 0.5};
    CHECK_THROWS_AS(threshold_sweep(d, {0.5, 0.5}, grid, Method::direct), ValidationError);
    CHECK_THROWS_AS(threshold_sweep(d, {0.5, 0.5}, std::span<const double>{}, Method::semi_supervised),
                    ValidationError);
  }

  TEST_CASE("sweep drops B records its stricter threshold would not have collected") {
    Dataset d;
    d.add(make_record("a1", Arm::A, .9, .9, true));
    d.add(make_record("a2", Arm::A, .9, .65, true));
    d.add(make_record("b1", Arm::B, .9, .9, true));
    d.add(make_record("b2", Arm::B, .6, .9, true));
    d.add(make_record("b3", Arm::B, .9, .2, true));
    d.add(make_record("an", Arm::A, .9, .9, false));
    d.add(make_record("bn", Arm::B, .9, .9, false));
    const double grid[] = {0.5, 0.7};
    const auto rows = threshold_sweep(d, {0.5, 0.5}, grid, Method::direct);
    // t_B = 0.5: (2/2)(3/2); t_B = 0.7: (1/2)(2/1).
    CHECK(rows[0].rrecall.point == doctest::Approx(1.5));
    CHECK(rows[1].rrecall.point == doctest::Approx(1.0));
  }

  TEST_CASE("names parse back") {
    CHECK(parse_method("approx") == Method::approx);
    CHECK(parse_method("abtest") == Method::ab_test);
    CHECK_FALSE(parse_method("bogus").has_value());
    CHECK(parse_goal("dominate") == SelectionGoal::dominate);
    CHECK_FALSE(estimator_for(Metric::rrecall, Method::ab_test).has_value());
    CHECK(estimator_for(Metric::rfpr, Method::ab_test) == Estimator::rfpr_ab_test);
  }
}
