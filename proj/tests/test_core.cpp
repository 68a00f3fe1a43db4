// Copyright 2026 The fairsel Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fairsel/core.hpp"

#include <cmath>
#include <random>

#include "doctest.h"
#include "fairsel/objectives.hpp"
#include "helpers.hpp"

using namespace fairsel;

TEST_CASE("selection rate of explicit policies") {
  const ScoreDistribution pi({0.5, 0.3, 0.2});
  CHECK(selection_rate(pi, Policy({1, 1, 1})) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(selection_rate(pi, Policy({0, 0.5, 1})) == doctest::Approx(0.35).epsilon(1e-12));
  const ScoreDistribution point({1, 0, 0});
  CHECK(selection_rate(point, Policy({0, 1, 1})) == 0.0);
  CHECK_THROWS_AS(selection_rate(pi, Policy({1, 1})), ValidationError);
}

TEST_CASE("upper quantile functions") {
  const ScoreDistribution pi({0.5, 0.3, 0.2});
  CHECK(quantile_upper(pi, 0.2) == 2);
  CHECK(quantile_upper_plus(pi, 0.2) == 3);
  CHECK(quantile_upper(pi, 0.0) == 3);
  const ScoreDistribution quarters({0.25, 0.25, 0.25, 0.25});
  CHECK(quantile_upper(quarters, 0.5) == 2);
  CHECK(quantile_upper_plus(quarters, 0.5) == 3);
  // Domain extensions.
  CHECK(quantile_upper(pi, 1.0) == 1);
  CHECK(quantile_upper_plus(pi, 0.0) == 3);
  CHECK_THROWS_AS(quantile_upper(pi, -0.1), PreconditionError);
  CHECK_THROWS_AS(quantile_upper_plus(pi, 1.2), PreconditionError);
}

TEST_CASE("inverse selection rate produces canonical thresholds") {
  const ScoreDistribution pi({0.5, 0.3, 0.2});
  const ThresholdPolicy mid = inverse_selection_rate(pi, 0.35);
  CHECK(mid.cutoff == 2);
  CHECK(mid.gamma == doctest::Approx(0.5).epsilon(1e-12));
  const ThresholdPolicy full = inverse_selection_rate(pi, 1.0);
  CHECK(full.cutoff == 1);
  CHECK(full.gamma == 1.0);
  const ThresholdPolicy tail = inverse_selection_rate(pi, 0.2);
  CHECK(tail.cutoff == 3);
  CHECK(tail.gamma == 1.0);
  const ThresholdPolicy empty = inverse_selection_rate(pi, 0.0);
  CHECK(empty.cutoff == 4);
  CHECK(selection_rate(pi, empty) == 0.0);
  CHECK_THROWS_AS(inverse_selection_rate(pi, 1.5), PreconditionError);
  for (double beta : {0.0, 0.1, 0.2, 0.35, 0.5, 0.9, 1.0}) {
    CHECK(is_canonical(pi, inverse_selection_rate(pi, beta)));
  }
}

TEST_CASE("round trip rate -> threshold -> rate") {
  std::mt19937_64 rng(7001);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int i = 0; i < 300; ++i) {
    const ScoreDistribution pi = test::random_distribution(rng, 1 + static_cast<int>(i % 9));
    const double beta = (i % 10 == 0) ? (i % 20 == 0 ? 0.0 : 1.0) : unif(rng);
    const ThresholdPolicy tp = inverse_selection_rate(pi, beta);
    CHECK(std::abs(selection_rate(pi, tp) - beta) <= 1e-12);
    CHECK(std::abs(selection_rate(pi, to_policy(pi, tp)) - beta) <= 1e-12);
    CHECK(is_canonical(pi, tp));
  }
}

TEST_CASE("threshold equivalence iff equal selection rates") {
  // Exhaustive over small gamma grids on a gappy distribution.
  const ScoreDistribution pi({0.4, 0.0, 0.6});
  std::vector<ThresholdPolicy> all;
  for (int c = 1; c <= 3; ++c) {
    for (int step = 1; step <= 4; ++step) {
      all.push_back({c, step / 4.0});
    }
  }
  for (const auto& p : all) {
    for (const auto& q : all) {
      const bool same_rate =
          std::abs(selection_rate(pi, p) - selection_rate(pi, q)) <= 1e-15;
      const bool equivalent = policies_equivalent(pi, to_policy(pi, p), to_policy(pi, q));
      CHECK(same_rate == equivalent);
    }
  }
}

TEST_CASE("policy equivalence ignores zero-mass scores") {
  const ScoreDistribution pi({0.5, 0.5, 0.0});
  CHECK(policies_equivalent(pi, Policy({1, 1, 0}), Policy({1, 1, 1})));
  CHECK_FALSE(policies_equivalent(pi, Policy({1, 0, 0}), Policy({0, 1, 0})));
}

TEST_CASE("inverse selection rate is pointwise monotone in beta") {
  std::mt19937_64 rng(7002);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const ScoreDistribution pi = test::random_distribution(rng, 2 + static_cast<int>(i % 7));
    double b1 = unif(rng);
    double b2 = unif(rng);
    if (b1 > b2) std::swap(b1, b2);
    const Policy p1 = to_policy(pi, inverse_selection_rate(pi, b1));
    const Policy p2 = to_policy(pi, inverse_selection_rate(pi, b2));
    for (int x = 1; x <= pi.size(); ++x) CHECK(p1(x) <= p2(x) + 1e-15);
  }
}

TEST_CASE("quantiles are monotone, consistent and one-sided continuous") {
  std::mt19937_64 rng(7003);
  for (int i = 0; i < 50; ++i) {
    const ScoreDistribution pi = test::random_distribution(rng, 2 + static_cast<int>(i % 8));
    double prev_q = 1e9;
    double prev_qp = 1e9;
    for (int j = 0; j <= 200; ++j) {
      const double beta = j / 200.0;
      const int q = quantile_upper(pi, beta);
      const int qp = quantile_upper_plus(pi, beta);
      CHECK(q <= qp);
      CHECK(q <= prev_q);
      CHECK(qp <= prev_qp);
      prev_q = q;
      prev_qp = qp;
    }
    // Right continuity of Q and left continuity of Q+ at every tail mass.
    for (int c = 2; c <= pi.size(); ++c) {
      const double t = pi.tail(c);
      if (t <= 0.0 || t >= 1.0) continue;
      CHECK(quantile_upper(pi, t) == quantile_upper(pi, std::nextafter(t, 1.0)));
      CHECK(quantile_upper_plus(pi, t) == quantile_upper_plus(pi, std::nextafter(t, 0.0)));
    }
  }
}

TEST_CASE("institution assumption checks") {
  const ScoreGrid grid = ScoreGrid::indexed(3);
  const SuccessCurve rho({0.25, 0.5, 0.75});
  SUBCASE("credit-style coefficients pass the ratio test") {
    const auto check = check_institution_assumption(
        UtilityFn::affine(1.0, -4.0), OutcomeFn::affine(75.0, -150.0), rho, grid);
    REQUIRE(check.affine_ratio.has_value());
    CHECK(*check.affine_ratio);
  }
  SUBCASE("lenient institution fails the ratio test") {
    const auto check = check_institution_assumption(
        UtilityFn::affine(1.0, -1.0), OutcomeFn::affine(1.0, -2.0), rho, grid);
    REQUIRE(check.affine_ratio.has_value());
    CHECK_FALSE(*check.affine_ratio);
    // A score whose rho falls in (u_-/(u_- - u_+), c_-/(c_- - c_+)] is
    // profitable yet harmful, so the pointwise check fails too.
    const SuccessCurve banded({0.25, 0.6, 0.75});
    const auto pointwise = check_institution_assumption(
        UtilityFn::affine(1.0, -1.0), OutcomeFn::affine(1.0, -2.0), banded, grid);
    CHECK_FALSE(pointwise.pointwise);
  }
  SUBCASE("never-profitable utility holds vacuously") {
    const auto check = check_institution_assumption(
        UtilityFn::from_table({-1.0, -1.0, -1.0}), OutcomeFn::affine(1.0, -2.0), rho, grid);
    CHECK(check.pointwise);
  }
}

TEST_CASE("cdf domination") {
  const ScoreDistribution a({0.5, 0.3, 0.2});
  const ScoreDistribution b({0.2, 0.3, 0.5});
  CHECK(cdf_dominates(a, b));
  CHECK_FALSE(cdf_dominates(a, a, TailOrder::Strict));
  CHECK(cdf_dominates(a, a, TailOrder::Weak));
  // The sparse-tail counterexample instance: A is dominated by B.
  const Problem p = test::sparse_tail_problem(0.1);
  CHECK(cdf_dominates(p.group_a.dist, p.group_b.dist));
}

TEST_CASE("distribution validation and renormalization") {
  CHECK_THROWS_AS(ScoreDistribution({0.5, 0.6}), ValidationError);
  CHECK_THROWS_AS(ScoreDistribution({-0.1, 1.1}), ValidationError);
  const ScoreDistribution nearly({0.49999975, 0.49999975});
  CHECK(nearly.renormalized());
  CHECK(nearly.tail(1) == 1.0);
  CHECK(nearly.pmf(1) == doctest::Approx(0.5).epsilon(1e-9));
}
