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

#include "fairsel/solvers.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "helpers.hpp"

using namespace fairsel;

namespace {

double soft_objective(const Problem& p, const UtilityFn& u, const ConstraintWeights& w,
                      const SoftPenalty& penalty, double beta_a, double beta_b) {
  const Policy ta = to_policy(p.group_a.dist, inverse_selection_rate(p.group_a.dist, beta_a));
  const Policy tb = to_policy(p.group_b.dist, inverse_selection_rate(p.group_b.dist, beta_b));
  const double gap =
      transfer_T(p.group_a, w.group_a, beta_a) - transfer_T(p.group_b, w.group_b, beta_b);
  return p.group_a.proportion * group_utility(p.group_a, ta, u) +
         p.group_b.proportion * group_utility(p.group_b, tb, u) -
         penalty.lambda * penalty.value(gap);
}

}  // namespace

TEST_CASE("maxutil on the three-score instance") {
  const Problem p = test::s1_problem();
  const SolverResult r = solve_maxutil(p, test::s1_utility());
  CHECK(r.a.rate_lo == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(r.a.rate_hi == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.a.rate == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(r.b.rate_lo == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.b.rate_hi == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(r.a.policy.cutoff == 3);
  CHECK(r.a.policy.gamma == 1.0);
  CHECK(r.total_utility == doctest::Approx(0.175).epsilon(1e-12));
}

TEST_CASE("all-profitable utility selects everyone") {
  GroupSpec a(ScoreDistribution({0.5, 0.5}), SuccessCurve({0.6, 0.9}), 0.5);
  GroupSpec b(ScoreDistribution({0.5, 0.5}), SuccessCurve({0.6, 0.9}), 0.5);
  const Problem p(ScoreGrid::indexed(2), std::move(a), std::move(b));
  const SolverResult r = solve_maxutil(p, UtilityFn::affine(1.0, -0.1));
  CHECK(r.a.rate == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.b.rate == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("maxutil on the sparse-tail instance") {
  const Problem p = test::sparse_tail_problem(0.1);
  const SolverResult r = solve_maxutil(p, test::sparse_tail_utility());
  CHECK(r.a.rate == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(r.b.rate == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(r.a.tpr == doctest::Approx(4.0 / 4.2).epsilon(1e-12));
  CHECK(r.b.tpr == doctest::Approx(4.5 / 4.8).epsilon(1e-12));
}

TEST_CASE("demparity on the three-score instance") {
  const Problem p = test::s1_problem();
  const SolverResult r = solve_demparity(p, test::s1_utility());
  CHECK(r.a.rate == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.b.rate == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.a.rate_hi == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(*r.constraint_residual == 0.0);
}

TEST_CASE("demparity with identical groups matches maxutil") {
  const Problem s1 = test::s1_problem();
  GroupSpec a(s1.group_a.dist, s1.group_a.rho, 0.3);
  GroupSpec b(s1.group_a.dist, s1.group_a.rho, 0.7);
  const Problem p(ScoreGrid::indexed(3), std::move(a), std::move(b));
  const SolverResult dp = solve_demparity(p, test::s1_utility());
  const SolverResult mu = solve_maxutil(p, test::s1_utility());
  CHECK(dp.a.rate == doctest::Approx(mu.a.rate).epsilon(1e-12));
  CHECK(dp.a.rate_hi == doctest::Approx(mu.a.rate_hi).epsilon(1e-12));
}

TEST_CASE("vanishing group A pushes demparity to group B's optimum") {
  const Problem p = test::s1_problem(0.05);
  const SolverResult dp = solve_demparity(p, test::s1_utility());
  const SolverResult mu = solve_maxutil(p, test::s1_utility());
  CHECK(dp.a.rate == doctest::Approx(mu.b.rate).epsilon(1e-12));
}

TEST_CASE("eqopt on the three-score instance") {
  const Problem p = test::s1_problem();
  const SolverResult r = solve_eqopt(p, test::s1_utility());
  // Optimal TPR interval is the flat segment [T_B(0.5), T_A(0.5)].
  const double t_lo = 0.375 / 0.575;
  const double t_hi = 0.30 / 0.425;
  CHECK(*r.constraint_value == doctest::Approx(t_lo).epsilon(1e-12));
  const double beta_a = 0.2 + (t_lo - 0.15 / 0.425) * 0.425 / 0.5;
  CHECK(r.a.rate == doctest::Approx(beta_a).epsilon(1e-12));
  CHECK(r.a.rate_hi == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.b.rate == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.b.rate_hi == doctest::Approx(0.5 + (t_hi - t_lo) * 0.575 / 0.5).epsilon(1e-12));
  CHECK(*r.constraint_residual <= 1e-12);
  // Equal TPRs at the canonical rates.
  const Policy pa = to_policy(p.group_a.dist, inverse_selection_rate(p.group_a.dist, r.a.rate));
  const Policy pb = to_policy(p.group_b.dist, inverse_selection_rate(p.group_b.dist, r.b.rate));
  CHECK(std::abs(tpr(p.group_a, pa) - tpr(p.group_b, pb)) <= 1e-12);
}

TEST_CASE("eqopt with identical groups matches maxutil") {
  const Problem s1 = test::s1_problem();
  GroupSpec a(s1.group_a.dist, s1.group_a.rho, 0.4);
  GroupSpec b(s1.group_a.dist, s1.group_a.rho, 0.6);
  const Problem p(ScoreGrid::indexed(3), std::move(a), std::move(b));
  const SolverResult eq = solve_eqopt(p, test::s1_utility());
  const SolverResult mu = solve_maxutil(p, test::s1_utility());
  CHECK(eq.a.rate == doctest::Approx(mu.a.rate).epsilon(1e-12));
  CHECK(eq.a.rate_hi == doctest::Approx(mu.a.rate_hi).epsilon(1e-12));
}

TEST_CASE("eqopt underloans group A on the sparse-tail instance") {
  const Problem p = test::sparse_tail_problem(0.1, 0.18);
  const UtilityFn u = test::sparse_tail_utility();
  const SolverResult eq = solve_eqopt(p, u);
  CHECK(eq.a.rate == doctest::Approx(0.7875).epsilon(1e-9));
  CHECK(eq.b.rate == doctest::Approx(0.9).epsilon(1e-9));
  CHECK(eq.a.rate < 0.8);
  bool flagged = false;
  for (const auto& f : eq.flags) flagged = flagged || f == "relative-harm:A";
  CHECK(flagged);
  const SolverResult dp = solve_demparity(p, u);
  CHECK(dp.a.rate == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(dp.a.rate > 0.8);
}

TEST_CASE("linear constraint reductions") {
  std::mt19937_64 rng(7201);
  for (int i = 0; i < 100; ++i) {
    const test::RandomInstance inst = test::random_instance(rng, 2, 8);
    const SolverResult dp = solve_demparity(inst.problem, inst.u);
    const SolverResult lin = solve_linear_constraint(
        inst.problem, inst.u, ConstraintWeights::demographic_parity(inst.problem.scores()));
    CHECK(std::abs(dp.a.rate - lin.a.rate) <= 1e-12);
    CHECK(std::abs(dp.a.rate_hi - lin.a.rate_hi) <= 1e-12);
    CHECK(std::abs(dp.b.rate - lin.b.rate) <= 1e-12);
    CHECK(std::abs(dp.total_utility - lin.total_utility) <= 1e-12);

    const ConstraintWeights ew =
        ConstraintWeights::equal_opportunity(inst.problem.group_a, inst.problem.group_b);
    const SolverResult eq = solve_eqopt(inst.problem, inst.u);
    const SolverResult lin2 = solve_linear_constraint(inst.problem, inst.u, ew);
    CHECK(std::abs(eq.a.rate - lin2.a.rate) <= 1e-12);
    CHECK(std::abs(eq.b.rate - lin2.b.rate) <= 1e-12);
    CHECK(std::abs(eq.total_utility - lin2.total_utility) <= 1e-12);
  }
}

TEST_CASE("constrained interval flatness and strict drop outside") {
  std::mt19937_64 rng(7202);
  for (int i = 0; i < 200; ++i) {
    const test::RandomInstance inst = test::random_instance(rng, 2, 9);
    const Problem& p = inst.problem;
    const PiecewiseLinearCurve ua = utility_curve(p.group_a, inst.u);
    const PiecewiseLinearCurve ub = utility_curve(p.group_b, inst.u);
    auto dp_value = [&](double beta) {
      return p.group_a.proportion * ua.value(beta) + p.group_b.proportion * ub.value(beta);
    };
    const SolverResult dp = solve_demparity(p, inst.u);
    const double best = dp_value(dp.a.rate);
    CHECK(std::abs(dp_value(dp.a.rate_hi) - best) <= 1e-10);
    CHECK(std::abs(dp_value(0.5 * (dp.a.rate + dp.a.rate_hi)) - best) <= 1e-10);
    CHECK(std::abs(dp.total_utility - best) <= 1e-10);
    if (dp.a.rate - 1e-6 >= 0.0) CHECK(dp_value(dp.a.rate - 1e-6) < best);
    if (dp.a.rate_hi + 1e-6 <= 1.0) CHECK(dp_value(dp.a.rate_hi + 1e-6) < best);
  }
}

TEST_CASE("eqopt interval is flat in total utility") {
  std::mt19937_64 rng(7207);
  for (int i = 0; i < 100; ++i) {
    const test::RandomInstance inst = test::random_instance(rng, 2, 9);
    const Problem& p = inst.problem;
    const SolverResult eq = solve_eqopt(p, inst.u);
    const PiecewiseLinearCurve ua = utility_curve(p.group_a, inst.u);
    const PiecewiseLinearCurve ub = utility_curve(p.group_b, inst.u);
    const double lo = p.group_a.proportion * ua.value(eq.a.rate_lo) +
                      p.group_b.proportion * ub.value(eq.b.rate_lo);
    const double hi = p.group_a.proportion * ua.value(eq.a.rate_hi) +
                      p.group_b.proportion * ub.value(eq.b.rate_hi);
    CHECK(std::abs(lo - eq.total_utility) <= 1e-10);
    CHECK(std::abs(hi - eq.total_utility) <= 1e-10);
  }
}

TEST_CASE("demparity first-order conditions at random probes") {
  std::mt19937_64 rng(7203);
  for (int i = 0; i < 100; ++i) {
    const test::RandomInstance inst = test::random_instance(rng, 2, 9);
    const Problem& p = inst.problem;
    const std::vector<double> ua = inst.u.values(p.group_a.rho);
    const std::vector<double> ub = inst.u.values(p.group_b.rho);
    const double ga = p.group_a.proportion;
    const double gb = p.group_b.proportion;
    const SolverResult dp = solve_demparity(p, inst.u);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int j = 0; j < 25; ++j) {
      const double beta = unif(rng);
      const double right = ga * ua[static_cast<size_t>(quantile_upper(p.group_a.dist, beta) - 1)] +
                           gb * ub[static_cast<size_t>(quantile_upper(p.group_b.dist, beta) - 1)];
      const double left =
          ga * ua[static_cast<size_t>(quantile_upper_plus(p.group_a.dist, beta) - 1)] +
          gb * ub[static_cast<size_t>(quantile_upper_plus(p.group_b.dist, beta) - 1)];
      if (right > 1e-12) CHECK(beta < dp.a.rate + 1e-12);
      if (left < -1e-12) CHECK(beta > dp.a.rate_hi - 1e-12);
    }
  }
}

TEST_CASE("soft solver with zero regularization is maxutil") {
  std::mt19937_64 rng(7204);
  for (int i = 0; i < 100; ++i) {
    const test::RandomInstance inst = test::random_instance(rng, 2, 8);
    const SolverResult mu = solve_maxutil(inst.problem, inst.u);
    const SoftResult soft =
        solve_soft(inst.problem, inst.u,
                   ConstraintWeights::demographic_parity(inst.problem.scores()),
                   SoftPenalty::absolute(0.0));
    CHECK(std::abs(soft.result.a.rate - mu.a.rate) <= 1e-12);
    CHECK(std::abs(soft.result.b.rate - mu.b.rate) <= 1e-12);
  }
}

TEST_CASE("soft solver reaches the hard constraint for large lambda") {
  std::mt19937_64 rng(7205);
  for (int i = 0; i < 30; ++i) {
    const test::RandomInstance inst = test::random_instance(rng, 2, 7);
    const ConstraintWeights w = ConstraintWeights::demographic_parity(inst.problem.scores());
    const SolverResult dp = solve_demparity(inst.problem, inst.u);
    const SoftResult soft = solve_soft(inst.problem, inst.u, w, SoftPenalty::absolute(1e6));
    CHECK(soft.matches_hard);
    CHECK(std::abs(soft.result.a.rate - dp.a.rate) <= 1e-8);
    CHECK(std::abs(soft.result.b.rate - dp.b.rate) <= 1e-8);
    CHECK(std::abs(soft.gap) <= 1e-12);
  }
}

TEST_CASE("soft gap interval shrinks along a lambda sweep") {
  const Problem p = test::s1_problem(0.3);
  const ConstraintWeights w = ConstraintWeights::demographic_parity(3);
  double prev = 1e9;
  for (double lambda : {0.0, 0.01, 0.05, 0.1, 0.2, 0.35, 0.5, 0.8, 1.5, 3.0, 10.0}) {
    const SoftResult soft = solve_soft(p, test::s1_utility(), w, SoftPenalty::absolute(lambda));
    const double worst = std::max(std::abs(soft.gap_lo), std::abs(soft.gap_hi));
    CHECK(worst <= prev + 1e-9);
    prev = worst;
    // Cross-check against a dense two-dimensional search.
    double grid_best = -1e18;
    for (int ia = 0; ia <= 200; ++ia) {
      for (int ib = 0; ib <= 200; ++ib) {
        grid_best = std::max(grid_best, soft_objective(p, test::s1_utility(), w,
                                                       SoftPenalty::absolute(lambda), ia / 200.0,
                                                       ib / 200.0));
      }
    }
    const double achieved = soft_objective(p, test::s1_utility(), w,
                                           SoftPenalty::absolute(lambda), soft.result.a.rate,
                                           soft.result.b.rate);
    CHECK(achieved >= grid_best - 1e-2);
    CHECK(achieved <= grid_best + 1e-2);
  }
}

TEST_CASE("quadratic penalty interpolates smoothly") {
  // Strictly peaked utilities keep the unconstrained optima apart, so the
  // quadratic gap shrinks but never fully closes.
  const Problem p = test::s1_problem(0.3);
  const UtilityFn u = UtilityFn::from_table({-0.5, -0.1, 0.5});
  const ConstraintWeights w = ConstraintWeights::demographic_parity(3);
  double prev_gap = 1e9;
  for (double lambda : {0.01, 0.1, 0.5, 2.0, 20.0, 500.0}) {
    const SoftResult soft = solve_soft(p, u, w, SoftPenalty::quadratic(lambda));
    CHECK(std::abs(soft.gap) <= prev_gap + 1e-9);
    prev_gap = std::abs(soft.gap);
    double grid_best = -1e18;
    for (int ia = 0; ia <= 200; ++ia) {
      for (int ib = 0; ib <= 200; ++ib) {
        grid_best = std::max(grid_best,
                             soft_objective(p, u, w, SoftPenalty::quadratic(lambda), ia / 200.0,
                                            ib / 200.0));
      }
    }
    const double achieved = soft_objective(p, u, w, SoftPenalty::quadratic(lambda),
                                           soft.result.a.rate, soft.result.b.rate);
    CHECK(achieved >= grid_best - 2e-2);
  }
  const SoftResult tail = solve_soft(p, u, w, SoftPenalty::quadratic(500.0));
  CHECK(std::abs(tail.gap) > 0.0);
  CHECK(std::abs(tail.gap) < 1e-3);
}

TEST_CASE("user convex penalty table") {
  CHECK_THROWS_AS(SoftPenalty::user({{0.0, 0.0}, {1.0, 2.0}, {2.0, 2.5}}, 1.0), ValidationError);
  const SoftPenalty p = SoftPenalty::user({{0.0, 0.0}, {0.5, 0.5}, {1.0, 2.0}}, 1.0);
  CHECK(p.value(0.25) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(p.value(-0.75) == doctest::Approx(1.25).epsilon(1e-12));
  CHECK(p.value(2.0) == doctest::Approx(5.0).epsilon(1e-12));  // extrapolated slope 3
  const Problem prob = test::s1_problem(0.3);
  const ConstraintWeights w = ConstraintWeights::demographic_parity(3);
  const SoftResult soft = solve_soft(prob, test::s1_utility(), w, p);
  double grid_best = -1e18;
  for (int ia = 0; ia <= 200; ++ia) {
    for (int ib = 0; ib <= 200; ++ib) {
      grid_best = std::max(
          grid_best, soft_objective(prob, test::s1_utility(), w, p, ia / 200.0, ib / 200.0));
    }
  }
  CHECK(soft_objective(prob, test::s1_utility(), w, p, soft.result.a.rate,
                       soft.result.b.rate) >= grid_best - 1e-2);
}

TEST_CASE("soft solver beats dense grids on random instances") {
  std::mt19937_64 rng(7208);
  for (int i = 0; i < 20; ++i) {
    const test::RandomInstance inst = test::random_instance(rng, 2, 5);
    const Problem& p = inst.problem;
    const ConstraintWeights w = ConstraintWeights::demographic_parity(p.scores());
    for (double lambda : {0.05, 0.4, 2.0}) {
      const SoftPenalty penalty = SoftPenalty::absolute(lambda);
      const SoftResult soft = solve_soft(p, inst.u, w, penalty);
      double grid_best = -1e18;
      for (int ia = 0; ia <= 150; ++ia) {
        for (int ib = 0; ib <= 150; ++ib) {
          grid_best = std::max(
              grid_best, soft_objective(p, inst.u, w, penalty, ia / 150.0, ib / 150.0));
        }
      }
      const double achieved =
          soft_objective(p, inst.u, w, penalty, soft.result.a.rate, soft.result.b.rate);
      // Grid points land within 1/150 of an exact optimum; allow the matching
      // Lipschitz slack.
      const double slack = (4.0 + lambda) * (2.0 / 150.0);
      CHECK(achieved >= grid_best - slack);
    }
  }
}

TEST_CASE("soft solution satisfies the first-order supergradient inclusion") {
  std::mt19937_64 rng(7210);
  for (int i = 0; i < 60; ++i) {
    const test::RandomInstance inst = test::random_instance(rng, 2, 8);
    const Problem& p = inst.problem;
    const ConstraintWeights w = ConstraintWeights::demographic_parity(p.scores());
    std::uniform_real_distribution<double> ldist(0.01, 3.0);
    const double lambda = ldist(rng);
    const SoftResult soft = solve_soft(p, inst.u, w, SoftPenalty::absolute(lambda));
    const std::vector<double> ua = inst.u.values(p.group_a.rho);
    const std::vector<double> ub = inst.u.values(p.group_b.rho);
    const double beta_a = soft.result.a.rate;
    const double beta_b = soft.result.b.rate;
    const double gap = soft.gap;
    // |t| supergradient: {1} above zero, {-1} below, [-1, 1] at zero.
    const double phi_right = gap > 0.0 ? 1.0 : (gap < 0.0 ? -1.0 : 1.0);
    const double phi_left = gap > 0.0 ? 1.0 : (gap < 0.0 ? -1.0 : -1.0);
    const double ga = p.group_a.proportion;
    const double gb = p.group_b.proportion;
    // Group A: moving t_A up is penalized by phi_right, down credits phi_left.
    if (beta_a < 1.0) {
      const double slope = ga * ua[static_cast<size_t>(quantile_upper(p.group_a.dist, beta_a) - 1)];
      CHECK(slope - lambda * phi_right <= 1e-9);
    }
    if (beta_a > 0.0) {
      const double slope =
          ga * ua[static_cast<size_t>(quantile_upper_plus(p.group_a.dist, beta_a) - 1)];
      CHECK(slope - lambda * phi_left >= -1e-9);
    }
    // Group B: raising t_B shrinks the gap, so the penalty enters with the
    // opposite orientation.
    if (beta_b < 1.0) {
      const double slope = gb * ub[static_cast<size_t>(quantile_upper(p.group_b.dist, beta_b) - 1)];
      CHECK(slope + lambda * phi_left <= 1e-9);
    }
    if (beta_b > 0.0) {
      const double slope =
          gb * ub[static_cast<size_t>(quantile_upper_plus(p.group_b.dist, beta_b) - 1)];
      CHECK(slope + lambda * phi_right >= -1e-9);
    }
  }
}

TEST_CASE("prop-9 drift: negative gaps move group A's constraint value up") {
  std::mt19937_64 rng(7206);
  int exercised = 0;
  for (int i = 0; i < 60 && exercised < 20; ++i) {
    const test::RandomInstance inst = test::random_instance(rng, 2, 7);
    const ConstraintWeights w = ConstraintWeights::demographic_parity(inst.problem.scores());
    const SoftResult base = solve_soft(inst.problem, inst.u, w, SoftPenalty::absolute(1e-9));
    if (!(base.gap_hi < 0.0)) continue;  // want instances where A's value is short
    ++exercised;
    double prev_lo = -1e18;
    double prev_hi = -1e18;
    for (double lambda : {0.01, 0.05, 0.2, 0.5, 1.0, 5.0, 100.0}) {
      const SoftResult soft = solve_soft(inst.problem, inst.u, w, SoftPenalty::absolute(lambda));
      CHECK(soft.t_a_lo >= prev_lo - 1e-9);
      CHECK(soft.t_a_hi >= prev_hi - 1e-9);
      prev_lo = soft.t_a_lo;
      prev_hi = soft.t_a_hi;
    }
  }
  CHECK(exercised > 0);
}

TEST_CASE("outcome-based budget walk on the three-score instance") {
  const Problem p = test::s1_problem();
  const UtilityFn u = test::s1_utility();
  const OutcomeFn delta = test::s1_outcome();
  SUBCASE("budget 0.05 stops below the harm region") {
    const OutcomeBasedResult r = solve_outcome_based(p.group_a, u, delta, p.grid, 0.05);
    CHECK(r.beta_maxutil == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(r.beta_star == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r.beta_max == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(r.rate == doctest::Approx(0.5).epsilon(1e-12));
    CHECK_FALSE(r.assumption_warning);
  }
  SUBCASE("zero budget keeps the utility-flat plateau reachable") {
    const OutcomeBasedResult r = solve_outcome_based(p.group_a, u, delta, p.grid, 0.0);
    CHECK(r.beta_max == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r.rate == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("unbounded budget reaches the outcome optimum") {
    const OutcomeBasedResult r = solve_outcome_based(
        p.group_a, u, delta, p.grid, std::numeric_limits<double>::infinity());
    CHECK(r.beta_max == 1.0);
    CHECK(r.rate == doctest::Approx(r.beta_star).epsilon(1e-12));
  }
  SUBCASE("negative budget is rejected") {
    CHECK_THROWS_AS(solve_outcome_based(p.group_a, u, delta, p.grid, -0.1), ValidationError);
  }
}

TEST_CASE("outcome-based with a strict utility peak returns the maxutil rate at zero budget") {
  GroupSpec g(ScoreDistribution({0.5, 0.3, 0.2}), SuccessCurve({0.25, 0.5, 0.75}), 1.0);
  const UtilityFn u = UtilityFn::from_table({-0.5, 0.2, 0.5});
  const OutcomeFn delta = test::s1_outcome();
  const OutcomeBasedResult r = solve_outcome_based(g, u, delta, ScoreGrid::indexed(3), 0.0);
  CHECK(r.beta_maxutil == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.beta_max == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.rate == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("solver outputs are internally consistent on larger grids") {
  std::mt19937_64 rng(7209);
  for (int i = 0; i < 150; ++i) {
    const test::RandomInstance inst = test::random_instance(rng, 2, 20);
    const Problem& p = inst.problem;
    for (const auto& crit : {FairnessCriterion::maxutil(), FairnessCriterion::demparity(),
                             FairnessCriterion::eqopt()}) {
      const SolverResult res = solve_criterion(p, inst.u, crit, &inst.delta);
      auto check_side = [&](const GroupSpec& g, const GroupSolution& sol) {
        CHECK(sol.rate_lo >= 0.0);
        CHECK(sol.rate_hi <= 1.0);
        CHECK(sol.rate_lo <= sol.rate + 1e-15);
        CHECK(sol.rate <= sol.rate_hi + 1e-15);
        CHECK(is_canonical(g.dist, sol.policy));
        CHECK(std::abs(selection_rate(g.dist, sol.policy) - sol.rate) <= 1e-12);
        CHECK(sol.tpr >= -1e-12);
        CHECK(sol.tpr <= 1.0 + 1e-12);
      };
      check_side(p.group_a, res.a);
      check_side(p.group_b, res.b);
      if (crit.kind != CriterionKind::MaxUtil) {
        CHECK(res.constraint_residual.value_or(1.0) <= 1e-12);
      }
    }
  }
}

TEST_CASE("single-score grid degenerates cleanly") {
  GroupSpec a(ScoreDistribution({1.0}), SuccessCurve({0.7}), 0.4);
  GroupSpec b(ScoreDistribution({1.0}), SuccessCurve({0.7}), 0.6);
  const Problem p(ScoreGrid::indexed(1), std::move(a), std::move(b));
  const UtilityFn u = UtilityFn::affine(1.0, -0.5);  // u(1) = 0.25 > 0
  const SolverResult mu = solve_maxutil(p, u);
  CHECK(mu.a.rate == 1.0);
  const SolverResult dp = solve_demparity(p, u);
  CHECK(dp.a.rate == 1.0);
  const SolverResult eq = solve_eqopt(p, u);
  CHECK(eq.a.rate == 1.0);
  const UtilityFn bad = UtilityFn::affine(1.0, -4.0);  // u(1) < 0
  CHECK(solve_maxutil(p, bad).a.rate == 0.0);
}

TEST_CASE("solver preconditions are enforced") {
  const Problem p = test::s1_problem();
  // Decreasing utility.
  CHECK_THROWS_AS(solve_maxutil(p, UtilityFn::from_table({0.5, 0.2, -0.1})), PreconditionError);
  // Non-positive weights.
  CHECK_THROWS_AS(solve_linear_constraint(p, test::s1_utility(),
                                          ConstraintWeights::shared({1.0, 0.0, 1.0})),
                  PreconditionError);
  // u/w must stay monotone.
  CHECK_THROWS_AS(solve_linear_constraint(p, UtilityFn::from_table({0.1, 0.2, 0.5}),
                                          ConstraintWeights::shared({1.0, 1.0, 1000.0})),
                  PreconditionError);
  // EqOpt needs strictly positive success probabilities.
  GroupSpec a(ScoreDistribution({0.5, 0.5}), SuccessCurve({0.0, 0.9}), 0.5);
  GroupSpec b(ScoreDistribution({0.5, 0.5}), SuccessCurve({0.5, 0.9}), 0.5);
  const Problem zero_rho(ScoreGrid::indexed(2), std::move(a), std::move(b));
  CHECK_THROWS_AS(solve_eqopt(zero_rho, UtilityFn::affine(1.0, -1.0)), PreconditionError);
}
