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

#ifndef FAIRSEL_TESTS_HELPERS_HPP_
#define FAIRSEL_TESTS_HELPERS_HPP_

#include <random>
#include <vector>

#include "fairsel/analysis.hpp"
#include "fairsel/oracle.hpp"

namespace fairsel::test {

// Hand-checkable three-score instance used across the suites: mirrored
// distributions, shared linear-ish success curve, affine u with a zero at the
// middle score.
inline Problem s1_problem(double g_a = 0.5) {
  GroupSpec a(ScoreDistribution({0.5, 0.3, 0.2}), SuccessCurve({0.25, 0.5, 0.75}), g_a);
  GroupSpec b(ScoreDistribution({0.2, 0.3, 0.5}), SuccessCurve({0.25, 0.5, 0.75}), 1.0 - g_a);
  return Problem(ScoreGrid::indexed(3), std::move(a), std::move(b));
}
inline UtilityFn s1_utility() { return UtilityFn::affine(1.0, -1.0); }   // u = 2 rho - 1
inline OutcomeFn s1_outcome() { return OutcomeFn::affine(2.0, -1.0); }  // delta = 3 rho - 1

// Six-score instance with a sparse disadvantaged group: most of A sits at
// score 5 with a thin tail at 1, B at 5 with a thin tail at 3. rho(x) = x/6,
// u(x) = x/2 - 2 (zero at score 4).
inline Problem sparse_tail_problem(double eps = 0.1, double g_a = 0.18) {
  std::vector<double> pmf_a(6, 0.0), pmf_b(6, 0.0), rho(6);
  pmf_a[4] = 1.0 - 2.0 * eps;
  pmf_a[0] = 2.0 * eps;
  pmf_b[4] = 1.0 - eps;
  pmf_b[2] = eps;
  for (int x = 1; x <= 6; ++x) rho[static_cast<size_t>(x - 1)] = x / 6.0;
  GroupSpec a(ScoreDistribution(pmf_a), SuccessCurve(rho), g_a);
  GroupSpec b(ScoreDistribution(pmf_b), SuccessCurve(rho), 1.0 - g_a);
  return Problem(ScoreGrid::indexed(6), std::move(a), std::move(b));
}
inline UtilityFn sparse_tail_utility() { return UtilityFn::affine(1.0, -2.0); }

struct RandomInstance {
  Problem problem;
  UtilityFn u;
  OutcomeFn delta;
  double u_plus, u_minus, c_plus, c_minus;
};

// Strictly increasing success probabilities with macroscopic gaps.
inline std::vector<double> random_rho(std::mt19937_64& rng, int scores) {
  std::uniform_real_distribution<double> gap(0.01, 1.0);
  std::vector<double> cuts(static_cast<size_t>(scores) + 1);
  double total = 0.0;
  for (double& c : cuts) total += (c = gap(rng));
  std::vector<double> rho(static_cast<size_t>(scores));
  double acc = 0.0;
  for (int i = 0; i < scores; ++i) {
    acc += cuts[static_cast<size_t>(i)];
    rho[static_cast<size_t>(i)] = 0.02 + 0.96 * (acc / total);
  }
  return rho;
}

inline ScoreDistribution random_distribution(std::mt19937_64& rng, int scores,
                                             bool allow_zero_mass = true) {
  std::uniform_real_distribution<double> unif(0.05, 1.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<double> pmf(static_cast<size_t>(scores));
  double sum = 0.0;
  for (int i = 0; i < scores; ++i) {
    double p = unif(rng);
    if (allow_zero_mass && scores > 1 && coin(rng) < 0.15) p = 0.0;
    pmf[static_cast<size_t>(i)] = p;
    sum += p;
  }
  if (sum == 0.0) pmf[0] = sum = 1.0;
  for (double& p : pmf) p /= sum;
  return ScoreDistribution(pmf);
}

// Affine u and delta satisfying the institution-stringency assumption
// (u_-/u_+ strictly below c_-/c_+), over strictly increasing per-group rho.
inline RandomInstance random_instance(std::mt19937_64& rng, int min_scores = 2,
                                      int max_scores = 10, bool shared_rho = false) {
  std::uniform_int_distribution<int> nscores(min_scores, max_scores);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int scores = nscores(rng);
  const std::vector<double> rho_a = random_rho(rng, scores);
  const std::vector<double> rho_b = shared_rho ? rho_a : random_rho(rng, scores);

  const double c_plus = 0.5 + 2.0 * unif(rng);
  const double c_minus = -(0.5 + 2.0 * unif(rng));
  const double u_plus = 0.5 + 1.5 * unif(rng);
  const double u_minus = u_plus * (c_minus / c_plus) - (0.05 + 0.9 * unif(rng));

  const double g_a = 0.05 + 0.9 * unif(rng);
  GroupSpec a(random_distribution(rng, scores), SuccessCurve(rho_a), g_a);
  GroupSpec b(random_distribution(rng, scores), SuccessCurve(rho_b), 1.0 - g_a);
  return RandomInstance{Problem(ScoreGrid::indexed(scores), std::move(a), std::move(b)),
                        UtilityFn::affine(u_plus, u_minus),
                        OutcomeFn::affine(c_plus, c_minus),
                        u_plus, u_minus, c_plus, c_minus};
}

inline Policy random_policy(std::mt19937_64& rng, int scores) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> tau(static_cast<size_t>(scores));
  for (double& t : tau) t = unif(rng);
  return Policy(tau);
}

}  // namespace fairsel::test

#endif  // FAIRSEL_TESTS_HELPERS_HPP_
