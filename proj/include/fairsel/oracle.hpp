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

#ifndef FAIRSEL_ORACLE_HPP_
#define FAIRSEL_ORACLE_HPP_

#include <optional>
#include <vector>

#include "fairsel/solvers.hpp"

namespace fairsel {

// Exhaustive enumeration bounds. Policies are drawn from entries
// {0, 1/k, ..., 1}; equality constraints are matched within constraint_tol.
// Enumeration is independent of the analytic machinery: no quantiles, no
// threshold structure, just policy grids.
struct OracleConfig {
  int k = 10;
  double constraint_tol = 1e-6;
  int max_grid = 4;
};

struct OracleOutcome {
  bool found = false;
  double objective = 0.0;
  std::optional<Policy> tau_a;
  std::optional<Policy> tau_b;
  double constraint_residual = 0.0;
};

OracleOutcome oracle_constrained_opt(const Problem& problem, const UtilityFn& u,
                                     const FairnessCriterion& criterion,
                                     const OracleConfig& cfg);

// Among grid policies, does some feasible threshold-shaped pair come within
// value_tol of the oracle optimum?
bool oracle_optimum_attained_by_thresholds(const Problem& problem, const UtilityFn& u,
                                           const FairnessCriterion& criterion,
                                           const OracleConfig& cfg, double oracle_objective,
                                           double value_tol = 1e-12);

// The equal-rate threshold rounding of tau weakly dominates it in both group
// utility and group outcome, strictly unless the two are equivalent.
bool verify_threshold_dominance(const GroupSpec& group, const Policy& tau,
                                const std::vector<double>& u, const std::vector<double>& delta);

bool verify_curve_concavity(const PiecewiseLinearCurve& curve);

bool verify_solver_against_oracle(const SolverResult& result, const OracleOutcome& oracle,
                                  double tolerance);

}  // namespace fairsel

#endif  // FAIRSEL_ORACLE_HPP_
