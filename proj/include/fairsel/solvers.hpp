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

#ifndef FAIRSEL_SOLVERS_HPP_
#define FAIRSEL_SOLVERS_HPP_

#include <optional>
#include <string>
#include <vector>

#include "fairsel/objectives.hpp"

namespace fairsel {

enum class CriterionKind { MaxUtil, DemParity, EqOpt, LinearConstraint };

struct FairnessCriterion {
  CriterionKind kind = CriterionKind::MaxUtil;
  std::optional<ConstraintWeights> weights;  // LinearConstraint only

  static FairnessCriterion maxutil() { return {CriterionKind::MaxUtil, std::nullopt}; }
  static FairnessCriterion demparity() { return {CriterionKind::DemParity, std::nullopt}; }
  static FairnessCriterion eqopt() { return {CriterionKind::EqOpt, std::nullopt}; }
  static FairnessCriterion linear(ConstraintWeights w) {
    return {CriterionKind::LinearConstraint, std::move(w)};
  }
};

struct GroupSolution {
  double rate_lo = 0.0;          // optimal selection-rate interval
  double rate_hi = 0.0;
  double rate = 0.0;             // canonical scalar: leftmost endpoint
  ThresholdPolicy policy;        // canonical representative at `rate`
  double utility = 0.0;          // U_j at the canonical rate
  std::optional<double> outcome; // delta-mu_j, when an outcome model is given
  double tpr = 0.0;              // TPR at the canonical rate
};

struct SolverResult {
  GroupSolution a;
  GroupSolution b;
  double total_utility = 0.0;
  // Constraint value t at the canonical solution (DemParity: the common rate;
  // EqOpt: the common TPR) and the residual |t_a - t_b|.
  std::optional<double> constraint_value;
  std::optional<double> constraint_residual;
  std::vector<std::string> flags;
};

// Convex symmetric penalty on the constraint gap. The user table lists
// (t, phi(t)) knots for t >= 0 starting at (0, 0); values in between are
// interpolated and the penalty is mirrored to negative gaps.
struct SoftPenalty {
  enum class Kind { AbsoluteValue, Quadratic, UserConvex };
  Kind kind = Kind::AbsoluteValue;
  double lambda = 0.0;
  std::vector<std::pair<double, double>> knots;  // UserConvex only

  static SoftPenalty absolute(double lambda) { return {Kind::AbsoluteValue, lambda, {}}; }
  static SoftPenalty quadratic(double lambda) { return {Kind::Quadratic, lambda, {}}; }
  static SoftPenalty user(std::vector<std::pair<double, double>> knots, double lambda);

  double value(double t) const;
};

struct SoftResult {
  SolverResult result;
  double t_a = 0.0;  // constraint values at the canonical solution
  double t_b = 0.0;
  double gap = 0.0;          // canonical t_a - t_b
  double gap_lo = 0.0;       // achieved-gap interval across optimal solutions
  double gap_hi = 0.0;
  double t_a_lo = 0.0;       // optimal t_a interval across optimal solutions
  double t_a_hi = 0.0;
  bool matches_hard = false; // optimum includes a zero-gap solution
};

struct OutcomeBasedResult {
  double rate = 0.0;           // min(beta_star, beta_max)
  ThresholdPolicy policy;
  double beta_star = 0.0;      // leftmost outcome-curve maximizer
  double beta_max = 0.0;       // largest rate within the utility budget
  double beta_maxutil = 0.0;
  double utility = 0.0;
  double outcome = 0.0;
  bool assumption_warning = false;  // institution assumption failed pointwise
};

SolverResult solve_maxutil(const Problem& problem, const UtilityFn& u,
                           const OutcomeFn* delta = nullptr);
SolverResult solve_demparity(const Problem& problem, const UtilityFn& u,
                             const OutcomeFn* delta = nullptr);
SolverResult solve_eqopt(const Problem& problem, const UtilityFn& u,
                         const OutcomeFn* delta = nullptr);
SolverResult solve_linear_constraint(const Problem& problem, const UtilityFn& u,
                                     const ConstraintWeights& weights,
                                     const OutcomeFn* delta = nullptr);
SolverResult solve_criterion(const Problem& problem, const UtilityFn& u,
                             const FairnessCriterion& criterion,
                             const OutcomeFn* delta = nullptr);

SoftResult solve_soft(const Problem& problem, const UtilityFn& u,
                      const ConstraintWeights& weights, const SoftPenalty& penalty,
                      const OutcomeFn* delta = nullptr);

// Maximize the group outcome subject to a utility budget:
// rate = min(beta_star, beta_max) with
// beta_max = max{beta >= beta_maxutil : U(beta_maxutil) - U(beta) <= budget}.
OutcomeBasedResult solve_outcome_based(const GroupSpec& group, const UtilityFn& u,
                                       const OutcomeFn& delta, const ScoreGrid& grid,
                                       double budget);

}  // namespace fairsel

#endif  // FAIRSEL_SOLVERS_HPP_
