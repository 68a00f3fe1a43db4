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

#ifndef FAIRSEL_OBJECTIVES_HPP_
#define FAIRSEL_OBJECTIVES_HPP_

#include <optional>
#include <span>
#include <vector>

#include "fairsel/core.hpp"

namespace fairsel {

// Institution utility per selected individual. Either an explicit per-score
// table or the affine model u(x) = u_plus * rho(x) + u_minus * (1 - rho(x)),
// materialized against the owning group's success curve.
class UtilityFn {
 public:
  static UtilityFn from_table(std::vector<double> values);
  static UtilityFn affine(double profit_on_success, double loss_on_failure);

  std::vector<double> values(const SuccessCurve& rho) const;
  bool is_affine() const { return affine_.has_value(); }
  double profit_on_success() const;  // u_plus (affine only)
  double loss_on_failure() const;    // u_minus (affine only)

 private:
  struct Affine {
    double on_success;
    double on_failure;
  };
  std::vector<double> table_;
  std::optional<Affine> affine_;
};

// Expected score change for a selected individual. Affine form
// delta(x) = c_plus * rho(x) + c_minus * (1 - rho(x)); with clamping enabled
// the realized movement is capped at the grid boundary in label units:
// gain(x) = min(c_plus, label(C) - label(x)), penalty(x) = max(c_minus,
// label(1) - label(x)). An optional non-selection table delta_n switches the
// group outcome to sum pi (tau delta_p + (1 - tau) delta_n).
class OutcomeFn {
 public:
  static OutcomeFn from_table(std::vector<double> values);
  static OutcomeFn affine(double gain_on_success, double penalty_on_failure,
                          bool clamp_to_grid = false);
  OutcomeFn with_non_selection(std::vector<double> delta_n) const;

  std::vector<double> selection_values(const SuccessCurve& rho, const ScoreGrid& grid) const;
  const std::optional<std::vector<double>>& non_selection() const { return non_selection_; }
  bool is_affine() const { return affine_.has_value(); }
  double gain_on_success() const;     // c_plus (affine only)
  double penalty_on_failure() const;  // c_minus (affine only)

 private:
  struct Affine {
    double on_success;
    double on_failure;
    bool clamp;
  };
  std::vector<double> table_;
  std::optional<Affine> affine_;
  std::optional<std::vector<double>> non_selection_;
};

// Per-group positive weights defining a linear constraint
// <w_a o pi_a, tau_a> = <w_b o pi_b, tau_b>.
struct ConstraintWeights {
  std::vector<double> group_a;
  std::vector<double> group_b;

  static ConstraintWeights demographic_parity(int scores);
  // w_j = rho_j / <rho_j, pi_j>, so the constraint value is the group TPR.
  static ConstraintWeights equal_opportunity(const GroupSpec& a, const GroupSpec& b);
  static ConstraintWeights shared(std::vector<double> w);

  bool strictly_positive() const;
};

// Exact breakpoint representation of beta |-> <w, pi o r^{-1}(beta)>. Nodes
// sit at the distribution's distinct upper-tail masses; the slope of each
// segment is the weight of the score being marginally admitted there.
// Duplicate breakpoints arising from zero-mass scores are merged.
class PiecewiseLinearCurve {
 public:
  PiecewiseLinearCurve(std::vector<double> xs, std::vector<double> ys,
                       std::vector<double> slopes);
  static PiecewiseLinearCurve from_weights(const ScoreDistribution& dist,
                                           std::span<const double> weights,
                                           double offset = 0.0);

  const std::vector<double>& xs() const { return xs_; }
  const std::vector<double>& ys() const { return ys_; }
  const std::vector<double>& slopes() const { return slopes_; }
  double domain_lo() const { return xs_.front(); }
  double domain_hi() const { return xs_.back(); }

  double value(double x) const;
  double right_slope(double x) const;  // at the right edge: slope of the last segment
  double left_slope(double x) const;   // at the left edge: slope of the first segment
  bool is_concave(double tol = kDerivTol) const;

  struct Extremum {
    double lo = 0.0;
    double hi = 0.0;
    double value = 0.0;
  };
  // Maximizer interval of a concave curve found by the slope sign change;
  // segments with |slope| <= slope_tol count as flat.
  Extremum maximize(double slope_tol = kDerivTol) const;

  // Inverse of a strictly increasing curve, by exact segment walk.
  double inverse_increasing(double y) const;

 private:
  int segment_of(double x) const;

  std::vector<double> xs_;
  std::vector<double> ys_;
  std::vector<double> slopes_;
};

// Direct evaluation of <w, pi o r^{-1}(beta)> through the canonical threshold
// policy, without the curve machinery; used to cross-check curve exactness.
double selection_weight_sum(const ScoreDistribution& dist, std::span<const double> weights,
                            double beta);

double group_utility(const GroupSpec& group, const Policy& tau, const UtilityFn& u);
double total_utility(const Problem& problem, const Policy& tau_a, const Policy& tau_b,
                     const UtilityFn& u);
double group_outcome(const GroupSpec& group, const Policy& tau, const OutcomeFn& delta,
                     const ScoreGrid& grid);
// True positive rate sum pi rho tau / <pi, rho>; requires positive success mass.
double tpr(const GroupSpec& group, const Policy& tau);

PiecewiseLinearCurve utility_curve(const GroupSpec& group, const UtilityFn& u);
PiecewiseLinearCurve outcome_curve(const GroupSpec& group, const OutcomeFn& delta,
                                   const ScoreGrid& grid);
// T_j(beta) = <r^{-1}(beta), pi o w>: strictly increasing constraint-value map.
PiecewiseLinearCurve transfer_curve(const GroupSpec& group, std::span<const double> weights);

double transfer_T(const GroupSpec& group, std::span<const double> weights, double beta);
double transfer_T_inverse(const GroupSpec& group, std::span<const double> weights, double t);
// G^{A->B}(beta) = T_B^{-1}(T_A(beta)): the group-B selection rate with the
// same constraint value as beta for group A.
double transfer_G(const GroupSpec& a, const GroupSpec& b, const ConstraintWeights& w,
                  double beta);

struct AssumptionCheck {
  bool pointwise = false;  // u(x) > 0 implies delta(x) > 0 on the grid
  // u_minus/u_plus < c_minus/c_plus, reported when both models are affine.
  std::optional<bool> affine_ratio;
};
AssumptionCheck check_institution_assumption(const UtilityFn& u, const OutcomeFn& delta,
                                             const SuccessCurve& rho, const ScoreGrid& grid);

}  // namespace fairsel

#endif  // FAIRSEL_OBJECTIVES_HPP_
