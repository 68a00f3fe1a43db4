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

#ifndef FAIRSEL_ANALYSIS_HPP_
#define FAIRSEL_ANALYSIS_HPP_

#include <optional>
#include <string>
#include <vector>

#include "fairsel/solvers.hpp"

namespace fairsel {

// Landmark selection rates on a group's outcome curve. beta_zero is the
// rightmost rate with a non-negative outcome (reported as the domain end and
// flagged when the curve never goes negative); beta_bar is the rate beyond
// the maximizer that matches the MaxUtil outcome (clipped and flagged when it
// falls outside the domain).
struct SpecialBetas {
  double beta_maxutil = 0.0;
  double beta_star = 0.0;      // leftmost outcome maximizer
  double beta_star_hi = 0.0;   // right end of the maximizing interval
  double beta_zero = 0.0;
  double beta_bar = 0.0;
  double outcome_star = 0.0;
  double outcome_maxutil = 0.0;
  bool harm_threshold_at_boundary = false;
  bool complement_beyond_domain = false;
  bool curve_never_nonnegative = false;
};

SpecialBetas special_betas(const PiecewiseLinearCurve& outcome, double beta_maxutil);

enum class AbsoluteRegime { ActiveHarm, Stagnation, Improvement };
enum class RelativeRegime { RelativeHarm, RelativeNeutral, RelativeImprovement };
struct OutcomeRegime {
  AbsoluteRegime absolute = AbsoluteRegime::Stagnation;
  RelativeRegime relative = RelativeRegime::RelativeNeutral;
};

OutcomeRegime classify_regime(double beta, const SpecialBetas& betas,
                              const PiecewiseLinearCurve& outcome);
const char* to_string(AbsoluteRegime r);
const char* to_string(RelativeRegime r);

// A sufficient population-proportion range from the closed-form quantile
// ratios; for g_A inside it the named solver's rate falls on the advertised
// side of beta_target.
struct ProportionInterval {
  double lo = 0.0;
  double hi = 0.0;
  std::string rule;
  double beta_target = 0.0;
  std::vector<std::string> flags;
};

// DemParity over-selects past beta_target for any g_A <= hi.
ProportionInterval dp_overeager_bound(const Problem& problem, const UtilityFn& u,
                                              double beta_target,
                                              const SpecialBetas* betas_a = nullptr);
// Same statement for EqOpt, with the success-mass weighted ratio.
ProportionInterval eqopt_overeager_bound(const Problem& problem, const UtilityFn& u,
                                                 double beta_target,
                                                 const SpecialBetas* betas_a = nullptr);

// Proportion windows in which DemParity (resp. EqOpt) selects group A inside
// (beta, beta_prime).
struct RelativeImprovementIntervals {
  ProportionInterval demparity;
  ProportionInterval eqopt;
};
RelativeImprovementIntervals relative_improvement_windows(const Problem& problem,
                                                                const UtilityFn& u, double beta,
                                                                double beta_prime);

// Translated-distribution setting: for g_A in the interval, EqOpt selects
// below beta_target while DemParity selects above it.
struct AvoidHarmInterval {
  ProportionInterval interval;
  bool transfer_above_identity = false;      // G(beta) > beta
  bool quantile_ratio_exceeds_mean_ratio = false;  // mu_B/mu_A < Q_B(beta)/Q_A(beta)
};
AvoidHarmInterval avoid_harm_window(const Problem& problem, const UtilityFn& u,
                                          double beta_target);

// Diagnostic form of the disadvantage premise: selecting group A at group B's
// unconstrained rate would already lower A's mean score.
bool dp_overeager_premise(const Problem& problem, const UtilityFn& u, const OutcomeFn& delta);

// Hypothesis test for the underloan phenomenon: MaxUtil selects less of A
// than of B while A's TPR under MaxUtil is higher. When it holds, the solver
// chain beta_eqopt < beta_maxutil < beta_demparity is evaluated for group A.
struct UnderloanReport {
  bool holds = false;
  double tpr_a_maxutil = 0.0;
  double tpr_b_maxutil = 0.0;
  double beta_a_maxutil = 0.0;
  double beta_b_maxutil = 0.0;
  std::optional<double> beta_a_eqopt;
  std::optional<double> beta_a_demparity;
  bool chain_strict = false;
};
UnderloanReport eqopt_underloan_predicate(const Problem& problem, const UtilityFn& u);

// Systematic score underestimation: a non-positive integer shift per score.
struct MeasurementError {
  std::vector<int> shift;

  static MeasurementError none(int scores);
  static MeasurementError uniform(int scores, int amount);  // clamped at the bottom score
};

GroupSpec apply_measurement_error(const GroupSpec& group, const MeasurementError& err);

// The true TPR dominates the estimated TPR over every policy, i.e. the
// success-normalized mass pi(x)/<rho,pi> never grows under estimation at any
// score with positive success probability.
bool tpr_dominates(const GroupSpec& truth, const GroupSpec& estimated);

struct UnderselectionRow {
  std::string criterion;
  double beta_true = 0.0;
  double beta_estimated = 0.0;
  bool weak_holds = false;  // estimated <= true
  bool strict = false;      // estimated < true
  bool checked = true;      // EqOpt row is checked only under TPR dominance
};
struct UnderselectionReport {
  std::vector<UnderselectionRow> rows;
  bool tpr_dominance = false;
};
UnderselectionReport verify_underselection(const Problem& problem, const UtilityFn& u,
                                           const MeasurementError& err);

enum class SweepParameter { GroupProportion, Lambda, UtilityRatio };

struct SweepSpec {
  SweepParameter parameter = SweepParameter::GroupProportion;
  std::vector<double> grid;
  // Lambda sweeps: penalty shape and constraint weights.
  SoftPenalty::Kind penalty_kind = SoftPenalty::Kind::AbsoluteValue;
  bool soft_eqopt_weights = false;  // default penalizes selection-rate gaps
};

struct SweepRow {
  double parameter_value = 0.0;
  std::string criterion;
  SolverResult result;
  std::optional<OutcomeRegime> regime_a;
  std::optional<OutcomeRegime> regime_b;
  std::optional<double> gap;  // soft rows
};

std::vector<SweepRow> sweep(const Problem& problem, const UtilityFn& u, const OutcomeFn* delta,
                            const SweepSpec& spec);

}  // namespace fairsel

#endif  // FAIRSEL_ANALYSIS_HPP_
