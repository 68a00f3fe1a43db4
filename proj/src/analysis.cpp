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

#include "fairsel/analysis.hpp"

#include <algorithm>
#include <cmath>

namespace fairsel {
namespace {

double success_mass(const GroupSpec& g) {
  double mass = 0.0;
  for (int x = 1; x <= g.dist.size(); ++x) mass += g.dist.pmf(x) * g.rho(x);
  return mass;
}

double value_at(const std::vector<double>& v, int x) { return v[static_cast<size_t>(x - 1)]; }

}  // namespace

SpecialBetas special_betas(const PiecewiseLinearCurve& outcome, double beta_maxutil) {
  if (!outcome.is_concave()) throw PreconditionError("outcome curve must be concave");
  const auto star = outcome.maximize();
  SpecialBetas out;
  out.beta_maxutil = beta_maxutil;
  out.beta_star = star.lo;
  out.beta_star_hi = star.hi;
  out.outcome_star = star.value;
  out.outcome_maxutil = outcome.value(beta_maxutil);

  const auto& xs = outcome.xs();
  const auto& ys = outcome.ys();
  const auto& slopes = outcome.slopes();
  const int n = static_cast<int>(slopes.size());

  if (ys.back() >= 0.0) {
    out.beta_zero = xs.back();
    out.harm_threshold_at_boundary = ys.back() > kRegimeTol;
  } else {
    int k = n - 1;
    while (k >= 0 && ys[static_cast<size_t>(k)] < 0.0) --k;
    if (k < 0) {
      out.beta_zero = xs.front();
      out.curve_never_nonnegative = true;
    } else {
      // ys[k] >= 0 > ys[k+1], so the segment slope is negative.
      out.beta_zero =
          xs[static_cast<size_t>(k)] - ys[static_cast<size_t>(k)] / slopes[static_cast<size_t>(k)];
    }
  }

  if (out.outcome_maxutil >= out.outcome_star - kDerivTol) {
    out.beta_bar = beta_maxutil;
  } else if (ys.back() > out.outcome_maxutil) {
    out.beta_bar = xs.back();
    out.complement_beyond_domain = true;
  } else {
    out.beta_bar = star.hi;
    for (int k = 0; k < n; ++k) {
      if (xs[static_cast<size_t>(k + 1)] <= star.hi) continue;
      if (ys[static_cast<size_t>(k + 1)] >= out.outcome_maxutil) {
        out.beta_bar = xs[static_cast<size_t>(k + 1)];
        continue;
      }
      const double crossing =
          xs[static_cast<size_t>(k)] +
          (out.outcome_maxutil - ys[static_cast<size_t>(k)]) / slopes[static_cast<size_t>(k)];
      out.beta_bar = std::max(star.hi, crossing);
      break;
    }
  }
  return out;
}

OutcomeRegime classify_regime(double beta, const SpecialBetas& betas,
                              const PiecewiseLinearCurve& outcome) {
  const double v = outcome.value(beta);
  OutcomeRegime r;
  if (v < -kRegimeTol) {
    r.absolute = AbsoluteRegime::ActiveHarm;
  } else if (v > kRegimeTol) {
    r.absolute = AbsoluteRegime::Improvement;
  } else {
    r.absolute = AbsoluteRegime::Stagnation;
  }
  const double ref = betas.outcome_maxutil;
  if (v < ref - kRegimeTol) {
    r.relative = RelativeRegime::RelativeHarm;
  } else if (v > ref + kRegimeTol) {
    r.relative = RelativeRegime::RelativeImprovement;
  } else {
    r.relative = RelativeRegime::RelativeNeutral;
  }
  return r;
}

const char* to_string(AbsoluteRegime r) {
  switch (r) {
    case AbsoluteRegime::ActiveHarm:
      return "active-harm";
    case AbsoluteRegime::Stagnation:
      return "stagnation";
    case AbsoluteRegime::Improvement:
      return "improvement";
  }
  return "?";
}

const char* to_string(RelativeRegime r) {
  switch (r) {
    case RelativeRegime::RelativeHarm:
      return "relative-harm";
    case RelativeRegime::RelativeNeutral:
      return "relative-neutral";
    case RelativeRegime::RelativeImprovement:
      return "relative-improvement";
  }
  return "?";
}

namespace {

void attach_special_flags(ProportionInterval& out, const SpecialBetas* betas, double beta) {
  if (betas == nullptr) return;
  if (std::abs(beta - betas->beta_zero) <= kDerivTol) out.flags.push_back("active-harm-at-target");
  if (std::abs(beta - betas->beta_bar) <= kDerivTol) out.flags.push_back("relative-harm-at-target");
}

}  // namespace

ProportionInterval dp_overeager_bound(const Problem& problem, const UtilityFn& u,
                                              double beta_target, const SpecialBetas* betas_a) {
  const std::vector<double> ua = u.values(problem.group_a.rho);
  const std::vector<double> ub = u.values(problem.group_b.rho);
  const SolverResult mu = solve_maxutil(problem, u);
  if (!(beta_target > mu.a.rate && beta_target < mu.b.rate)) {
    throw PreconditionError("over-eager bound needs beta_A^MU < beta < beta_B^MU");
  }
  const double u_a = value_at(ua, quantile_upper(problem.group_a.dist, beta_target));
  const double u_b = value_at(ub, quantile_upper(problem.group_b.dist, beta_target));
  if (!(u_b > 0.0)) {
    throw PreconditionError("group B must still be profitable at the target rate");
  }
  ProportionInterval out;
  out.rule = "demparity-overeager";
  out.beta_target = beta_target;
  out.lo = 0.0;
  out.hi = u_a > 0.0 ? 1.0 : 1.0 / (1.0 - u_a / u_b);
  attach_special_flags(out, betas_a, beta_target);
  return out;
}

ProportionInterval eqopt_overeager_bound(const Problem& problem, const UtilityFn& u,
                                                 double beta_target, const SpecialBetas* betas_a) {
  const std::vector<double> ua = u.values(problem.group_a.rho);
  const std::vector<double> ub = u.values(problem.group_b.rho);
  const ConstraintWeights w =
      ConstraintWeights::equal_opportunity(problem.group_a, problem.group_b);
  const SolverResult mu = solve_maxutil(problem, u);
  const double g_image = transfer_G(problem.group_a, problem.group_b, w, beta_target);
  if (!(beta_target > mu.a.rate && g_image < mu.b.rate)) {
    throw PreconditionError(
        "over-eager bound needs beta > beta_A^MU and G(beta) < beta_B^MU");
  }
  const int qa = quantile_upper(problem.group_a.dist, beta_target);
  const int qb = quantile_upper(problem.group_b.dist, g_image);
  const double u_a = value_at(ua, qa);
  const double u_b = value_at(ub, qb);
  if (!(u_b > 0.0)) {
    throw PreconditionError("group B must still be profitable at the transferred rate");
  }
  const double kappa = success_mass(problem.group_b) / success_mass(problem.group_a);
  const double ratio = (1.0 / kappa) * (problem.group_b.rho(qb) / u_b) *
                       (u_a / problem.group_a.rho(qa));
  ProportionInterval out;
  out.rule = "eqopt-overeager";
  out.beta_target = beta_target;
  out.lo = 0.0;
  out.hi = u_a > 0.0 ? 1.0 : 1.0 / (1.0 - ratio);
  attach_special_flags(out, betas_a, beta_target);
  return out;
}

RelativeImprovementIntervals relative_improvement_windows(const Problem& problem,
                                                                const UtilityFn& u, double beta,
                                                                double beta_prime) {
  if (!(beta < beta_prime)) throw PreconditionError("need beta < beta_prime");
  const std::vector<double> ua = u.values(problem.group_a.rho);
  const std::vector<double> ub = u.values(problem.group_b.rho);
  const SolverResult mu = solve_maxutil(problem, u);
  if (!(beta > mu.a.rate)) throw PreconditionError("need beta > beta_A^MU");

  RelativeImprovementIntervals out;

  // DemParity window [g0, g1]: rate > beta for g_A <= g1, rate < beta' for
  // g_A >= g0.
  {
    const double u_a_lo = value_at(ua, quantile_upper(problem.group_a.dist, beta));
    const double u_b_lo = value_at(ub, quantile_upper(problem.group_b.dist, beta));
    if (!(u_b_lo > 0.0)) throw PreconditionError("need beta < beta_B^MU");
    const double g1 = u_a_lo >= 0.0 ? 1.0 : 1.0 / (1.0 - u_a_lo / u_b_lo);
    const double u_a_hi = value_at(ua, quantile_upper_plus(problem.group_a.dist, beta_prime));
    if (!(u_a_hi < 0.0)) throw PreconditionError("need beta_prime past group A's optimum");
    const double u_b_hi = value_at(ub, quantile_upper_plus(problem.group_b.dist, beta_prime));
    const double g0 = u_b_hi <= 0.0 ? 0.0 : 1.0 / (1.0 - u_a_hi / u_b_hi);
    out.demparity.rule = "demparity-relative-improvement";
    out.demparity.beta_target = beta;
    out.demparity.lo = g0;
    out.demparity.hi = g1;
    if (g0 > g1) out.demparity.flags.push_back("empty");
  }

  // EqOpt window [g2, g3] with the weighted ratios evaluated at the transfer
  // images of beta and beta_prime.
  {
    const ConstraintWeights w =
        ConstraintWeights::equal_opportunity(problem.group_a, problem.group_b);
    const double kappa = success_mass(problem.group_b) / success_mass(problem.group_a);
    const double gb_lo = transfer_G(problem.group_a, problem.group_b, w, beta);
    const int qa_lo = quantile_upper(problem.group_a.dist, beta);
    const int qb_lo = quantile_upper(problem.group_b.dist, gb_lo);
    const double u_b_lo = value_at(ub, qb_lo);
    if (!(u_b_lo > 0.0)) throw PreconditionError("need G(beta) < beta_B^MU");
    const double u_a_lo = value_at(ua, qa_lo);
    const double g3 =
        u_a_lo >= 0.0
            ? 1.0
            : 1.0 / (1.0 - (1.0 / kappa) * (problem.group_b.rho(qb_lo) / u_b_lo) *
                               (u_a_lo / problem.group_a.rho(qa_lo)));
    const double gb_hi = transfer_G(problem.group_a, problem.group_b, w, beta_prime);
    const int qa_hi = quantile_upper_plus(problem.group_a.dist, beta_prime);
    const int qb_hi = quantile_upper_plus(problem.group_b.dist, gb_hi);
    const double u_a_hi = value_at(ua, qa_hi);
    if (!(u_a_hi < 0.0)) throw PreconditionError("need beta_prime past group A's optimum");
    const double u_b_hi = value_at(ub, qb_hi);
    const double g2 =
        u_b_hi <= 0.0 ? 0.0
                      : 1.0 / (1.0 - (1.0 / kappa) * (problem.group_b.rho(qb_hi) / u_b_hi) *
                                         (u_a_hi / problem.group_a.rho(qa_hi)));
    out.eqopt.rule = "eqopt-relative-improvement";
    out.eqopt.beta_target = beta;
    out.eqopt.lo = g2;
    out.eqopt.hi = g3;
    if (g2 > g3) out.eqopt.flags.push_back("empty");
  }
  return out;
}

namespace {

// Exact integer translation: pi_a(x) == pi_b(x + m) for some m >= 1.
std::optional<int> translation_offset(const ScoreDistribution& a, const ScoreDistribution& b) {
  const double diff = b.mean() - a.mean();
  const int m = static_cast<int>(std::lround(diff));
  if (m < 1 || std::abs(diff - m) > 1e-9) return std::nullopt;
  for (int x = 1; x <= a.size(); ++x) {
    const double pb = (x + m <= b.size()) ? b.pmf(x + m) : 0.0;
    if (std::abs(a.pmf(x) - pb) > 1e-12) return std::nullopt;
  }
  return m;
}

}  // namespace

AvoidHarmInterval avoid_harm_window(const Problem& problem, const UtilityFn& u,
                                          double beta_target) {
  const GroupSpec& a = problem.group_a;
  const GroupSpec& b = problem.group_b;
  if (!translation_offset(a.dist, b.dist)) {
    throw PreconditionError("distributions must be identical up to an upward translation");
  }
  for (int x = 1; x <= a.dist.size(); ++x) {
    if (std::abs(a.rho(x) - b.rho(x)) > 1e-12) {
      throw PreconditionError("groups must share the success curve");
    }
  }
  if (!a.rho.affine_in_score()) {
    throw PreconditionError("success curve must be affine in the score");
  }
  const double mean_a = a.dist.mean();
  double mass_above_mean = 0.0;
  for (int x = 1; x <= a.dist.size(); ++x) {
    if (x > mean_a) mass_above_mean += a.dist.pmf(x);
  }
  if (!(beta_target > mass_above_mean)) {
    throw PreconditionError("target rate must exceed group A's mass above its mean");
  }

  const std::vector<double> ua = u.values(a.rho);
  const std::vector<double> ub = u.values(b.rho);
  const ConstraintWeights w = ConstraintWeights::equal_opportunity(a, b);
  const double kappa = success_mass(b) / success_mass(a);

  // DemParity stays above beta_target for g_A < hi.
  const int qa = quantile_upper(a.dist, beta_target);
  const int qb = quantile_upper(b.dist, beta_target);
  const double u_a = value_at(ua, qa);
  const double u_b = value_at(ub, qb);
  if (!(u_a < 0.0 && u_b > 0.0)) {
    throw PreconditionError("target rate must sit between the groups' unconstrained optima");
  }
  const double g2 = 1.0 / (1.0 - u_a / u_b);

  // EqOpt stays below beta_target for g_A > lo.
  const double g_image = transfer_G(a, b, w, beta_target);
  const int qa_plus = quantile_upper_plus(a.dist, beta_target);
  const int qb_plus = quantile_upper_plus(b.dist, g_image);
  const double u_a_plus = value_at(ua, qa_plus);
  if (!(u_a_plus < 0.0)) {
    throw PreconditionError("target rate must sit past group A's unconstrained optimum");
  }
  const double u_b_plus = value_at(ub, qb_plus);
  const double g1 =
      u_b_plus <= 0.0 ? 0.0
                      : 1.0 / (1.0 - (1.0 / kappa) * (b.rho(qb_plus) / u_b_plus) *
                                         (u_a_plus / a.rho(qa_plus)));

  AvoidHarmInterval out;
  out.interval.rule = "eqopt-avoids-harm";
  out.interval.beta_target = beta_target;
  out.interval.lo = g1;
  out.interval.hi = g2;
  if (g1 > g2) out.interval.flags.push_back("empty");
  out.transfer_above_identity = g_image > beta_target;
  const double mean_b = b.dist.mean();
  out.quantile_ratio_exceeds_mean_ratio =
      mean_b / mean_a < static_cast<double>(qb) / static_cast<double>(qa);
  return out;
}

bool dp_overeager_premise(const Problem& problem, const UtilityFn& u, const OutcomeFn& delta) {
  const SolverResult mu = solve_maxutil(problem, u);
  const PiecewiseLinearCurve curve = outcome_curve(problem.group_a, delta, problem.grid);
  return curve.value(mu.b.rate) < 0.0;
}

UnderloanReport eqopt_underloan_predicate(const Problem& problem, const UtilityFn& u) {
  const SolverResult mu = solve_maxutil(problem, u);
  UnderloanReport out;
  out.beta_a_maxutil = mu.a.rate;
  out.beta_b_maxutil = mu.b.rate;
  out.tpr_a_maxutil = mu.a.tpr;
  out.tpr_b_maxutil = mu.b.tpr;
  out.holds = mu.a.rate < mu.b.rate - kDerivTol && mu.a.tpr > mu.b.tpr + kDerivTol;
  if (out.holds) {
    const SolverResult eq = solve_eqopt(problem, u);
    const SolverResult dp = solve_demparity(problem, u);
    out.beta_a_eqopt = eq.a.rate;
    out.beta_a_demparity = dp.a.rate;
    out.chain_strict =
        eq.a.rate < mu.a.rate - kDerivTol && mu.a.rate < dp.a.rate - kDerivTol;
  }
  return out;
}

MeasurementError MeasurementError::none(int scores) {
  MeasurementError e;
  e.shift.assign(static_cast<size_t>(scores), 0);
  return e;
}

MeasurementError MeasurementError::uniform(int scores, int amount) {
  if (amount > 0) throw ValidationError("underestimation shifts must be non-positive");
  MeasurementError e;
  e.shift.resize(static_cast<size_t>(scores));
  for (int x = 1; x <= scores; ++x) {
    e.shift[static_cast<size_t>(x - 1)] = std::max(amount, 1 - x);
  }
  return e;
}

GroupSpec apply_measurement_error(const GroupSpec& group, const MeasurementError& err) {
  const int c = group.dist.size();
  if (static_cast<int>(err.shift.size()) != c) {
    throw ValidationError("error map does not match the grid");
  }
  std::vector<double> pmf(static_cast<size_t>(c), 0.0);
  for (int x = 1; x <= c; ++x) {
    const int e = err.shift[static_cast<size_t>(x - 1)];
    if (e > 0) throw ValidationError("underestimation shifts must be non-positive");
    const int y = x + e;
    if (y < 1 || y > c) throw ValidationError("shifted score leaves the grid");
    pmf[static_cast<size_t>(y - 1)] += group.dist.pmf(x);
  }
  return GroupSpec(ScoreDistribution(std::move(pmf)), group.rho, group.proportion);
}

bool tpr_dominates(const GroupSpec& truth, const GroupSpec& estimated) {
  const double mass_true = success_mass(truth);
  const double mass_est = success_mass(estimated);
  if (!(mass_true > 0.0 && mass_est > 0.0)) return false;
  // TPR(tau) >= estimated TPR(tau) for every policy tau is a per-score
  // comparison of the weighted masses. Domination of the threshold-policy TPR
  // map alone is not enough: estimated EqOpt rates can overshoot under it.
  for (int x = 1; x <= truth.dist.size(); ++x) {
    if (!(truth.rho(x) > 0.0)) continue;
    if (estimated.dist.pmf(x) / mass_est > truth.dist.pmf(x) / mass_true + kDerivTol) {
      return false;
    }
  }
  return true;
}

UnderselectionReport verify_underselection(const Problem& problem, const UtilityFn& u,
                                           const MeasurementError& err) {
  const GroupSpec estimated = apply_measurement_error(problem.group_a, err);
  const Problem est_problem(problem.grid, estimated, problem.group_b);
  UnderselectionReport out;
  out.tpr_dominance = tpr_dominates(problem.group_a, estimated);

  auto add = [&](const std::string& name, double true_rate, double est_rate, bool checked) {
    UnderselectionRow row;
    row.criterion = name;
    row.beta_true = true_rate;
    row.beta_estimated = est_rate;
    row.weak_holds = est_rate <= true_rate + kDerivTol;
    row.strict = est_rate < true_rate - kDerivTol;
    row.checked = checked;
    out.rows.push_back(row);
  };

  add("maxutil", solve_maxutil(problem, u).a.rate, solve_maxutil(est_problem, u).a.rate, true);
  add("demparity", solve_demparity(problem, u).a.rate, solve_demparity(est_problem, u).a.rate,
      true);
  add("eqopt", solve_eqopt(problem, u).a.rate, solve_eqopt(est_problem, u).a.rate,
      out.tpr_dominance);
  return out;
}

std::vector<SweepRow> sweep(const Problem& problem, const UtilityFn& u, const OutcomeFn* delta,
                            const SweepSpec& spec) {
  if (spec.grid.empty()) throw ValidationError("sweep grid must not be empty");
  std::vector<SweepRow> rows;

  auto classify = [&](const Problem& p, const UtilityFn& uu, SweepRow& row) {
    if (delta == nullptr) return;
    const SolverResult mu = solve_maxutil(p, uu, delta);
    const PiecewiseLinearCurve oa = outcome_curve(p.group_a, *delta, p.grid);
    const PiecewiseLinearCurve ob = outcome_curve(p.group_b, *delta, p.grid);
    row.regime_a = classify_regime(row.result.a.rate, special_betas(oa, mu.a.rate), oa);
    row.regime_b = classify_regime(row.result.b.rate, special_betas(ob, mu.b.rate), ob);
  };

  for (double v : spec.grid) {
    switch (spec.parameter) {
      case SweepParameter::GroupProportion: {
        GroupSpec a(problem.group_a.dist, problem.group_a.rho, v);
        GroupSpec b(problem.group_b.dist, problem.group_b.rho, 1.0 - v);
        const Problem p(problem.grid, std::move(a), std::move(b));
        for (const char* name : {"maxutil", "demparity", "eqopt"}) {
          SweepRow row;
          row.parameter_value = v;
          row.criterion = name;
          if (std::string(name) == "maxutil") {
            row.result = solve_maxutil(p, u, delta);
          } else if (std::string(name) == "demparity") {
            row.result = solve_demparity(p, u, delta);
          } else {
            row.result = solve_eqopt(p, u, delta);
          }
          classify(p, u, row);
          rows.push_back(std::move(row));
        }
        break;
      }
      case SweepParameter::Lambda: {
        const ConstraintWeights w =
            spec.soft_eqopt_weights
                ? ConstraintWeights::equal_opportunity(problem.group_a, problem.group_b)
                : ConstraintWeights::demographic_parity(problem.scores());
        SoftPenalty penalty;
        penalty.kind = spec.penalty_kind;
        penalty.lambda = v;
        const SoftResult soft = solve_soft(problem, u, w, penalty, delta);
        SweepRow row;
        row.parameter_value = v;
        row.criterion = "soft";
        row.result = soft.result;
        row.gap = soft.gap;
        classify(problem, u, row);
        rows.push_back(std::move(row));
        break;
      }
      case SweepParameter::UtilityRatio: {
        if (!u.is_affine()) {
          throw ValidationError("utility-ratio sweeps need the affine utility model");
        }
        const double u_plus = u.profit_on_success();
        const UtilityFn swept = UtilityFn::affine(u_plus, v * u_plus);
        for (const char* name : {"maxutil", "demparity", "eqopt"}) {
          SweepRow row;
          row.parameter_value = v;
          row.criterion = name;
          if (std::string(name) == "maxutil") {
            row.result = solve_maxutil(problem, swept, delta);
          } else if (std::string(name) == "demparity") {
            row.result = solve_demparity(problem, swept, delta);
          } else {
            row.result = solve_eqopt(problem, swept, delta);
          }
          classify(problem, swept, row);
          rows.push_back(std::move(row));
        }
        break;
      }
    }
  }
  return rows;
}

}  // namespace fairsel
