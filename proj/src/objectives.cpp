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

#include "fairsel/objectives.hpp"

#include <algorithm>
#include <cmath>

namespace fairsel {

UtilityFn UtilityFn::from_table(std::vector<double> values) {
  if (values.empty()) throw ValidationError("utility table must cover at least one score");
  UtilityFn u;
  u.table_ = std::move(values);
  return u;
}

UtilityFn UtilityFn::affine(double profit_on_success, double loss_on_failure) {
  UtilityFn u;
  u.affine_ = Affine{profit_on_success, loss_on_failure};
  return u;
}

std::vector<double> UtilityFn::values(const SuccessCurve& rho) const {
  if (affine_) {
    std::vector<double> v(static_cast<size_t>(rho.size()));
    for (int x = 1; x <= rho.size(); ++x) {
      v[static_cast<size_t>(x - 1)] =
          affine_->on_success * rho(x) + affine_->on_failure * (1.0 - rho(x));
    }
    return v;
  }
  if (static_cast<int>(table_.size()) != rho.size()) {
    throw ValidationError("utility table does not match the grid");
  }
  return table_;
}

double UtilityFn::profit_on_success() const {
  if (!affine_) throw ValidationError("utility is not affine");
  return affine_->on_success;
}

double UtilityFn::loss_on_failure() const {
  if (!affine_) throw ValidationError("utility is not affine");
  return affine_->on_failure;
}

OutcomeFn OutcomeFn::from_table(std::vector<double> values) {
  if (values.empty()) throw ValidationError("outcome table must cover at least one score");
  OutcomeFn d;
  d.table_ = std::move(values);
  return d;
}

OutcomeFn OutcomeFn::affine(double gain_on_success, double penalty_on_failure,
                            bool clamp_to_grid) {
  OutcomeFn d;
  d.affine_ = Affine{gain_on_success, penalty_on_failure, clamp_to_grid};
  return d;
}

OutcomeFn OutcomeFn::with_non_selection(std::vector<double> delta_n) const {
  OutcomeFn d = *this;
  d.non_selection_ = std::move(delta_n);
  return d;
}

std::vector<double> OutcomeFn::selection_values(const SuccessCurve& rho,
                                                const ScoreGrid& grid) const {
  if (rho.size() != grid.size()) throw ValidationError("success curve does not match the grid");
  if (affine_) {
    std::vector<double> v(static_cast<size_t>(rho.size()));
    const double top = grid.label(grid.size());
    const double bottom = grid.label(1);
    for (int x = 1; x <= rho.size(); ++x) {
      double gain = affine_->on_success;
      double penalty = affine_->on_failure;
      if (affine_->clamp) {
        gain = std::min(gain, top - grid.label(x));
        penalty = std::max(penalty, bottom - grid.label(x));
      }
      v[static_cast<size_t>(x - 1)] = rho(x) * gain + (1.0 - rho(x)) * penalty;
    }
    return v;
  }
  if (static_cast<int>(table_.size()) != rho.size()) {
    throw ValidationError("outcome table does not match the grid");
  }
  return table_;
}

double OutcomeFn::gain_on_success() const {
  if (!affine_) throw ValidationError("outcome is not affine");
  return affine_->on_success;
}

double OutcomeFn::penalty_on_failure() const {
  if (!affine_) throw ValidationError("outcome is not affine");
  return affine_->on_failure;
}

ConstraintWeights ConstraintWeights::demographic_parity(int scores) {
  ConstraintWeights w;
  w.group_a.assign(static_cast<size_t>(scores), 1.0);
  w.group_b.assign(static_cast<size_t>(scores), 1.0);
  return w;
}

ConstraintWeights ConstraintWeights::equal_opportunity(const GroupSpec& a, const GroupSpec& b) {
  auto build = [](const GroupSpec& g) {
    if (!g.rho.strictly_positive()) {
      throw PreconditionError("equal-opportunity weights need rho(x) > 0 everywhere");
    }
    double mass = 0.0;
    for (int x = 1; x <= g.dist.size(); ++x) mass += g.dist.pmf(x) * g.rho(x);
    std::vector<double> w(static_cast<size_t>(g.dist.size()));
    for (int x = 1; x <= g.dist.size(); ++x) w[static_cast<size_t>(x - 1)] = g.rho(x) / mass;
    return w;
  };
  ConstraintWeights w;
  w.group_a = build(a);
  w.group_b = build(b);
  return w;
}

ConstraintWeights ConstraintWeights::shared(std::vector<double> w) {
  ConstraintWeights out;
  out.group_a = w;
  out.group_b = std::move(w);
  return out;
}

bool ConstraintWeights::strictly_positive() const {
  auto pos = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return x > 0.0; });
  };
  return pos(group_a) && pos(group_b);
}

PiecewiseLinearCurve::PiecewiseLinearCurve(std::vector<double> xs, std::vector<double> ys,
                                           std::vector<double> slopes)
    : xs_(std::move(xs)), ys_(std::move(ys)), slopes_(std::move(slopes)) {
  if (xs_.size() < 2 || ys_.size() != xs_.size() || slopes_.size() + 1 != xs_.size()) {
    throw ValidationError("malformed piecewise-linear curve");
  }
  for (size_t i = 1; i < xs_.size(); ++i) {
    if (!(xs_[i] > xs_[i - 1])) {
      throw ValidationError("curve breakpoints must be strictly increasing");
    }
  }
}

PiecewiseLinearCurve PiecewiseLinearCurve::from_weights(const ScoreDistribution& dist,
                                                        std::span<const double> weights,
                                                        double offset) {
  if (static_cast<int>(weights.size()) != dist.size()) {
    throw ValidationError("weight vector does not match the grid");
  }
  std::vector<double> xs{0.0};
  std::vector<double> ys{offset};
  std::vector<double> slopes;
  // Admit scores from the top; zero-mass scores collapse into the breakpoint
  // they share with their neighbours.
  for (int x = dist.size(); x >= 1; --x) {
    const double mass = dist.pmf(x);
    if (mass <= 0.0) continue;
    const double w = weights[static_cast<size_t>(x - 1)];
    const double next_x = dist.tail(x);
    if (next_x <= xs.back()) continue;  // sub-ulp mass, merge into the node
    xs.push_back(next_x);
    ys.push_back(ys.back() + w * (next_x - xs[xs.size() - 2]));
    slopes.push_back(w);
  }
  if (xs.size() == 1) {  // fully degenerate distribution cannot occur, but be safe
    xs.push_back(1.0);
    ys.push_back(offset);
    slopes.push_back(0.0);
  }
  return PiecewiseLinearCurve(std::move(xs), std::move(ys), std::move(slopes));
}

int PiecewiseLinearCurve::segment_of(double x) const {
  if (!(x >= domain_lo() && x <= domain_hi())) {
    throw PreconditionError("curve evaluated outside its domain");
  }
  // Largest k with xs_[k] <= x, clamped to a valid segment index.
  const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
  int k = static_cast<int>(it - xs_.begin()) - 1;
  if (k >= static_cast<int>(slopes_.size())) k = static_cast<int>(slopes_.size()) - 1;
  if (k < 0) k = 0;
  return k;
}

double PiecewiseLinearCurve::value(double x) const {
  const int k = segment_of(x);
  return ys_[static_cast<size_t>(k)] + slopes_[static_cast<size_t>(k)] * (x - xs_[static_cast<size_t>(k)]);
}

double PiecewiseLinearCurve::right_slope(double x) const {
  if (x >= domain_hi()) return slopes_.back();
  const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
  int k = static_cast<int>(it - xs_.begin()) - 1;
  if (k < 0) k = 0;
  return slopes_[static_cast<size_t>(k)];
}

double PiecewiseLinearCurve::left_slope(double x) const {
  if (x <= domain_lo()) return slopes_.front();
  const auto it = std::lower_bound(xs_.begin(), xs_.end(), x);
  int k = static_cast<int>(it - xs_.begin()) - 1;
  if (k < 0) k = 0;
  if (k >= static_cast<int>(slopes_.size())) k = static_cast<int>(slopes_.size()) - 1;
  return slopes_[static_cast<size_t>(k)];
}

bool PiecewiseLinearCurve::is_concave(double tol) const {
  for (size_t i = 1; i < slopes_.size(); ++i) {
    if (slopes_[i] > slopes_[i - 1] + tol) return false;
  }
  return true;
}

PiecewiseLinearCurve::Extremum PiecewiseLinearCurve::maximize(double slope_tol) const {
  if (!is_concave(slope_tol)) {
    throw PreconditionError("maximize requires a concave curve");
  }
  const int n = static_cast<int>(slopes_.size());
  int first_nonpos = n;  // first segment with slope <= tol
  for (int k = 0; k < n; ++k) {
    if (slopes_[static_cast<size_t>(k)] <= slope_tol) {
      first_nonpos = k;
      break;
    }
  }
  int last_nonneg = -1;  // last segment with slope >= -tol
  for (int k = n - 1; k >= 0; --k) {
    if (slopes_[static_cast<size_t>(k)] >= -slope_tol) {
      last_nonneg = k;
      break;
    }
  }
  Extremum out;
  out.lo = xs_[static_cast<size_t>(first_nonpos)];
  out.hi = xs_[static_cast<size_t>(last_nonneg + 1)];
  if (out.hi < out.lo) out.hi = out.lo;  // strict sign change at a single node
  out.value = value(out.lo);
  return out;
}

double PiecewiseLinearCurve::inverse_increasing(double y) const {
  const double lo = ys_.front();
  const double hi = ys_.back();
  if (!(y >= lo - kDerivTol && y <= hi + kDerivTol)) {
    throw PreconditionError("inverse target outside the curve range");
  }
  if (y <= lo) return xs_.front();
  if (y >= hi) return xs_.back();
  // Find the segment whose value range contains y.
  const auto it = std::upper_bound(ys_.begin(), ys_.end(), y);
  int k = static_cast<int>(it - ys_.begin()) - 1;
  if (k >= static_cast<int>(slopes_.size())) k = static_cast<int>(slopes_.size()) - 1;
  if (k < 0) k = 0;
  const double slope = slopes_[static_cast<size_t>(k)];
  if (!(slope > 0.0)) throw PreconditionError("curve is not strictly increasing");
  return xs_[static_cast<size_t>(k)] + (y - ys_[static_cast<size_t>(k)]) / slope;
}

double selection_weight_sum(const ScoreDistribution& dist, std::span<const double> weights,
                            double beta) {
  const ThresholdPolicy tp = inverse_selection_rate(dist, beta);
  double sum = 0.0;
  for (int x = dist.size(); x > tp.cutoff; --x) {
    sum += dist.pmf(x) * weights[static_cast<size_t>(x - 1)];
  }
  if (tp.cutoff <= dist.size()) {
    sum += tp.gamma * dist.pmf(tp.cutoff) * weights[static_cast<size_t>(tp.cutoff - 1)];
  }
  return sum;
}

double group_utility(const GroupSpec& group, const Policy& tau, const UtilityFn& u) {
  const std::vector<double> uv = u.values(group.rho);
  double total = 0.0;
  for (int x = 1; x <= group.dist.size(); ++x) {
    total += group.dist.pmf(x) * tau(x) * uv[static_cast<size_t>(x - 1)];
  }
  return total;
}

double total_utility(const Problem& problem, const Policy& tau_a, const Policy& tau_b,
                     const UtilityFn& u) {
  return problem.group_a.proportion * group_utility(problem.group_a, tau_a, u) +
         problem.group_b.proportion * group_utility(problem.group_b, tau_b, u);
}

double group_outcome(const GroupSpec& group, const Policy& tau, const OutcomeFn& delta,
                     const ScoreGrid& grid) {
  const std::vector<double> dp = delta.selection_values(group.rho, grid);
  const auto& dn = delta.non_selection();
  double total = 0.0;
  for (int x = 1; x <= group.dist.size(); ++x) {
    const double p = group.dist.pmf(x);
    const double t = tau(x);
    total += p * t * dp[static_cast<size_t>(x - 1)];
    if (dn) total += p * (1.0 - t) * (*dn)[static_cast<size_t>(x - 1)];
  }
  return total;
}

double tpr(const GroupSpec& group, const Policy& tau) {
  double selected = 0.0;
  double mass = 0.0;
  for (int x = 1; x <= group.dist.size(); ++x) {
    const double pr = group.dist.pmf(x) * group.rho(x);
    mass += pr;
    selected += pr * tau(x);
  }
  if (!(mass > 0.0)) throw PreconditionError("group has zero success mass");
  return selected / mass;
}

PiecewiseLinearCurve utility_curve(const GroupSpec& group, const UtilityFn& u) {
  return PiecewiseLinearCurve::from_weights(group.dist, u.values(group.rho));
}

PiecewiseLinearCurve outcome_curve(const GroupSpec& group, const OutcomeFn& delta,
                                   const ScoreGrid& grid) {
  std::vector<double> weights = delta.selection_values(group.rho, grid);
  double offset = 0.0;
  if (delta.non_selection()) {
    const auto& dn = *delta.non_selection();
    if (dn.size() != weights.size()) {
      throw ValidationError("non-selection outcome table does not match the grid");
    }
    for (int x = 1; x <= group.dist.size(); ++x) {
      offset += group.dist.pmf(x) * dn[static_cast<size_t>(x - 1)];
      weights[static_cast<size_t>(x - 1)] -= dn[static_cast<size_t>(x - 1)];
    }
  }
  return PiecewiseLinearCurve::from_weights(group.dist, weights, offset);
}

PiecewiseLinearCurve transfer_curve(const GroupSpec& group, std::span<const double> weights) {
  for (double w : weights) {
    if (!(w > 0.0)) throw PreconditionError("transfer map needs strictly positive weights");
  }
  return PiecewiseLinearCurve::from_weights(group.dist, weights);
}

double transfer_T(const GroupSpec& group, std::span<const double> weights, double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw PreconditionError("selection rate outside [0,1]");
  return selection_weight_sum(group.dist, weights, beta);
}

double transfer_T_inverse(const GroupSpec& group, std::span<const double> weights, double t) {
  return transfer_curve(group, weights).inverse_increasing(t);
}

double transfer_G(const GroupSpec& a, const GroupSpec& b, const ConstraintWeights& w,
                  double beta) {
  const double t = transfer_T(a, w.group_a, beta);
  return transfer_T_inverse(b, w.group_b, t);
}

AssumptionCheck check_institution_assumption(const UtilityFn& u, const OutcomeFn& delta,
                                             const SuccessCurve& rho, const ScoreGrid& grid) {
  AssumptionCheck out;
  out.pointwise = assumption_pointwise(u.values(rho), delta.selection_values(rho, grid));
  if (u.is_affine() && delta.is_affine()) {
    const double up = u.profit_on_success();
    const double cp = delta.gain_on_success();
    if (!(up > 0.0 && cp > 0.0)) {
      throw ValidationError("ratio test expects positive success terms");
    }
    out.affine_ratio = u.loss_on_failure() / up < delta.penalty_on_failure() / cp;
  }
  return out;
}

}  // namespace fairsel
