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

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace fairsel {
namespace {

constexpr double kFlatTol = 1e-12;

void require_strictly_increasing(const std::vector<double>& v, const char* what) {
  for (size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] > v[i - 1])) {
      throw PreconditionError(std::string(what) + " must be strictly increasing in the score");
    }
  }
}

void require_ratio_monotone(const std::vector<double>& u, const std::vector<double>& w) {
  for (size_t i = 1; i < u.size(); ++i) {
    if (u[i] / w[i] < u[i - 1] / w[i - 1] - kFlatTol) {
      throw PreconditionError("u(x)/w(x) must be non-decreasing in the score");
    }
  }
}

void require_positive(const std::vector<double>& w) {
  for (double x : w) {
    if (!(x > 0.0)) throw PreconditionError("constraint weights must be strictly positive");
  }
}

std::vector<double> merged_nodes(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Group utility as a function of the constraint value t = <w o pi, tau>.
// Nodes are cumulative weighted tail masses; the slope while score x is being
// admitted is u(x)/w(x).
PiecewiseLinearCurve utility_in_t(const GroupSpec& g, const std::vector<double>& u,
                                  const std::vector<double>& w) {
  std::vector<double> xs{0.0};
  std::vector<double> ys{0.0};
  std::vector<double> slopes;
  for (int x = g.dist.size(); x >= 1; --x) {
    const double mass = g.dist.pmf(x);
    if (mass <= 0.0) continue;
    const double step = w[static_cast<size_t>(x - 1)] * mass;
    const double slope = u[static_cast<size_t>(x - 1)] / w[static_cast<size_t>(x - 1)];
    xs.push_back(xs.back() + step);
    ys.push_back(ys.back() + slope * step);
    slopes.push_back(slope);
  }
  return PiecewiseLinearCurve(std::move(xs), std::move(ys), std::move(slopes));
}

PiecewiseLinearCurve combine_concave(const PiecewiseLinearCurve& fa, double ga,
                                     const PiecewiseLinearCurve& fb, double gb, double hi_cap) {
  std::vector<double> nodes = merged_nodes(fa.xs(), fb.xs());
  std::vector<double> xs;
  for (double x : nodes) {
    if (x < hi_cap) xs.push_back(x);
  }
  xs.push_back(hi_cap);
  std::vector<double> ys{ga * fa.value(xs.front()) + gb * fb.value(xs.front())};
  std::vector<double> slopes;
  for (size_t k = 0; k + 1 < xs.size(); ++k) {
    const double mid = 0.5 * (xs[k] + xs[k + 1]);
    const double slope = ga * fa.right_slope(mid) + gb * fb.right_slope(mid);
    slopes.push_back(slope);
    ys.push_back(ys.back() + slope * (xs[k + 1] - xs[k]));
  }
  return PiecewiseLinearCurve(std::move(xs), std::move(ys), std::move(slopes));
}

double tpr_at_rate(const GroupSpec& g, double rate) {
  double mass = 0.0;
  for (int x = 1; x <= g.dist.size(); ++x) mass += g.dist.pmf(x) * g.rho(x);
  if (!(mass > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return selection_weight_sum(g.dist, g.rho.values(), rate) / mass;
}

GroupSolution make_group_solution(const GroupSpec& g, double lo, double hi,
                                  const PiecewiseLinearCurve& ucurve,
                                  const PiecewiseLinearCurve* ocurve) {
  GroupSolution s;
  s.rate_lo = lo;
  s.rate_hi = hi;
  s.rate = lo;
  s.policy = inverse_selection_rate(g.dist, lo);
  s.utility = ucurve.value(lo);
  if (ocurve != nullptr) s.outcome = ocurve->value(lo);
  s.tpr = tpr_at_rate(g, lo);
  return s;
}

struct GroupContext {
  std::vector<double> u;
  PiecewiseLinearCurve ucurve;
  std::optional<PiecewiseLinearCurve> ocurve;
};

GroupContext make_context(const GroupSpec& g, const UtilityFn& u, const OutcomeFn* delta,
                          const ScoreGrid& grid) {
  GroupContext ctx{u.values(g.rho), utility_curve(g, u), std::nullopt};
  require_strictly_increasing(ctx.u, "utility");
  if (delta != nullptr) ctx.ocurve = outcome_curve(g, *delta, grid);
  return ctx;
}

}  // namespace

SolverResult solve_maxutil(const Problem& problem, const UtilityFn& u, const OutcomeFn* delta) {
  const GroupContext ca = make_context(problem.group_a, u, delta, problem.grid);
  const GroupContext cb = make_context(problem.group_b, u, delta, problem.grid);
  const auto ea = ca.ucurve.maximize();
  const auto eb = cb.ucurve.maximize();
  SolverResult out;
  out.a = make_group_solution(problem.group_a, ea.lo, ea.hi, ca.ucurve,
                              ca.ocurve ? &*ca.ocurve : nullptr);
  out.b = make_group_solution(problem.group_b, eb.lo, eb.hi, cb.ucurve,
                              cb.ocurve ? &*cb.ocurve : nullptr);
  out.total_utility =
      problem.group_a.proportion * out.a.utility + problem.group_b.proportion * out.b.utility;
  return out;
}

SolverResult solve_demparity(const Problem& problem, const UtilityFn& u, const OutcomeFn* delta) {
  const GroupContext ca = make_context(problem.group_a, u, delta, problem.grid);
  const GroupContext cb = make_context(problem.group_b, u, delta, problem.grid);
  const PiecewiseLinearCurve objective = combine_concave(
      ca.ucurve, problem.group_a.proportion, cb.ucurve, problem.group_b.proportion, 1.0);
  const auto ex = objective.maximize();
  SolverResult out;
  out.a = make_group_solution(problem.group_a, ex.lo, ex.hi, ca.ucurve,
                              ca.ocurve ? &*ca.ocurve : nullptr);
  out.b = make_group_solution(problem.group_b, ex.lo, ex.hi, cb.ucurve,
                              cb.ocurve ? &*cb.ocurve : nullptr);
  out.total_utility =
      problem.group_a.proportion * out.a.utility + problem.group_b.proportion * out.b.utility;
  out.constraint_value = ex.lo;
  out.constraint_residual = 0.0;
  return out;
}

SolverResult solve_linear_constraint(const Problem& problem, const UtilityFn& u,
                                     const ConstraintWeights& weights, const OutcomeFn* delta) {
  if (static_cast<int>(weights.group_a.size()) != problem.scores() ||
      static_cast<int>(weights.group_b.size()) != problem.scores()) {
    throw ValidationError("constraint weights do not match the grid");
  }
  require_positive(weights.group_a);
  require_positive(weights.group_b);
  const GroupContext ca = make_context(problem.group_a, u, delta, problem.grid);
  const GroupContext cb = make_context(problem.group_b, u, delta, problem.grid);
  require_ratio_monotone(ca.u, weights.group_a);
  require_ratio_monotone(cb.u, weights.group_b);

  const PiecewiseLinearCurve ut_a = utility_in_t(problem.group_a, ca.u, weights.group_a);
  const PiecewiseLinearCurve ut_b = utility_in_t(problem.group_b, cb.u, weights.group_b);
  const double t_max = std::min(ut_a.domain_hi(), ut_b.domain_hi());
  const PiecewiseLinearCurve objective = combine_concave(
      ut_a, problem.group_a.proportion, ut_b, problem.group_b.proportion, t_max);
  const auto ex = objective.maximize();

  const PiecewiseLinearCurve transfer_a = transfer_curve(problem.group_a, weights.group_a);
  const PiecewiseLinearCurve transfer_b = transfer_curve(problem.group_b, weights.group_b);
  const double beta_a_lo = transfer_a.inverse_increasing(ex.lo);
  const double beta_a_hi = transfer_a.inverse_increasing(ex.hi);
  const double beta_b_lo = transfer_b.inverse_increasing(ex.lo);
  const double beta_b_hi = transfer_b.inverse_increasing(ex.hi);

  SolverResult out;
  out.a = make_group_solution(problem.group_a, beta_a_lo, beta_a_hi, ca.ucurve,
                              ca.ocurve ? &*ca.ocurve : nullptr);
  out.b = make_group_solution(problem.group_b, beta_b_lo, beta_b_hi, cb.ucurve,
                              cb.ocurve ? &*cb.ocurve : nullptr);
  out.total_utility =
      problem.group_a.proportion * out.a.utility + problem.group_b.proportion * out.b.utility;
  out.constraint_value = ex.lo;
  out.constraint_residual =
      std::abs(transfer_T(problem.group_a, weights.group_a, beta_a_lo) -
               transfer_T(problem.group_b, weights.group_b, beta_b_lo));
  return out;
}

SolverResult solve_eqopt(const Problem& problem, const UtilityFn& u, const OutcomeFn* delta) {
  const ConstraintWeights w = ConstraintWeights::equal_opportunity(problem.group_a, problem.group_b);
  SolverResult out = solve_linear_constraint(problem, u, w, delta);
  // Relative-harm diagnostic: constrained rate fell below the group's own
  // unconstrained optimum (the underloan phenomenon).
  const SolverResult mu = solve_maxutil(problem, u, delta);
  if (out.a.rate < mu.a.rate - kFlatTol) out.flags.push_back("relative-harm:A");
  if (out.b.rate < mu.b.rate - kFlatTol) out.flags.push_back("relative-harm:B");
  return out;
}

SolverResult solve_criterion(const Problem& problem, const UtilityFn& u,
                             const FairnessCriterion& criterion, const OutcomeFn* delta) {
  switch (criterion.kind) {
    case CriterionKind::MaxUtil:
      return solve_maxutil(problem, u, delta);
    case CriterionKind::DemParity:
      return solve_demparity(problem, u, delta);
    case CriterionKind::EqOpt:
      return solve_eqopt(problem, u, delta);
    case CriterionKind::LinearConstraint:
      if (!criterion.weights) throw ValidationError("linear criterion needs weights");
      return solve_linear_constraint(problem, u, *criterion.weights, delta);
  }
  throw ValidationError("unknown criterion");
}

SoftPenalty SoftPenalty::user(std::vector<std::pair<double, double>> knots, double lambda) {
  if (knots.size() < 2 || knots.front().first != 0.0 || knots.front().second != 0.0) {
    throw ValidationError("penalty table must start at (0, 0)");
  }
  double prev_slope = 0.0;
  for (size_t i = 1; i < knots.size(); ++i) {
    const double dt = knots[i].first - knots[i - 1].first;
    if (!(dt > 0.0)) throw ValidationError("penalty knots must be strictly increasing");
    const double slope = (knots[i].second - knots[i - 1].second) / dt;
    if (i == 1 && !(slope > 0.0)) {
      throw ValidationError("penalty must be positive away from zero");
    }
    if (slope < prev_slope - kFlatTol) throw ValidationError("penalty table must be convex");
    prev_slope = slope;
  }
  SoftPenalty p;
  p.kind = Kind::UserConvex;
  p.lambda = lambda;
  p.knots = std::move(knots);
  return p;
}

double SoftPenalty::value(double t) const {
  const double a = std::abs(t);
  switch (kind) {
    case Kind::AbsoluteValue:
      return a;
    case Kind::Quadratic:
      return a * a;
    case Kind::UserConvex: {
      for (size_t i = 1; i < knots.size(); ++i) {
        if (a <= knots[i].first) {
          const double w = (a - knots[i - 1].first) / (knots[i].first - knots[i - 1].first);
          return knots[i - 1].second + w * (knots[i].second - knots[i - 1].second);
        }
      }
      const auto& last = knots.back();
      const auto& prev = knots[knots.size() - 2];
      const double slope = (last.second - prev.second) / (last.first - prev.first);
      return last.second + slope * (a - last.first);
    }
  }
  return a;
}

namespace {

struct InnerSolution {
  double value = -std::numeric_limits<double>::infinity();
  double lo = 0.0;
  double hi = 0.0;
};

// Exact maximization of g_a U_a(t) + g_b U_b(t - gap) over the feasible t.
InnerSolution soft_inner(const PiecewiseLinearCurve& ut_a, double ga,
                         const PiecewiseLinearCurve& ut_b, double gb, double gap) {
  const double lo_t = std::max(0.0, gap);
  const double hi_t = std::min(ut_a.domain_hi(), ut_b.domain_hi() + gap);
  InnerSolution best;
  if (hi_t < lo_t) return best;
  std::vector<double> cands{lo_t, hi_t};
  for (double x : ut_a.xs()) {
    if (x > lo_t && x < hi_t) cands.push_back(x);
  }
  for (double x : ut_b.xs()) {
    const double t = x + gap;
    if (t > lo_t && t < hi_t) cands.push_back(t);
  }
  std::sort(cands.begin(), cands.end());
  cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
  auto eval = [&](double t) {
    const double tb = std::clamp(t - gap, 0.0, ut_b.domain_hi());
    return ga * ut_a.value(std::clamp(t, 0.0, ut_a.domain_hi())) + gb * ut_b.value(tb);
  };
  std::vector<double> vals(cands.size());
  for (size_t i = 0; i < cands.size(); ++i) vals[i] = eval(cands[i]);
  size_t arg = 0;
  for (size_t i = 1; i < cands.size(); ++i) {
    if (vals[i] > vals[arg]) arg = i;
  }
  best.value = vals[arg];
  size_t lo_i = arg;
  size_t hi_i = arg;
  while (lo_i > 0 && vals[lo_i - 1] >= best.value - kFlatTol) --lo_i;
  while (hi_i + 1 < cands.size() && vals[hi_i + 1] >= best.value - kFlatTol) ++hi_i;
  best.lo = cands[lo_i];
  best.hi = cands[hi_i];
  return best;
}

}  // namespace

SoftResult solve_soft(const Problem& problem, const UtilityFn& u, const ConstraintWeights& weights,
                      const SoftPenalty& penalty, const OutcomeFn* delta) {
  if (!(penalty.lambda >= 0.0)) throw ValidationError("regularization strength must be >= 0");
  if (static_cast<int>(weights.group_a.size()) != problem.scores() ||
      static_cast<int>(weights.group_b.size()) != problem.scores()) {
    throw ValidationError("constraint weights do not match the grid");
  }
  require_positive(weights.group_a);
  require_positive(weights.group_b);
  const GroupContext ca = make_context(problem.group_a, u, delta, problem.grid);
  const GroupContext cb = make_context(problem.group_b, u, delta, problem.grid);
  require_ratio_monotone(ca.u, weights.group_a);
  require_ratio_monotone(cb.u, weights.group_b);

  const double ga = problem.group_a.proportion;
  const double gb = problem.group_b.proportion;
  const PiecewiseLinearCurve ut_a = utility_in_t(problem.group_a, ca.u, weights.group_a);
  const PiecewiseLinearCurve ut_b = utility_in_t(problem.group_b, cb.u, weights.group_b);
  const PiecewiseLinearCurve transfer_a = transfer_curve(problem.group_a, weights.group_a);
  const PiecewiseLinearCurve transfer_b = transfer_curve(problem.group_b, weights.group_b);

  double gap_lo = 0.0;
  double gap_hi = 0.0;
  double gap_canonical = 0.0;
  double ta_lo = 0.0;
  double ta_hi = 0.0;
  double ta_canonical = 0.0;
  double tb_lo = 0.0;
  double tb_hi = 0.0;
  bool zero_gap_optimal = false;

  if (penalty.lambda == 0.0) {
    const auto ea = ut_a.maximize();
    const auto eb = ut_b.maximize();
    gap_lo = ea.lo - eb.hi;
    gap_hi = ea.hi - eb.lo;
    gap_canonical = ea.lo - eb.lo;
    ta_lo = ea.lo;
    ta_hi = ea.hi;
    ta_canonical = ea.lo;
    tb_lo = eb.lo;
    tb_hi = eb.hi;
    zero_gap_optimal = gap_lo <= 0.0 && gap_hi >= 0.0;
  } else {
    // Candidate gaps: kinks of the partially maximized objective are pairwise
    // differences of the per-group breakpoints, plus the penalty's own kinks.
    std::vector<double> cands;
    cands.reserve(ut_a.xs().size() * ut_b.xs().size() + 8);
    for (double xa : ut_a.xs()) {
      for (double xb : ut_b.xs()) cands.push_back(xa - xb);
    }
    cands.push_back(0.0);
    if (penalty.kind == SoftPenalty::Kind::UserConvex) {
      for (const auto& kn : penalty.knots) {
        cands.push_back(kn.first);
        cands.push_back(-kn.first);
      }
    }
    const double dom_lo = -ut_b.domain_hi();
    const double dom_hi = ut_a.domain_hi();
    std::sort(cands.begin(), cands.end());
    cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
    std::vector<double> clipped;
    for (double d : cands) {
      if (d >= dom_lo && d <= dom_hi) clipped.push_back(d);
    }
    cands.swap(clipped);

    // The penalized objective is concave in the gap, so the discrete peak
    // over the sorted candidates is found by an adjacent-comparison binary
    // search; inner maximizations are memoized and evaluated lazily.
    std::vector<std::optional<InnerSolution>> memo(cands.size());
    auto inner_at = [&](size_t i) -> const InnerSolution& {
      if (!memo[i]) memo[i] = soft_inner(ut_a, ga, ut_b, gb, cands[i]);
      return *memo[i];
    };
    auto value_at = [&](size_t i) {
      return inner_at(i).value - penalty.lambda * penalty.value(cands[i]);
    };
    size_t lo_b = 0;
    size_t hi_b = cands.size() - 1;
    while (lo_b < hi_b) {
      const size_t mid = (lo_b + hi_b) / 2;
      if (value_at(mid) < value_at(mid + 1)) {
        lo_b = mid + 1;
      } else {
        hi_b = mid;
      }
    }
    const size_t arg = lo_b;

    if (penalty.kind == SoftPenalty::Kind::Quadratic) {
      // The true maximizer lies in a segment adjacent to the discrete peak;
      // the partial maximum is linear there, so the vertex is closed-form.
      double best_val = value_at(arg);
      double best_gap = cands[arg];
      auto consider_segment = [&](size_t i) {
        if (i + 1 >= cands.size()) return;
        const double len = cands[i + 1] - cands[i];
        if (!(len > 0.0)) return;
        const double slope = (inner_at(i + 1).value - inner_at(i).value) / len;
        const double vertex = slope / (2.0 * penalty.lambda);
        if (vertex > cands[i] && vertex < cands[i + 1]) {
          const double m = inner_at(i).value + slope * (vertex - cands[i]);
          const double val = m - penalty.lambda * vertex * vertex;
          if (val > best_val) {
            best_val = val;
            best_gap = vertex;
          }
        }
      };
      if (arg > 0) consider_segment(arg - 1);
      consider_segment(arg);
      gap_lo = gap_hi = gap_canonical = best_gap;
      const InnerSolution in = soft_inner(ut_a, ga, ut_b, gb, best_gap);
      ta_lo = in.lo;
      ta_hi = in.hi;
      ta_canonical = in.lo;
      tb_lo = in.lo - best_gap;
      tb_hi = in.hi - best_gap;
      zero_gap_optimal = best_gap == 0.0;
    } else {
      // Piecewise-linear penalty: all kinks sit in the candidate set, so the
      // peak candidate is exact; expand across the flat plateau for the
      // optimal-gap interval.
      const double best = value_at(arg);
      size_t lo_i = arg;
      size_t hi_i = arg;
      while (lo_i > 0 && value_at(lo_i - 1) >= best - kFlatTol) --lo_i;
      while (hi_i + 1 < cands.size() && value_at(hi_i + 1) >= best - kFlatTol) ++hi_i;
      gap_lo = cands[lo_i];
      gap_hi = cands[hi_i];
      zero_gap_optimal = gap_lo <= 0.0 && gap_hi >= 0.0;
      gap_canonical = zero_gap_optimal ? 0.0 : (gap_lo > 0.0 ? gap_lo : gap_hi);
      ta_lo = inner_at(lo_i).lo;
      ta_hi = inner_at(hi_i).hi;
      tb_lo = inner_at(hi_i).lo - cands[hi_i];
      tb_hi = inner_at(lo_i).hi - cands[lo_i];
      const InnerSolution in = soft_inner(ut_a, ga, ut_b, gb, gap_canonical);
      ta_canonical = in.lo;
    }
  }

  SoftResult out;
  out.gap_lo = gap_lo;
  out.gap_hi = gap_hi;
  out.t_a_lo = ta_lo;
  out.t_a_hi = ta_hi;
  out.matches_hard = zero_gap_optimal;

  if (zero_gap_optimal && penalty.lambda > 0.0) {
    out.result = solve_linear_constraint(problem, u, weights, delta);
    out.t_a = *out.result.constraint_value;
    out.t_b = out.t_a;
    out.gap = 0.0;
    return out;
  }

  out.gap = gap_canonical;
  out.t_a = ta_canonical;
  out.t_b = ta_canonical - gap_canonical;
  const double beta_a = transfer_a.inverse_increasing(out.t_a);
  const double beta_b = transfer_b.inverse_increasing(out.t_b);

  SolverResult res;
  res.a = make_group_solution(problem.group_a, beta_a, beta_a, ca.ucurve,
                              ca.ocurve ? &*ca.ocurve : nullptr);
  res.a.rate_lo = transfer_a.inverse_increasing(ta_lo);
  res.a.rate_hi = transfer_a.inverse_increasing(ta_hi);
  res.b = make_group_solution(problem.group_b, beta_b, beta_b, cb.ucurve,
                              cb.ocurve ? &*cb.ocurve : nullptr);
  res.b.rate_lo = transfer_b.inverse_increasing(std::min(tb_lo, out.t_b));
  res.b.rate_hi = transfer_b.inverse_increasing(std::max(tb_hi, out.t_b));
  res.total_utility = ga * res.a.utility + gb * res.b.utility;
  res.constraint_value = out.t_a;
  res.constraint_residual = std::abs(out.gap);
  out.result = std::move(res);
  return out;
}

OutcomeBasedResult solve_outcome_based(const GroupSpec& group, const UtilityFn& u,
                                       const OutcomeFn& delta, const ScoreGrid& grid,
                                       double budget) {
  if (std::isnan(budget) || budget < 0.0) {
    throw ValidationError("utility budget must be non-negative");
  }
  const std::vector<double> uv = u.values(group.rho);
  const std::vector<double> dv = delta.selection_values(group.rho, grid);
  const PiecewiseLinearCurve ucurve = utility_curve(group, u);
  const PiecewiseLinearCurve ocurve = outcome_curve(group, delta, grid);
  const auto mu = ucurve.maximize();
  const auto star = ocurve.maximize();

  OutcomeBasedResult out;
  out.assumption_warning = !assumption_pointwise(uv, dv);
  out.beta_maxutil = mu.lo;
  out.beta_star = star.lo;

  const double target = mu.value - budget;
  double beta_max;
  if (ucurve.value(1.0) >= target) {
    beta_max = 1.0;
  } else {
    // Walk the declining side until utility drops to the budget line.
    beta_max = mu.hi;
    const auto& xs = ucurve.xs();
    const auto& ys = ucurve.ys();
    for (size_t k = 0; k + 1 < xs.size(); ++k) {
      if (xs[k + 1] <= mu.hi) continue;
      if (ys[k + 1] >= target) {
        beta_max = xs[k + 1];
        continue;
      }
      const double slope = ucurve.slopes()[k];
      beta_max = std::max(mu.hi, xs[k] + (target - ys[k]) / slope);
      break;
    }
  }
  out.beta_max = beta_max;
  out.rate = std::min(out.beta_star, out.beta_max);
  out.policy = inverse_selection_rate(group.dist, out.rate);
  out.utility = ucurve.value(out.rate);
  out.outcome = ocurve.value(out.rate);
  return out;
}

}  // namespace fairsel
