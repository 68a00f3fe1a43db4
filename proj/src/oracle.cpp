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

#include "fairsel/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

namespace fairsel {
namespace {

long long policy_count(int scores, int k) {
  long long n = 1;
  for (int i = 0; i < scores; ++i) {
    n *= k + 1;
    if (n > 4'000'000LL) return -1;
  }
  return n;
}

std::vector<double> decode_policy(long long idx, int scores, int k) {
  std::vector<double> tau(static_cast<size_t>(scores));
  for (int x = 0; x < scores; ++x) {
    tau[static_cast<size_t>(x)] = static_cast<double>(idx % (k + 1)) / k;
    idx /= k + 1;
  }
  return tau;
}

struct EnumeratedGroup {
  std::vector<double> constraint;  // per policy index
  std::vector<double> util;
};

EnumeratedGroup enumerate_group(const GroupSpec& g, const std::vector<double>& u,
                                const std::vector<double>* w, int k, long long n) {
  const int scores = g.dist.size();
  EnumeratedGroup out;
  out.constraint.assign(static_cast<size_t>(n), 0.0);
  out.util.assign(static_cast<size_t>(n), 0.0);
  // Incremental odometer walk: maintain running sums instead of re-evaluating
  // every policy from scratch.
  std::vector<int> digits(static_cast<size_t>(scores), 0);
  double t = 0.0;
  double util = 0.0;
  std::vector<double> tw(static_cast<size_t>(scores));
  std::vector<double> uw(static_cast<size_t>(scores));
  for (int x = 0; x < scores; ++x) {
    const double mass = g.dist.pmf(x + 1);
    tw[static_cast<size_t>(x)] = (w != nullptr ? (*w)[static_cast<size_t>(x)] : 1.0) * mass / k;
    uw[static_cast<size_t>(x)] = u[static_cast<size_t>(x)] * mass / k;
  }
  for (long long idx = 0;; ++idx) {
    out.constraint[static_cast<size_t>(idx)] = t;
    out.util[static_cast<size_t>(idx)] = util;
    if (idx + 1 >= n) break;
    int x = 0;
    while (digits[static_cast<size_t>(x)] == k) {
      t -= k * tw[static_cast<size_t>(x)];
      util -= k * uw[static_cast<size_t>(x)];
      digits[static_cast<size_t>(x)] = 0;
      ++x;
    }
    digits[static_cast<size_t>(x)] += 1;
    t += tw[static_cast<size_t>(x)];
    util += uw[static_cast<size_t>(x)];
  }
  return out;
}

const std::vector<double>* criterion_weights(const FairnessCriterion& criterion,
                                             const ConstraintWeights& eqopt, bool group_a) {
  switch (criterion.kind) {
    case CriterionKind::MaxUtil:
    case CriterionKind::DemParity:
      return nullptr;  // unit weights
    case CriterionKind::EqOpt:
      return group_a ? &eqopt.group_a : &eqopt.group_b;
    case CriterionKind::LinearConstraint:
      return group_a ? &criterion.weights->group_a : &criterion.weights->group_b;
  }
  return nullptr;
}

}  // namespace

OracleOutcome oracle_constrained_opt(const Problem& problem, const UtilityFn& u,
                                     const FairnessCriterion& criterion,
                                     const OracleConfig& cfg) {
  const int scores = problem.scores();
  if (scores > cfg.max_grid) throw ValidationError("instance too large for exhaustive oracle");
  const long long n = policy_count(scores, cfg.k);
  if (n < 0) throw ValidationError("instance too large for exhaustive oracle");
  if (criterion.kind == CriterionKind::LinearConstraint && !criterion.weights) {
    throw ValidationError("linear criterion needs weights");
  }

  ConstraintWeights eqopt_w = ConstraintWeights::demographic_parity(scores);
  if (criterion.kind == CriterionKind::EqOpt) {
    eqopt_w = ConstraintWeights::equal_opportunity(problem.group_a, problem.group_b);
  }
  const std::vector<double> ua = u.values(problem.group_a.rho);
  const std::vector<double> ub = u.values(problem.group_b.rho);
  const EnumeratedGroup ea = enumerate_group(
      problem.group_a, ua, criterion_weights(criterion, eqopt_w, true), cfg.k, n);
  const EnumeratedGroup eb = enumerate_group(
      problem.group_b, ub, criterion_weights(criterion, eqopt_w, false), cfg.k, n);
  const double ga = problem.group_a.proportion;
  const double gb = problem.group_b.proportion;

  OracleOutcome out;
  if (criterion.kind == CriterionKind::MaxUtil) {
    long long best_a = 0;
    long long best_b = 0;
    for (long long i = 1; i < n; ++i) {
      if (ea.util[static_cast<size_t>(i)] > ea.util[static_cast<size_t>(best_a)]) best_a = i;
      if (eb.util[static_cast<size_t>(i)] > eb.util[static_cast<size_t>(best_b)]) best_b = i;
    }
    out.found = true;
    out.objective = ga * ea.util[static_cast<size_t>(best_a)] +
                    gb * eb.util[static_cast<size_t>(best_b)];
    out.tau_a = Policy(decode_policy(best_a, scores, cfg.k));
    out.tau_b = Policy(decode_policy(best_b, scores, cfg.k));
    out.constraint_residual = 0.0;
    return out;
  }

  // Equality constraint: scan A's policies in constraint order while keeping
  // a max-utility window over B's policies whose constraint value is within
  // tolerance.
  std::vector<long long> order_a(static_cast<size_t>(n));
  std::vector<long long> order_b(static_cast<size_t>(n));
  std::iota(order_a.begin(), order_a.end(), 0LL);
  std::iota(order_b.begin(), order_b.end(), 0LL);
  std::sort(order_a.begin(), order_a.end(), [&](long long x, long long y) {
    return ea.constraint[static_cast<size_t>(x)] < ea.constraint[static_cast<size_t>(y)];
  });
  std::sort(order_b.begin(), order_b.end(), [&](long long x, long long y) {
    return eb.constraint[static_cast<size_t>(x)] < eb.constraint[static_cast<size_t>(y)];
  });

  double best = -std::numeric_limits<double>::infinity();
  long long best_a = -1;
  long long best_b = -1;
  size_t lo = 0;
  size_t hi = 0;
  std::deque<size_t> window;  // indices into order_b, utilities decreasing
  for (long long ia : order_a) {
    const double t = ea.constraint[static_cast<size_t>(ia)];
    while (hi < order_b.size() &&
           eb.constraint[static_cast<size_t>(order_b[hi])] <= t + cfg.constraint_tol) {
      const double util_new = eb.util[static_cast<size_t>(order_b[hi])];
      while (!window.empty() && eb.util[static_cast<size_t>(order_b[window.back()])] <= util_new) {
        window.pop_back();
      }
      window.push_back(hi);
      ++hi;
    }
    while (lo < hi && eb.constraint[static_cast<size_t>(order_b[lo])] < t - cfg.constraint_tol) {
      if (!window.empty() && window.front() == lo) window.pop_front();
      ++lo;
    }
    if (window.empty()) continue;
    const long long ib = order_b[window.front()];
    const double value = ga * ea.util[static_cast<size_t>(ia)] +
                         gb * eb.util[static_cast<size_t>(ib)];
    if (value > best) {
      best = value;
      best_a = ia;
      best_b = ib;
    }
  }
  if (best_a < 0) return out;
  out.found = true;
  out.objective = best;
  out.tau_a = Policy(decode_policy(best_a, scores, cfg.k));
  out.tau_b = Policy(decode_policy(best_b, scores, cfg.k));
  out.constraint_residual = std::abs(ea.constraint[static_cast<size_t>(best_a)] -
                                     eb.constraint[static_cast<size_t>(best_b)]);
  return out;
}

bool oracle_optimum_attained_by_thresholds(const Problem& problem, const UtilityFn& u,
                                           const FairnessCriterion& criterion,
                                           const OracleConfig& cfg, double oracle_objective,
                                           double value_tol) {
  const int scores = problem.scores();
  ConstraintWeights eqopt_w = ConstraintWeights::demographic_parity(scores);
  if (criterion.kind == CriterionKind::EqOpt) {
    eqopt_w = ConstraintWeights::equal_opportunity(problem.group_a, problem.group_b);
  }
  const std::vector<double> ua = u.values(problem.group_a.rho);
  const std::vector<double> ub = u.values(problem.group_b.rho);

  struct Candidate {
    double t;
    double util;
  };
  auto thresholds = [&](const GroupSpec& g, const std::vector<double>& uv,
                        const std::vector<double>* w) {
    std::vector<Candidate> cs;
    cs.push_back({0.0, 0.0});  // select nobody
    for (int c = 1; c <= scores; ++c) {
      for (int step = 1; step <= cfg.k; ++step) {
        const double gamma = static_cast<double>(step) / cfg.k;
        double t = 0.0;
        double util = 0.0;
        for (int x = c; x <= scores; ++x) {
          const double sel = (x == c) ? gamma : 1.0;
          const double mass = g.dist.pmf(x) * sel;
          t += (w != nullptr ? (*w)[static_cast<size_t>(x - 1)] : 1.0) * mass;
          util += uv[static_cast<size_t>(x - 1)] * mass;
        }
        cs.push_back({t, util});
      }
    }
    return cs;
  };
  const auto cs_a =
      thresholds(problem.group_a, ua, criterion_weights(criterion, eqopt_w, true));
  const auto cs_b =
      thresholds(problem.group_b, ub, criterion_weights(criterion, eqopt_w, false));
  const double ga = problem.group_a.proportion;
  const double gb = problem.group_b.proportion;
  const bool constrained = criterion.kind != CriterionKind::MaxUtil;
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& a : cs_a) {
    for (const auto& b : cs_b) {
      if (constrained && std::abs(a.t - b.t) > cfg.constraint_tol) continue;
      best = std::max(best, ga * a.util + gb * b.util);
    }
  }
  return best >= oracle_objective - value_tol;
}

bool verify_threshold_dominance(const GroupSpec& group, const Policy& tau,
                                const std::vector<double>& u, const std::vector<double>& delta) {
  const double rate = selection_rate(group.dist, tau);
  const Policy rounded = to_policy(group.dist, inverse_selection_rate(group.dist, rate));
  auto weighted = [&](const Policy& p, const std::vector<double>& w) {
    double s = 0.0;
    for (int x = 1; x <= group.dist.size(); ++x) {
      s += group.dist.pmf(x) * p(x) * w[static_cast<size_t>(x - 1)];
    }
    return s;
  };
  const double du = weighted(rounded, u) - weighted(tau, u);
  const double dd = weighted(rounded, delta) - weighted(tau, delta);
  // Mass-weighted policy distance; rounding noise on gamma keeps genuinely
  // equivalent policies within ulps, so anything below 1e-9 is the equality
  // branch.
  double moved = 0.0;
  for (int x = 1; x <= group.dist.size(); ++x) {
    moved += group.dist.pmf(x) * std::abs(rounded(x) - tau(x));
  }
  if (moved <= 1e-9) return std::abs(du) <= 1e-9 && std::abs(dd) <= 1e-9;
  return du > 0.0 && dd > 0.0;
}

bool verify_curve_concavity(const PiecewiseLinearCurve& curve) { return curve.is_concave(); }

bool verify_solver_against_oracle(const SolverResult& result, const OracleOutcome& oracle,
                                  double tolerance) {
  if (!oracle.found) return false;
  if (result.total_utility < oracle.objective - tolerance) return false;
  return result.constraint_residual.value_or(0.0) <= kDerivTol;
}

}  // namespace fairsel
