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

#include "fairsel/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fairsel {

ScoreGrid ScoreGrid::indexed(int count) {
  if (count < 1) throw ValidationError("score grid needs at least one score");
  ScoreGrid g;
  g.size_ = count;
  return g;
}

ScoreGrid ScoreGrid::labeled(std::vector<double> labels) {
  if (labels.empty()) throw ValidationError("score grid needs at least one score");
  for (size_t i = 1; i < labels.size(); ++i) {
    if (!(labels[i] > labels[i - 1])) {
      throw ValidationError("score labels must be strictly increasing");
    }
  }
  ScoreGrid g;
  g.size_ = static_cast<int>(labels.size());
  g.labels_ = std::move(labels);
  return g;
}

double ScoreGrid::label(int x) const {
  if (x < 1 || x > size_) throw ValidationError("score index out of range");
  return labels_.empty() ? static_cast<double>(x) : labels_[static_cast<size_t>(x - 1)];
}

ScoreDistribution::ScoreDistribution(std::vector<double> pmf) : pmf_(std::move(pmf)) {
  if (pmf_.empty()) throw ValidationError("distribution must cover at least one score");
  double sum = 0.0;
  for (double p : pmf_) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw ValidationError("distribution entries must be finite and non-negative");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kIngestTol) {
    throw ValidationError("distribution mass is off by more than " + std::to_string(kIngestTol));
  }
  if (std::abs(sum - 1.0) > 0.0) {
    renormalized_ = true;
    for (double& p : pmf_) p /= sum;
  }
  tails_.assign(pmf_.size() + 1, 0.0);
  for (int c = static_cast<int>(pmf_.size()); c >= 1; --c) {
    tails_[static_cast<size_t>(c - 1)] =
        tails_[static_cast<size_t>(c)] + pmf_[static_cast<size_t>(c - 1)];
  }
  // The full tail is one by construction; pin it (and the run of equal tails
  // over zero-mass bottom scores) so that breakpoint grids close exactly at
  // beta = 1.
  const double full = tails_[0];
  for (size_t i = 0; i < tails_.size() && tails_[i] == full; ++i) tails_[i] = 1.0;
}

double ScoreDistribution::mean() const {
  double m = 0.0;
  for (int x = 1; x <= size(); ++x) m += x * pmf(x);
  return m;
}

int ScoreDistribution::top_support() const {
  for (int x = size(); x >= 1; --x) {
    if (pmf(x) > 0.0) return x;
  }
  return 0;
}

SuccessCurve::SuccessCurve(std::vector<double> rho) : rho_(std::move(rho)) {
  if (rho_.empty()) throw ValidationError("success curve must cover at least one score");
  for (double r : rho_) {
    if (!(r >= 0.0 && r <= 1.0)) {
      throw ValidationError("success probabilities must lie in [0,1]");
    }
  }
}

bool SuccessCurve::non_decreasing() const {
  for (size_t i = 1; i < rho_.size(); ++i) {
    if (rho_[i] < rho_[i - 1]) return false;
  }
  return true;
}

bool SuccessCurve::strictly_increasing() const {
  for (size_t i = 1; i < rho_.size(); ++i) {
    if (!(rho_[i] > rho_[i - 1])) return false;
  }
  return true;
}

bool SuccessCurve::strictly_positive() const {
  for (double r : rho_) {
    if (!(r > 0.0)) return false;
  }
  return true;
}

bool SuccessCurve::affine_in_score(double tol) const {
  if (rho_.size() <= 2) return true;
  const double step = rho_[1] - rho_[0];
  for (size_t i = 2; i < rho_.size(); ++i) {
    if (std::abs((rho_[i] - rho_[i - 1]) - step) > tol) return false;
  }
  return true;
}

GroupSpec::GroupSpec(ScoreDistribution d, SuccessCurve r, double g)
    : dist(std::move(d)), rho(std::move(r)), proportion(g) {
  if (dist.size() != rho.size()) {
    throw ValidationError("distribution and success curve must share the grid");
  }
  if (!(proportion >= 0.0 && proportion <= 1.0)) {
    throw ValidationError("group proportion must lie in [0,1]");
  }
}

Problem::Problem(ScoreGrid g, GroupSpec a, GroupSpec b)
    : grid(std::move(g)), group_a(std::move(a)), group_b(std::move(b)) {
  if (group_a.dist.size() != grid.size() || group_b.dist.size() != grid.size()) {
    throw ValidationError("group distributions must match the score grid");
  }
  if (std::abs(group_a.proportion + group_b.proportion - 1.0) > kMassTol) {
    throw ValidationError("group proportions must sum to one");
  }
}

Policy::Policy(std::vector<double> t) : tau(std::move(t)) {
  if (tau.empty()) throw ValidationError("policy must cover at least one score");
  for (double v : tau) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw ValidationError("policy entries must lie in [0,1]");
    }
  }
}

double selection_rate(const ScoreDistribution& dist, const Policy& tau) {
  if (tau.size() != dist.size()) throw ValidationError("policy does not match the grid");
  double rate = 0.0;
  for (int x = 1; x <= dist.size(); ++x) rate += dist.pmf(x) * tau(x);
  return rate;
}

double selection_rate(const ScoreDistribution& dist, const ThresholdPolicy& tp) {
  const int c = dist.size();
  if (tp.cutoff < 1 || tp.cutoff > c + 1) throw ValidationError("threshold cutoff out of range");
  if (tp.cutoff == c + 1) return 0.0;
  return dist.tail(tp.cutoff + 1) + tp.gamma * dist.pmf(tp.cutoff);
}

int quantile_upper(const ScoreDistribution& dist, double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw PreconditionError("quantile argument outside [0,1]");
  if (beta >= 1.0) return 1;  // extension: argmax over an empty set
  int lo = 1;
  int hi = dist.size();
  while (lo < hi) {
    const int mid = (lo + hi + 1) / 2;
    if (dist.tail(mid) > beta) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  return lo;
}

int quantile_upper_plus(const ScoreDistribution& dist, double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw PreconditionError("quantile argument outside [0,1]");
  if (beta <= 0.0) return dist.size();  // extension
  int lo = 1;
  int hi = dist.size();
  while (lo < hi) {
    const int mid = (lo + hi + 1) / 2;
    if (dist.tail(mid) >= beta) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  return lo;
}

ThresholdPolicy inverse_selection_rate(const ScoreDistribution& dist, double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw PreconditionError("selection rate outside [0,1]");
  if (beta >= 1.0) return ThresholdPolicy{1, 1.0};
  const int c = quantile_upper(dist, beta);
  const double above = dist.tail(c + 1);
  const double upto = dist.tail(c);
  if (beta <= above) {
    // Exact tail mass: the canonical representative starts one score higher
    // with gamma = 1 (pmf(c) > 0 holds by the choice of c).
    return ThresholdPolicy{c + 1, 1.0};
  }
  return ThresholdPolicy{c, (beta - above) / (upto - above)};
}

bool is_canonical(const ScoreDistribution& dist, const ThresholdPolicy& tp) {
  const int c = dist.size();
  if (tp.cutoff < 1 || tp.cutoff > c + 1) return false;
  if (!(tp.gamma > 0.0 && tp.gamma <= 1.0)) return false;
  if (tp.cutoff == c + 1) return tp.gamma == 1.0;
  if (dist.pmf(tp.cutoff) == 0.0 && tp.gamma != 1.0) return false;
  if (tp.gamma == 1.0 && tp.cutoff > 1 && !(dist.pmf(tp.cutoff - 1) > 0.0)) return false;
  return true;
}

Policy to_policy(const ScoreDistribution& dist, const ThresholdPolicy& tp) {
  const int c = dist.size();
  if (tp.cutoff < 1 || tp.cutoff > c + 1) throw ValidationError("threshold cutoff out of range");
  std::vector<double> tau(static_cast<size_t>(c), 0.0);
  for (int x = 1; x <= c; ++x) {
    if (x > tp.cutoff) {
      tau[static_cast<size_t>(x - 1)] = 1.0;
    } else if (x == tp.cutoff) {
      tau[static_cast<size_t>(x - 1)] = tp.gamma;
    }
  }
  return Policy(std::move(tau));
}

bool policies_equivalent(const ScoreDistribution& dist, const Policy& a, const Policy& b) {
  if (a.size() != dist.size() || b.size() != dist.size()) {
    throw ValidationError("policy does not match the grid");
  }
  for (int x = 1; x <= dist.size(); ++x) {
    if (a(x) != b(x) && dist.pmf(x) > 0.0) return false;
  }
  return true;
}

bool cdf_dominates(const ScoreDistribution& a, const ScoreDistribution& b, TailOrder order) {
  if (a.size() != b.size()) throw ValidationError("distributions must share the grid");
  for (int c = 2; c <= a.size(); ++c) {
    const double ta = a.tail(c);
    const double tb = b.tail(c);
    if (order == TailOrder::Weak) {
      if (ta > tb + kDerivTol) return false;
    } else {
      if (ta == tb && (ta == 0.0 || ta == 1.0)) continue;  // degenerate tails
      if (!(ta < tb)) return false;
    }
  }
  return true;
}

bool assumption_pointwise(const std::vector<double>& u, const std::vector<double>& delta) {
  if (u.size() != delta.size()) throw ValidationError("utility and outcome grids differ");
  for (size_t i = 0; i < u.size(); ++i) {
    if (u[i] > 0.0 && !(delta[i] > 0.0)) return false;
  }
  return true;
}

}  // namespace fairsel
