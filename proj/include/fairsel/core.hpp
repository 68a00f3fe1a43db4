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

#ifndef FAIRSEL_CORE_HPP_
#define FAIRSEL_CORE_HPP_

#include <optional>
#include <vector>

#include "fairsel/common.hpp"

namespace fairsel {

// Finite ordered score grid x in {1..C}. Labels are presentation only (e.g.
// FICO 300..850 mapped affinely onto the indices); all internal computation
// uses the indices.
class ScoreGrid {
 public:
  static ScoreGrid indexed(int count);
  static ScoreGrid labeled(std::vector<double> labels);

  int size() const { return size_; }
  double label(int x) const;  // x in [1..C]
  bool has_labels() const { return !labels_.empty(); }

 private:
  int size_ = 0;
  std::vector<double> labels_;  // empty means label(x) == x
};

// Probability mass over a score grid. Entries are validated non-negative and
// renormalized when the total is within kIngestTol of one; anything further
// off is rejected. Upper-tail sums are precomputed once; every quantile,
// threshold and curve computation reads the same tails so breakpoint
// arithmetic stays self-consistent.
class ScoreDistribution {
 public:
  explicit ScoreDistribution(std::vector<double> pmf);

  int size() const { return static_cast<int>(pmf_.size()); }
  double pmf(int x) const { return pmf_[static_cast<size_t>(x - 1)]; }
  // tail(c) = sum_{x >= c} pmf(x), valid for c in [1..C+1]; tail(1) == 1.
  double tail(int c) const { return tails_[static_cast<size_t>(c - 1)]; }
  const std::vector<double>& pmf_vector() const { return pmf_; }
  double mean() const;          // in index units
  int top_support() const;      // largest x with pmf(x) > 0
  bool renormalized() const { return renormalized_; }

 private:
  std::vector<double> pmf_;
  std::vector<double> tails_;  // size C+1, tails_[c-1] = tail(c)
  bool renormalized_ = false;
};

// Per-score success probability rho(x) in [0,1].
class SuccessCurve {
 public:
  explicit SuccessCurve(std::vector<double> rho);

  int size() const { return static_cast<int>(rho_.size()); }
  double operator()(int x) const { return rho_[static_cast<size_t>(x - 1)]; }
  const std::vector<double>& values() const { return rho_; }
  bool non_decreasing() const;
  bool strictly_increasing() const;
  bool strictly_positive() const;
  // Affine in the score index, up to tolerance on second differences.
  bool affine_in_score(double tol = 1e-9) const;

 private:
  std::vector<double> rho_;
};

struct GroupSpec {
  ScoreDistribution dist;
  SuccessCurve rho;
  double proportion = 0.0;  // g_j

  GroupSpec(ScoreDistribution d, SuccessCurve r, double g);
};

// Two-group problem; proportions must sum to one and grids must agree.
struct Problem {
  ScoreGrid grid;
  GroupSpec group_a;
  GroupSpec group_b;

  Problem(ScoreGrid grid, GroupSpec a, GroupSpec b);
  int scores() const { return grid.size(); }
};

// Arbitrary selection policy: selection probability per score.
struct Policy {
  std::vector<double> tau;

  explicit Policy(std::vector<double> t);
  int size() const { return static_cast<int>(tau.size()); }
  double operator()(int x) const { return tau[static_cast<size_t>(x - 1)]; }
};

// Canonical randomized threshold: select everyone above `cutoff`, a fraction
// `gamma` at it, nobody below. cutoff == C+1 with gamma == 1 encodes the
// empty policy (threshold above the whole grid), which is the one selection
// rate (beta = 0 on a full-support distribution) the (c, gamma) form cannot
// otherwise reach.
struct ThresholdPolicy {
  int cutoff = 1;
  double gamma = 1.0;
};

double selection_rate(const ScoreDistribution& dist, const Policy& tau);
double selection_rate(const ScoreDistribution& dist, const ThresholdPolicy& tp);

// Upper quantile functions. Q(beta) = max{c : tail(c) > beta} is continuous
// from the right, Qplus(beta) = max{c : tail(c) >= beta} from the left.
// Domain extensions: Q(1) = 1 and Qplus(0) = C, so that the derivative
// formulas extend to the closed interval [0,1].
int quantile_upper(const ScoreDistribution& dist, double beta);
int quantile_upper_plus(const ScoreDistribution& dist, double beta);

// Canonical threshold policy with selection rate exactly beta. Canonical form:
// gamma = 1 whenever pmf(cutoff) = 0, and pmf(cutoff-1) > 0 whenever gamma = 1
// with cutoff > 1.
ThresholdPolicy inverse_selection_rate(const ScoreDistribution& dist, double beta);
bool is_canonical(const ScoreDistribution& dist, const ThresholdPolicy& tp);
Policy to_policy(const ScoreDistribution& dist, const ThresholdPolicy& tp);

// True iff the scores on which the two policies differ carry zero mass.
bool policies_equivalent(const ScoreDistribution& dist, const Policy& a, const Policy& b);

enum class TailOrder { Strict, Weak };

// Upper-tail (CDF) domination: every nontrivial upper tail of `a` is below the
// matching tail of `b`. Strict mode skips positions where both tails are the
// degenerate 0 or 1; weak mode allows ties everywhere.
bool cdf_dominates(const ScoreDistribution& a, const ScoreDistribution& b,
                   TailOrder order = TailOrder::Strict);

// Pointwise form of the institution-stringency assumption:
// u(x) > 0 implies delta(x) > 0 for every score.
bool assumption_pointwise(const std::vector<double>& u, const std::vector<double>& delta);

}  // namespace fairsel

#endif  // FAIRSEL_CORE_HPP_
