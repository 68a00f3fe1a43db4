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

#ifndef FAIRSEL_IO_HPP_
#define FAIRSEL_IO_HPP_

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fairsel/analysis.hpp"
#include "fairsel/oracle.hpp"

namespace fairsel {

// One CSV schema feeds the whole pipeline:
//   score,group,pmf,repay_prob
// with one row per (score, group), scores forming the same equally spaced
// ascending grid in both groups.
struct IngestedGroups {
  ScoreGrid grid;
  std::string name_a;
  std::string name_b;
  ScoreDistribution dist_a;
  ScoreDistribution dist_b;
  SuccessCurve rho_a;
  SuccessCurve rho_b;
  std::vector<std::string> warnings;
};

IngestedGroups ingest_distribution_csv(const std::filesystem::path& path);

struct SoftSpec {
  SoftPenalty::Kind kind = SoftPenalty::Kind::AbsoluteValue;
  std::vector<std::pair<double, double>> knots;
  std::vector<double> lambdas;        // single value or a grid
  bool eqopt_weights = false;
};

struct SweepConfig {
  SweepParameter parameter = SweepParameter::GroupProportion;
  std::vector<double> grid;
  SoftPenalty::Kind penalty_kind = SoftPenalty::Kind::AbsoluteValue;
  bool soft_eqopt_weights = false;
};

struct ProblemConfig {
  std::filesystem::path base_dir;

  std::optional<std::string> csv_path;
  std::optional<std::vector<double>> labels;
  std::optional<std::vector<double>> pmf_a, pmf_b, rho_a, rho_b;
  double g_a = 0.5;

  std::optional<std::pair<double, double>> utility_affine;  // (u_plus, u_minus)
  std::optional<std::vector<double>> utility_table;

  std::optional<std::pair<double, double>> outcome_affine;  // (c_plus, c_minus)
  bool outcome_clamp = false;
  std::optional<std::vector<double>> outcome_table;
  std::optional<std::vector<double>> delta_n;

  std::vector<std::string> criteria;
  std::optional<std::vector<double>> linear_weights_shared;
  std::optional<std::vector<double>> linear_weights_a;
  std::optional<std::vector<double>> linear_weights_b;
  std::optional<SoftSpec> soft;
  std::optional<double> outcome_budget;
  std::optional<SweepConfig> sweep;
};

ProblemConfig load_config(const std::filesystem::path& path);

struct BuiltProblem {
  Problem problem;
  UtilityFn utility;
  std::optional<OutcomeFn> outcome;
  std::string name_a;
  std::string name_b;
  std::vector<std::string> warnings;
};

BuiltProblem build_problem(const ProblemConfig& cfg);

// Plot-ready series: exact curve breakpoints, one series per (kind, group).
struct PlotSeries {
  std::string name;   // "outcome" or "utility"
  std::string group;
  std::vector<double> x;  // sorted selection rates
  std::vector<double> y;
};

std::vector<PlotSeries> plot_series(const BuiltProblem& built);

// Fixed 17-significant-digit float formatting for machine outputs.
std::string fmt17(double v);

// Command runners; return process exit codes (0 ok, 1 verification failure).
// Validation and precondition errors propagate as exceptions.
int run_solve(const ProblemConfig& cfg, const std::filesystem::path& out_dir, std::ostream& os);
int run_curve(const ProblemConfig& cfg, const std::filesystem::path& out_dir, std::ostream& os);
int run_sweep(const ProblemConfig& cfg, const std::filesystem::path& out_dir, std::ostream& os);
int run_verify(const ProblemConfig& cfg, std::uint64_t seed, double corrupt_utility,
               std::ostream& os);
int run_ingest_check(const ProblemConfig& cfg, const std::filesystem::path& out_dir,
                     std::ostream& os);

}  // namespace fairsel

#endif  // FAIRSEL_IO_HPP_
