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

#include "fairsel/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include "json.hpp"

namespace fairsel {

using nlohmann::json;

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos != s.size()) throw ValidationError("trailing characters in " + what + ": " + s);
    return v;
  } catch (const std::invalid_argument&) {
    throw ValidationError("cannot parse " + what + ": " + s);
  } catch (const std::out_of_range&) {
    throw ValidationError("out-of-range " + what + ": " + s);
  }
}

std::string trim(const std::string& s) {
  size_t a = 0;
  size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

}  // namespace

IngestedGroups ingest_distribution_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("empty file: " + path.string());
  if (trim(line) != "score,group,pmf,repay_prob") {
    throw ValidationError("expected header score,group,pmf,repay_prob in " + path.string());
  }

  struct Row {
    double score;
    double pmf;
    double repay;
  };
  std::vector<std::string> group_order;
  std::map<std::string, std::vector<Row>> rows;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 4) {
      throw ValidationError("line " + std::to_string(line_no) + ": expected 4 fields");
    }
    Row r{parse_double(trim(fields[0]), "score"), parse_double(trim(fields[2]), "pmf"),
          parse_double(trim(fields[3]), "repay_prob")};
    const std::string group = trim(fields[1]);
    if (group.empty()) throw ValidationError("line " + std::to_string(line_no) + ": empty group");
    if (!(r.repay >= 0.0 && r.repay <= 1.0)) {
      throw ValidationError("line " + std::to_string(line_no) + ": repay_prob outside [0,1]");
    }
    if (rows.find(group) == rows.end()) group_order.push_back(group);
    rows[group].push_back(r);
  }
  if (group_order.size() != 2) {
    throw ValidationError("expected exactly two groups, found " +
                          std::to_string(group_order.size()));
  }

  auto check_scores = [&](const std::vector<Row>& rs) {
    for (size_t i = 1; i < rs.size(); ++i) {
      if (!(rs[i].score > rs[i - 1].score)) {
        throw ValidationError("scores must be strictly ascending per group");
      }
    }
    if (rs.size() >= 3) {
      const double step = rs[1].score - rs[0].score;
      for (size_t i = 2; i < rs.size(); ++i) {
        if (std::abs((rs[i].score - rs[i - 1].score) - step) > 1e-9 * std::max(1.0, step)) {
          throw ValidationError("missing score: grid must be equally spaced");
        }
      }
    }
  };
  const auto& ra = rows[group_order[0]];
  const auto& rb = rows[group_order[1]];
  check_scores(ra);
  check_scores(rb);
  if (ra.size() != rb.size()) throw ValidationError("missing score: group grids differ in size");
  for (size_t i = 0; i < ra.size(); ++i) {
    if (ra[i].score != rb[i].score) {
      throw ValidationError("missing score: group grids disagree at position " +
                            std::to_string(i + 1));
    }
  }

  std::vector<double> labels;
  std::vector<double> pmf_a, pmf_b, rho_a, rho_b;
  for (const Row& r : ra) {
    labels.push_back(r.score);
    pmf_a.push_back(r.pmf);
    rho_a.push_back(r.repay);
  }
  for (const Row& r : rb) {
    pmf_b.push_back(r.pmf);
    rho_b.push_back(r.repay);
  }

  std::vector<std::string> warnings;
  auto mass_warning = [&](const std::vector<double>& pmf, const std::string& name) {
    double sum = 0.0;
    for (double p : pmf) sum += p;
    if (std::abs(sum - 1.0) > kMassTol && std::abs(sum - 1.0) <= kIngestTol) {
      warnings.push_back("group " + name + " mass " + fmt17(sum) + " renormalized");
    }
  };
  mass_warning(pmf_a, group_order[0]);
  mass_warning(pmf_b, group_order[1]);

  // Validate every piece before assembling the aggregate.
  ScoreDistribution dist_a(std::move(pmf_a));
  ScoreDistribution dist_b(std::move(pmf_b));
  SuccessCurve curve_a(std::move(rho_a));
  SuccessCurve curve_b(std::move(rho_b));
  return IngestedGroups{ScoreGrid::labeled(labels),
                        group_order[0],
                        group_order[1],
                        std::move(dist_a),
                        std::move(dist_b),
                        std::move(curve_a),
                        std::move(curve_b),
                        std::move(warnings)};
}

namespace {

std::vector<double> as_vector(const json& j, const std::string& what) {
  if (!j.is_array()) throw ValidationError(what + " must be an array");
  std::vector<double> out;
  for (const auto& v : j) out.push_back(v.get<double>());
  return out;
}

SoftPenalty::Kind parse_penalty_kind(const std::string& s) {
  if (s == "abs" || s == "absolute" || s == "absolute-value") {
    return SoftPenalty::Kind::AbsoluteValue;
  }
  if (s == "quadratic") return SoftPenalty::Kind::Quadratic;
  if (s == "table" || s == "user") return SoftPenalty::Kind::UserConvex;
  throw ValidationError("unknown penalty kind: " + s);
}

}  // namespace

ProblemConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError("config parse error: " + std::string(e.what()));
  }

  ProblemConfig cfg;
  cfg.base_dir = path.parent_path();
  try {
    if (j.contains("grid") && j["grid"].contains("labels")) {
      cfg.labels = as_vector(j["grid"]["labels"], "grid.labels");
    }
    if (!j.contains("groups")) throw ValidationError("config needs a groups section");
    const json& g = j["groups"];
    if (g.contains("csv")) cfg.csv_path = g["csv"].get<std::string>();
    if (g.contains("a")) {
      cfg.pmf_a = as_vector(g["a"]["pmf"], "groups.a.pmf");
      cfg.rho_a = as_vector(g["a"]["rho"], "groups.a.rho");
    }
    if (g.contains("b")) {
      cfg.pmf_b = as_vector(g["b"]["pmf"], "groups.b.pmf");
      cfg.rho_b = as_vector(g["b"]["rho"], "groups.b.rho");
    }
    if (!g.contains("g_a")) throw ValidationError("groups.g_a is required");
    cfg.g_a = g["g_a"].get<double>();

    if (!j.contains("utility")) throw ValidationError("config needs a utility section");
    const json& u = j["utility"];
    if (u.contains("table")) {
      cfg.utility_table = as_vector(u["table"], "utility.table");
    } else {
      cfg.utility_affine = {u.at("u_plus").get<double>(), u.at("u_minus").get<double>()};
    }

    if (j.contains("outcome")) {
      const json& o = j["outcome"];
      if (o.contains("table")) {
        cfg.outcome_table = as_vector(o["table"], "outcome.table");
      } else {
        cfg.outcome_affine = {o.at("c_plus").get<double>(), o.at("c_minus").get<double>()};
        if (o.contains("clamp")) cfg.outcome_clamp = o["clamp"].get<bool>();
      }
      if (o.contains("delta_n")) cfg.delta_n = as_vector(o["delta_n"], "outcome.delta_n");
    }

    if (j.contains("criteria")) {
      for (const auto& c : j["criteria"]) cfg.criteria.push_back(c.get<std::string>());
    }
    if (j.contains("linear_weights")) {
      const json& w = j["linear_weights"];
      if (w.contains("shared")) {
        cfg.linear_weights_shared = as_vector(w["shared"], "linear_weights.shared");
      } else {
        cfg.linear_weights_a = as_vector(w.at("a"), "linear_weights.a");
        cfg.linear_weights_b = as_vector(w.at("b"), "linear_weights.b");
      }
    }
    if (j.contains("soft")) {
      const json& s = j["soft"];
      SoftSpec spec;
      if (s.contains("penalty")) spec.kind = parse_penalty_kind(s["penalty"].get<std::string>());
      if (s.contains("knots")) {
        for (const auto& kn : s["knots"]) {
          spec.knots.emplace_back(kn.at(0).get<double>(), kn.at(1).get<double>());
        }
      }
      if (s.contains("lambda")) {
        spec.lambdas.push_back(s["lambda"].get<double>());
      } else if (s.contains("lambdas")) {
        spec.lambdas = as_vector(s["lambdas"], "soft.lambdas");
      }
      if (s.contains("weights")) {
        const std::string w = s["weights"].get<std::string>();
        if (w == "eqopt") {
          spec.eqopt_weights = true;
        } else if (w != "demparity") {
          throw ValidationError("soft.weights must be demparity or eqopt");
        }
      }
      cfg.soft = std::move(spec);
    }
    if (j.contains("outcome_budget")) {
      const json& b = j["outcome_budget"];
      if (b.is_string()) {
        const std::string s = b.get<std::string>();
        if (s != "inf" && s != "infinity") {
          throw ValidationError("outcome_budget must be a number or \"inf\"");
        }
        cfg.outcome_budget = std::numeric_limits<double>::infinity();
      } else {
        cfg.outcome_budget = b.get<double>();
      }
    }
    if (j.contains("sweep")) {
      const json& s = j["sweep"];
      SweepConfig sw;
      const std::string p = s.at("parameter").get<std::string>();
      if (p == "g_a") {
        sw.parameter = SweepParameter::GroupProportion;
      } else if (p == "lambda") {
        sw.parameter = SweepParameter::Lambda;
      } else if (p == "u_ratio") {
        sw.parameter = SweepParameter::UtilityRatio;
      } else {
        throw ValidationError("sweep.parameter must be g_a, lambda or u_ratio");
      }
      sw.grid = as_vector(s.at("grid"), "sweep.grid");
      if (s.contains("penalty")) {
        sw.penalty_kind = parse_penalty_kind(s["penalty"].get<std::string>());
      }
      if (s.contains("weights")) sw.soft_eqopt_weights = s["weights"].get<std::string>() == "eqopt";
      cfg.sweep = std::move(sw);
    }
  } catch (const json::exception& e) {
    throw ValidationError("config error: " + std::string(e.what()));
  }
  return cfg;
}

BuiltProblem build_problem(const ProblemConfig& cfg) {
  std::vector<std::string> warnings;
  std::optional<IngestedGroups> ingested;
  if (cfg.csv_path) {
    std::filesystem::path p = *cfg.csv_path;
    if (p.is_relative()) p = cfg.base_dir / p;
    ingested = ingest_distribution_csv(p);
    warnings = ingested->warnings;
    if (cfg.labels) throw ValidationError("grid labels come from the csv; remove grid.labels");
  } else {
    if (!cfg.pmf_a || !cfg.pmf_b || !cfg.rho_a || !cfg.rho_b) {
      throw ValidationError("groups need either a csv or inline a/b tables");
    }
  }

  auto make = [&]() -> BuiltProblem {
    if (ingested) {
      GroupSpec a(ingested->dist_a, ingested->rho_a, cfg.g_a);
      GroupSpec b(ingested->dist_b, ingested->rho_b, 1.0 - cfg.g_a);
      Problem problem(ingested->grid, std::move(a), std::move(b));
      return BuiltProblem{std::move(problem), UtilityFn::affine(1.0, -1.0), std::nullopt,
                          ingested->name_a, ingested->name_b, warnings};
    }
    const int scores = static_cast<int>(cfg.pmf_a->size());
    ScoreGrid grid =
        cfg.labels ? ScoreGrid::labeled(*cfg.labels) : ScoreGrid::indexed(scores);
    if (grid.size() != scores) throw ValidationError("grid labels do not match the tables");
    GroupSpec a(ScoreDistribution(*cfg.pmf_a), SuccessCurve(*cfg.rho_a), cfg.g_a);
    GroupSpec b(ScoreDistribution(*cfg.pmf_b), SuccessCurve(*cfg.rho_b), 1.0 - cfg.g_a);
    Problem problem(std::move(grid), std::move(a), std::move(b));
    return BuiltProblem{std::move(problem), UtilityFn::affine(1.0, -1.0), std::nullopt,
                        "A", "B", warnings};
  };
  BuiltProblem built = make();

  if (cfg.utility_table) {
    built.utility = UtilityFn::from_table(*cfg.utility_table);
  } else if (cfg.utility_affine) {
    built.utility = UtilityFn::affine(cfg.utility_affine->first, cfg.utility_affine->second);
  } else {
    throw ValidationError("config needs a utility model");
  }

  if (cfg.outcome_table) {
    built.outcome = OutcomeFn::from_table(*cfg.outcome_table);
  } else if (cfg.outcome_affine) {
    built.outcome =
        OutcomeFn::affine(cfg.outcome_affine->first, cfg.outcome_affine->second, cfg.outcome_clamp);
  }
  if (cfg.delta_n) {
    if (!built.outcome) throw ValidationError("delta_n needs an outcome model");
    built.outcome = built.outcome->with_non_selection(*cfg.delta_n);
  }
  return built;
}

namespace {

struct CriterionRun {
  std::string name;
  std::optional<double> lambda;
  SolverResult result;
  std::optional<OutcomeBasedResult> outcome_based;
};

struct GroupAnalysis {
  std::optional<SpecialBetas> betas;
  std::optional<PiecewiseLinearCurve> curve;
};

ConstraintWeights weights_from_config(const ProblemConfig& cfg) {
  if (cfg.linear_weights_shared) return ConstraintWeights::shared(*cfg.linear_weights_shared);
  if (cfg.linear_weights_a && cfg.linear_weights_b) {
    ConstraintWeights w;
    w.group_a = *cfg.linear_weights_a;
    w.group_b = *cfg.linear_weights_b;
    return w;
  }
  throw ValidationError("linear criterion needs linear_weights");
}

std::vector<std::string> requested_criteria(const ProblemConfig& cfg) {
  if (!cfg.criteria.empty()) return cfg.criteria;
  return {"maxutil", "demparity", "eqopt"};
}

std::vector<CriterionRun> run_criteria(const ProblemConfig& cfg, const BuiltProblem& built) {
  const OutcomeFn* delta = built.outcome ? &*built.outcome : nullptr;
  std::vector<CriterionRun> runs;
  for (const std::string& name : requested_criteria(cfg)) {
    if (name == "maxutil") {
      runs.push_back({name, std::nullopt, solve_maxutil(built.problem, built.utility, delta), {}});
    } else if (name == "demparity") {
      runs.push_back(
          {name, std::nullopt, solve_demparity(built.problem, built.utility, delta), {}});
    } else if (name == "eqopt") {
      runs.push_back({name, std::nullopt, solve_eqopt(built.problem, built.utility, delta), {}});
    } else if (name == "linear") {
      const ConstraintWeights w = weights_from_config(cfg);
      runs.push_back(
          {name, std::nullopt, solve_linear_constraint(built.problem, built.utility, w, delta),
           {}});
    } else if (name == "soft") {
      if (!cfg.soft || cfg.soft->lambdas.empty()) {
        throw ValidationError("soft criterion needs a soft section with lambda");
      }
      const ConstraintWeights w =
          cfg.soft->eqopt_weights
              ? ConstraintWeights::equal_opportunity(built.problem.group_a, built.problem.group_b)
              : ConstraintWeights::demographic_parity(built.problem.scores());
      for (double lambda : cfg.soft->lambdas) {
        SoftPenalty penalty;
        penalty.kind = cfg.soft->kind;
        penalty.lambda = lambda;
        if (penalty.kind == SoftPenalty::Kind::UserConvex) {
          penalty = SoftPenalty::user(cfg.soft->knots, lambda);
        }
        const SoftResult soft = solve_soft(built.problem, built.utility, w, penalty, delta);
        runs.push_back(CriterionRun{name, lambda, soft.result, {}});
      }
    } else if (name == "outcome-based") {
      if (!built.outcome) throw ValidationError("outcome-based criterion needs an outcome model");
      if (!cfg.outcome_budget) throw ValidationError("outcome-based criterion needs a budget");
      const OutcomeBasedResult r = solve_outcome_based(
          built.problem.group_a, built.utility, *built.outcome, built.problem.grid,
          *cfg.outcome_budget);
      CriterionRun run{name, std::nullopt, SolverResult{}, r};
      runs.push_back(std::move(run));
    } else {
      throw ValidationError("unknown criterion: " + name);
    }
  }
  return runs;
}

std::string join_flags(const std::vector<std::string>& flags) {
  std::string out;
  for (size_t i = 0; i < flags.size(); ++i) {
    if (i) out += ';';
    out += flags[i];
  }
  return out;
}

}  // namespace

int run_solve(const ProblemConfig& cfg, const std::filesystem::path& out_dir, std::ostream& os) {
  const BuiltProblem built = build_problem(cfg);
  for (const auto& w : built.warnings) os << "warning: " << w << "\n";

  GroupAnalysis ga, gb;
  std::optional<AssumptionCheck> assumption;
  if (built.outcome) {
    const SolverResult mu = solve_maxutil(built.problem, built.utility, &*built.outcome);
    ga.curve = outcome_curve(built.problem.group_a, *built.outcome, built.problem.grid);
    gb.curve = outcome_curve(built.problem.group_b, *built.outcome, built.problem.grid);
    ga.betas = special_betas(*ga.curve, mu.a.rate);
    gb.betas = special_betas(*gb.curve, mu.b.rate);
    assumption = check_institution_assumption(built.utility, *built.outcome,
                                              built.problem.group_a.rho, built.problem.grid);
  }

  const std::vector<CriterionRun> runs = run_criteria(cfg, built);

  std::filesystem::create_directories(out_dir);
  std::ofstream csv(out_dir / "solve.csv");
  csv << "criterion,lambda,group,beta_lo,beta_hi,beta,cutoff,gamma,group_utility,group_outcome,"
         "tpr,total_utility,constraint_value,gap,beta_star,beta_zero,beta_bar,beta_max,"
         "absolute_regime,relative_regime,assumption_pointwise,assumption_ratio,flags\n";

  auto emit_group = [&](const CriterionRun& run, const std::string& group_name,
                        const GroupSolution& sol, const GroupAnalysis& an,
                        std::optional<double> beta_max) {
    csv << run.name << ',' << (run.lambda ? fmt17(*run.lambda) : "") << ',' << group_name << ','
        << fmt17(sol.rate_lo) << ',' << fmt17(sol.rate_hi) << ',' << fmt17(sol.rate) << ','
        << sol.policy.cutoff << ',' << fmt17(sol.policy.gamma) << ',' << fmt17(sol.utility) << ','
        << (sol.outcome ? fmt17(*sol.outcome) : "") << ',' << fmt17(sol.tpr) << ','
        << fmt17(run.result.total_utility) << ','
        << (run.result.constraint_value ? fmt17(*run.result.constraint_value) : "") << ','
        << (run.result.constraint_residual ? fmt17(*run.result.constraint_residual) : "") << ',';
    if (an.betas) {
      csv << fmt17(an.betas->beta_star) << ',' << fmt17(an.betas->beta_zero) << ','
          << fmt17(an.betas->beta_bar) << ',';
    } else {
      csv << ",,,";
    }
    csv << (beta_max ? fmt17(*beta_max) : "") << ',';
    std::vector<std::string> flags = run.result.flags;
    if (an.betas && an.curve) {
      const OutcomeRegime regime = classify_regime(sol.rate, *an.betas, *an.curve);
      csv << to_string(regime.absolute) << ',' << to_string(regime.relative) << ',';
      if (an.betas->harm_threshold_at_boundary) flags.push_back("no-interior-harm-threshold");
      if (an.betas->complement_beyond_domain) flags.push_back("complement-beyond-domain");
    } else {
      csv << ",,";
    }
    if (assumption) {
      csv << (assumption->pointwise ? "1" : "0") << ','
          << (assumption->affine_ratio ? (*assumption->affine_ratio ? "1" : "0") : "");
    } else {
      csv << ',';
    }
    csv << ',' << join_flags(flags) << "\n";
  };

  for (const CriterionRun& run : runs) {
    if (run.outcome_based) {
      const OutcomeBasedResult& r = *run.outcome_based;
      CriterionRun shim = run;
      GroupSolution sol;
      sol.rate_lo = sol.rate_hi = sol.rate = r.rate;
      sol.policy = r.policy;
      sol.utility = r.utility;
      sol.outcome = r.outcome;
      sol.tpr = std::numeric_limits<double>::quiet_NaN();
      shim.result.total_utility = r.utility;
      emit_group(shim, built.name_a, sol, ga, r.beta_max);
      os << run.name << ": rate=" << fmt17(r.rate) << " beta_star=" << fmt17(r.beta_star)
         << " beta_max=" << fmt17(r.beta_max)
         << (r.assumption_warning ? " (warning: institution assumption fails)" : "") << "\n";
      continue;
    }
    emit_group(run, built.name_a, run.result.a, ga, std::nullopt);
    emit_group(run, built.name_b, run.result.b, gb, std::nullopt);
    os << run.name << (run.lambda ? " lambda=" + fmt17(*run.lambda) : "") << ": beta_"
       << built.name_a << "=" << fmt17(run.result.a.rate) << " beta_" << built.name_b << "="
       << fmt17(run.result.b.rate) << " U=" << fmt17(run.result.total_utility);
    if (!run.result.flags.empty()) os << " [" << join_flags(run.result.flags) << "]";
    os << "\n";
  }
  if (assumption) {
    os << "institution assumption: pointwise=" << (assumption->pointwise ? "yes" : "no");
    if (assumption->affine_ratio) {
      os << " ratio-test=" << (*assumption->affine_ratio ? "yes" : "no");
    }
    os << "\n";
  }
  for (const CriterionRun& run : runs) {
    if (run.name != "eqopt") continue;
    const UnderloanReport rep = eqopt_underloan_predicate(built.problem, built.utility);
    os << "underloan hypothesis (beta_A^MU < beta_B^MU, TPR_A > TPR_B): "
       << (rep.holds ? "holds" : "does not hold");
    if (rep.holds) {
      os << "; eqopt < maxutil < demparity for " << built.name_a << ": "
         << (rep.chain_strict ? "yes" : "no");
    }
    os << "\n";
    break;
  }
  return 0;
}

std::vector<PlotSeries> plot_series(const BuiltProblem& built) {
  std::vector<PlotSeries> out;
  auto add = [&](const char* name, const std::string& group, const PiecewiseLinearCurve& c) {
    out.push_back(PlotSeries{name, group, c.xs(), c.ys()});
  };
  if (built.outcome) {
    add("outcome", built.name_a,
        outcome_curve(built.problem.group_a, *built.outcome, built.problem.grid));
    add("outcome", built.name_b,
        outcome_curve(built.problem.group_b, *built.outcome, built.problem.grid));
  }
  add("utility", built.name_a, utility_curve(built.problem.group_a, built.utility));
  add("utility", built.name_b, utility_curve(built.problem.group_b, built.utility));
  return out;
}

int run_curve(const ProblemConfig& cfg, const std::filesystem::path& out_dir, std::ostream& os) {
  const BuiltProblem built = build_problem(cfg);
  if (!built.outcome) throw ValidationError("curve command needs an outcome model");
  for (const auto& w : built.warnings) os << "warning: " << w << "\n";

  const PiecewiseLinearCurve oa =
      outcome_curve(built.problem.group_a, *built.outcome, built.problem.grid);
  const PiecewiseLinearCurve ob =
      outcome_curve(built.problem.group_b, *built.outcome, built.problem.grid);
  const PiecewiseLinearCurve ua = utility_curve(built.problem.group_a, built.utility);
  const PiecewiseLinearCurve ub = utility_curve(built.problem.group_b, built.utility);

  std::filesystem::create_directories(out_dir);
  std::ofstream curves(out_dir / "curves.csv");
  curves << "series,group,beta,value\n";
  for (const PlotSeries& s : plot_series(built)) {
    for (size_t i = 0; i < s.x.size(); ++i) {
      curves << s.name << ',' << s.group << ',' << fmt17(s.x[i]) << ',' << fmt17(s.y[i]) << "\n";
    }
  }

  std::ofstream markers(out_dir / "markers.csv");
  markers << "criterion,lambda,group,beta,outcome_value,utility_value\n";
  for (const CriterionRun& run : run_criteria(cfg, built)) {
    if (run.outcome_based) {
      const double r = run.outcome_based->rate;
      markers << run.name << ",," << built.name_a << ',' << fmt17(r) << ',' << fmt17(oa.value(r))
              << ',' << fmt17(ua.value(r)) << "\n";
      continue;
    }
    markers << run.name << ',' << (run.lambda ? fmt17(*run.lambda) : "") << ',' << built.name_a
            << ',' << fmt17(run.result.a.rate) << ',' << fmt17(oa.value(run.result.a.rate)) << ','
            << fmt17(ua.value(run.result.a.rate)) << "\n";
    markers << run.name << ',' << (run.lambda ? fmt17(*run.lambda) : "") << ',' << built.name_b
            << ',' << fmt17(run.result.b.rate) << ',' << fmt17(ob.value(run.result.b.rate)) << ','
            << fmt17(ub.value(run.result.b.rate)) << "\n";
  }
  os << "curves: " << (out_dir / "curves.csv").string() << "\n";
  os << "markers: " << (out_dir / "markers.csv").string() << "\n";
  return 0;
}

int run_sweep(const ProblemConfig& cfg, const std::filesystem::path& out_dir, std::ostream& os) {
  const BuiltProblem built = build_problem(cfg);
  if (!cfg.sweep) throw ValidationError("sweep command needs a sweep section");
  if (cfg.sweep->grid.empty()) throw ValidationError("sweep grid must not be empty");
  for (const auto& w : built.warnings) os << "warning: " << w << "\n";

  SweepSpec spec;
  spec.parameter = cfg.sweep->parameter;
  spec.grid = cfg.sweep->grid;
  spec.penalty_kind = cfg.sweep->penalty_kind;
  spec.soft_eqopt_weights = cfg.sweep->soft_eqopt_weights;
  const OutcomeFn* delta = built.outcome ? &*built.outcome : nullptr;
  const std::vector<SweepRow> rows = sweep(built.problem, built.utility, delta, spec);

  std::filesystem::create_directories(out_dir);
  std::ofstream csv(out_dir / "sweep.csv");
  csv << "parameter,value,criterion,beta_a_lo,beta_a_hi,beta_a,beta_b,total_utility,"
         "constraint_value,gap,outcome_a,outcome_b,tpr_a,tpr_b,absolute_regime_a,"
         "relative_regime_a,absolute_regime_b,relative_regime_b\n";
  const char* pname = spec.parameter == SweepParameter::GroupProportion ? "g_a"
                      : spec.parameter == SweepParameter::Lambda        ? "lambda"
                                                                        : "u_ratio";
  for (const SweepRow& row : rows) {
    csv << pname << ',' << fmt17(row.parameter_value) << ',' << row.criterion << ','
        << fmt17(row.result.a.rate_lo) << ',' << fmt17(row.result.a.rate_hi) << ','
        << fmt17(row.result.a.rate) << ',' << fmt17(row.result.b.rate) << ','
        << fmt17(row.result.total_utility) << ','
        << (row.result.constraint_value ? fmt17(*row.result.constraint_value) : "") << ','
        << (row.gap ? fmt17(*row.gap) : "") << ','
        << (row.result.a.outcome ? fmt17(*row.result.a.outcome) : "") << ','
        << (row.result.b.outcome ? fmt17(*row.result.b.outcome) : "") << ','
        << fmt17(row.result.a.tpr) << ',' << fmt17(row.result.b.tpr) << ',';
    if (row.regime_a) {
      csv << to_string(row.regime_a->absolute) << ',' << to_string(row.regime_a->relative);
    } else {
      csv << ',';
    }
    csv << ',';
    if (row.regime_b) {
      csv << to_string(row.regime_b->absolute) << ',' << to_string(row.regime_b->relative);
    } else {
      csv << ',';
    }
    csv << "\n";
  }
  os << "sweep rows: " << rows.size() << "\n";
  return 0;
}

int run_verify(const ProblemConfig& cfg, std::uint64_t seed, double corrupt_utility,
               std::ostream& os) {
  const BuiltProblem built = build_problem(cfg);
  const Problem& problem = built.problem;
  const OutcomeFn* delta = built.outcome ? &*built.outcome : nullptr;
  std::mt19937_64 rng(seed);
  bool any_fail = false;

  auto report = [&](const std::string& name, int failed, int total) {
    if (failed == 0) {
      os << "PASS " << name << " (" << total << " checks)\n";
    } else {
      os << "FAIL " << name << " (" << failed << "/" << total << " failed)\n";
      any_fail = true;
    }
  };

  // Threshold dominance on random policies.
  if (delta != nullptr) {
    int failed = 0;
    const int total = 200;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int i = 0; i < total; ++i) {
      const GroupSpec& g = (i % 2 == 0) ? problem.group_a : problem.group_b;
      std::vector<double> tau(static_cast<size_t>(problem.scores()));
      for (double& t : tau) t = unif(rng);
      const std::vector<double> uv = built.utility.values(g.rho);
      const std::vector<double> dv = delta->selection_values(g.rho, problem.grid);
      if (!verify_threshold_dominance(g, Policy(tau), uv, dv)) ++failed;
    }
    report("threshold-dominance", failed, total);
  } else {
    os << "SKIP threshold-dominance (no outcome model)\n";
  }

  // Curve concavity.
  {
    int failed = 0;
    int total = 0;
    auto check = [&](const PiecewiseLinearCurve& c) {
      ++total;
      if (!verify_curve_concavity(c)) ++failed;
    };
    check(utility_curve(problem.group_a, built.utility));
    check(utility_curve(problem.group_b, built.utility));
    if (delta != nullptr) {
      check(outcome_curve(problem.group_a, *delta, problem.grid));
      check(outcome_curve(problem.group_b, *delta, problem.grid));
    }
    report("curve-concavity", failed, total);
  }

  // Solver against the exhaustive oracle.
  if (problem.scores() <= 4) {
    OracleConfig ocfg;
    ocfg.k = 20;
    int failed = 0;
    int total = 0;
    for (const auto& crit : {FairnessCriterion::maxutil(), FairnessCriterion::demparity(),
                             FairnessCriterion::eqopt()}) {
      ++total;
      SolverResult res = solve_criterion(problem, built.utility, crit, delta);
      res.total_utility -= corrupt_utility;  // fault-injection hook
      const OracleOutcome oracle = oracle_constrained_opt(problem, built.utility, crit, ocfg);
      const double bound = [&] {
        double m = 0.0;
        for (double v : built.utility.values(problem.group_a.rho)) m = std::max(m, std::abs(v));
        for (double v : built.utility.values(problem.group_b.rho)) m = std::max(m, std::abs(v));
        return m / ocfg.k;
      }();
      if (!verify_solver_against_oracle(res, oracle, bound)) ++failed;
    }
    report("solver-vs-oracle", failed, total);
  } else {
    os << "SKIP solver-vs-oracle (instance too large)\n";
  }

  // Unconstrained selection never harms (requires the institution assumption).
  if (delta != nullptr) {
    const AssumptionCheck assumption = check_institution_assumption(
        built.utility, *delta, problem.group_a.rho, problem.grid);
    const AssumptionCheck assumption_b = check_institution_assumption(
        built.utility, *delta, problem.group_b.rho, problem.grid);
    if (assumption.pointwise && assumption_b.pointwise) {
      int failed = 0;
      const SolverResult mu = solve_maxutil(problem, built.utility, delta);
      auto check_group = [&](const GroupSpec& g, const GroupSolution& sol) {
        const PiecewiseLinearCurve curve = outcome_curve(g, *delta, problem.grid);
        const double top = curve.maximize().value;
        if (!(*sol.outcome >= -kRegimeTol && *sol.outcome <= top + kRegimeTol)) ++failed;
      };
      check_group(problem.group_a, mu.a);
      check_group(problem.group_b, mu.b);
      report("maxutil-no-active-harm", failed, 2);
    } else {
      os << "SKIP maxutil-no-active-harm (assumption fails)\n";
    }
  } else {
    os << "SKIP maxutil-no-active-harm (no outcome model)\n";
  }

  // Underestimation never raises the selected fraction.
  {
    int failed = 0;
    int total = 0;
    std::uniform_int_distribution<int> amount(0, 2);
    for (int i = 0; i < 20; ++i) {
      MeasurementError err = MeasurementError::none(problem.scores());
      for (int x = 1; x <= problem.scores(); ++x) {
        err.shift[static_cast<size_t>(x - 1)] = std::max(-amount(rng), 1 - x);
      }
      const UnderselectionReport rep = verify_underselection(problem, built.utility, err);
      for (const auto& row : rep.rows) {
        if (!row.checked) continue;
        ++total;
        if (!row.weak_holds) ++failed;
      }
    }
    report("underestimation-underselection", failed, total);
  }

  return any_fail ? 1 : 0;
}

int run_ingest_check(const ProblemConfig& cfg, const std::filesystem::path& out_dir,
                     std::ostream& os) {
  if (!cfg.csv_path) throw ValidationError("ingest-check needs groups.csv");
  std::filesystem::path p = *cfg.csv_path;
  if (p.is_relative()) p = cfg.base_dir / p;
  const IngestedGroups in = ingest_distribution_csv(p);
  for (const auto& w : in.warnings) os << "warning: " << w << "\n";
  os << "groups: " << in.name_a << ", " << in.name_b << "\n";
  os << "scores: " << in.grid.size() << " (" << fmt17(in.grid.label(1)) << " .. "
     << fmt17(in.grid.label(in.grid.size())) << ")\n";

  std::filesystem::create_directories(out_dir);
  std::ofstream echo(out_dir / "echo.csv");
  echo << "score,group,pmf,repay_prob\n";
  auto emit = [&](const std::string& name, const ScoreDistribution& dist,
                  const SuccessCurve& rho) {
    for (int x = 1; x <= dist.size(); ++x) {
      echo << fmt17(in.grid.label(x)) << ',' << name << ',' << fmt17(dist.pmf(x)) << ','
           << fmt17(rho(x)) << "\n";
    }
  };
  emit(in.name_a, in.dist_a, in.rho_a);
  emit(in.name_b, in.dist_b, in.rho_b);
  return 0;
}

}  // namespace fairsel
