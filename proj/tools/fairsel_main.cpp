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

#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "fairsel/io.hpp"

namespace {

struct CommonArgs {
  std::string config;
  std::string out = ".";
  std::string criteria;
  std::string format = "csv";
  std::uint64_t seed = 20260101;
};

void add_common(CLI::App* cmd, CommonArgs* args, bool needs_out) {
  cmd->add_option("--config", args->config, "problem configuration file")->required();
  if (needs_out) cmd->add_option("--out", args->out, "output directory");
  cmd->add_option("--criterion", args->criteria, "comma-separated criterion list override");
  cmd->add_option("--seed", args->seed, "random seed for verification suites");
  cmd->add_option("--format", args->format, "machine output format (csv)");
}

fairsel::ProblemConfig load(const CommonArgs& args) {
  fairsel::ProblemConfig cfg = fairsel::load_config(args.config);
  if (args.format != "csv") {
    throw fairsel::ValidationError("unsupported format: " + args.format);
  }
  if (!args.criteria.empty()) {
    cfg.criteria.clear();
    std::string item;
    std::stringstream ss(args.criteria);
    while (std::getline(ss, item, ',')) {
      if (!item.empty()) cfg.criteria.push_back(item);
    }
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"threshold selection policies and delayed-outcome analysis"};
  app.require_subcommand(1);

  CommonArgs solve_args, curve_args, sweep_args, verify_args, ingest_args;
  double corrupt_utility = 0.0;

  CLI::App* solve = app.add_subcommand("solve", "optimal policies per criterion");
  add_common(solve, &solve_args, true);
  CLI::App* curve = app.add_subcommand("curve", "outcome and utility curves with rate markers");
  add_common(curve, &curve_args, true);
  CLI::App* sweep = app.add_subcommand("sweep", "parameter sweeps");
  add_common(sweep, &sweep_args, true);
  CLI::App* verify = app.add_subcommand("verify", "brute-force verification suite");
  add_common(verify, &verify_args, false);
  verify->add_option("--corrupt-utility", corrupt_utility,
                     "fault-injection offset added to analytic utilities")
      ->group("");  // hidden test hook
  CLI::App* ingest = app.add_subcommand("ingest-check", "validate and echo a distribution csv");
  add_common(ingest, &ingest_args, true);

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return fairsel::run_solve(load(solve_args), solve_args.out, std::cout);
    if (curve->parsed()) return fairsel::run_curve(load(curve_args), curve_args.out, std::cout);
    if (sweep->parsed()) return fairsel::run_sweep(load(sweep_args), sweep_args.out, std::cout);
    if (verify->parsed()) {
      return fairsel::run_verify(load(verify_args), verify_args.seed, corrupt_utility, std::cout);
    }
    if (ingest->parsed()) {
      return fairsel::run_ingest_check(load(ingest_args), ingest_args.out, std::cout);
    }
  } catch (const fairsel::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const fairsel::PreconditionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
