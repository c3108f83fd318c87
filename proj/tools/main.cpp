// Copyright 2026 The fairfed authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fairfed/errors.hpp"
#include "fairfed/experiment.hpp"

namespace {

struct CommonOptions {
  std::string config;
  fairfed::CliOverrides overrides;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config, "experiment config file")
      ->required();
  auto* out = cmd->add_option_group("overrides");
  out->add_option_function<std::string>(
      "--out", [&opts](const std::string& v) { opts.overrides.out_dir = v; },
      "output directory override");
  out->add_option_function<std::uint64_t>(
      "--seed", [&opts](std::uint64_t v) { opts.overrides.seed = v; },
      "base seed override");
  out->add_option_function<int>(
      "--repeats", [&opts](int v) { opts.overrides.repeats = v; },
      "repeat count override");
}

fairfed::ExperimentSpec load_spec(const CommonOptions& opts) {
  fairfed::ExperimentSpec spec = fairfed::parse_experiment_file(opts.config);
  fairfed::apply_overrides(spec, opts.overrides);
  return spec;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"federated fair-classification experiment harness"};
  app.require_subcommand(1);

  CommonOptions run_opts;
  CLI::App* run = app.add_subcommand("run", "run one heuristic");
  add_common(run, run_opts);

  CommonOptions sweep_opts;
  std::vector<double> cli_alphas;
  CLI::App* sweep = app.add_subcommand(
      "sweep-alpha", "sweep alpha for FairAvg and FairAccAvg");
  add_common(sweep, sweep_opts);
  sweep->add_option("--alphas", cli_alphas,
                    "alpha values (overrides [sweep] alphas)")
      ->delimiter(',');

  CommonOptions compare_opts;
  CLI::App* compare = app.add_subcommand(
      "compare", "compare FedAvg-DH, FairBest, FairAvg, FairAccAvg");
  add_common(compare, compare_opts);

  CommonOptions oracle_opts;
  CLI::App* oracle = app.add_subcommand(
      "oracle", "compare against FedAvg and FedAvg-LMM on homogeneous shards");
  add_common(oracle, oracle_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) return fairfed::cmd_run(load_spec(run_opts));
    if (sweep->parsed()) {
      fairfed::ExperimentSpec spec = load_spec(sweep_opts);
      const std::vector<double>& alphas =
          cli_alphas.empty() ? spec.sweep_alphas : cli_alphas;
      return fairfed::cmd_sweep_alpha(spec, alphas);
    }
    if (compare->parsed()) return fairfed::cmd_compare(load_spec(compare_opts));
    if (oracle->parsed()) return fairfed::cmd_oracle(load_spec(oracle_opts));
  } catch (const fairfed::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
