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

#ifndef FAIRFED_EXPERIMENT_HPP_
#define FAIRFED_EXPERIMENT_HPP_

#include <optional>
#include <string>
#include <vector>

#include "fairfed/csv.hpp"
#include "fairfed/dataset.hpp"
#include "fairfed/orchestrator.hpp"

namespace fairfed {

enum class PartitionMode { Heterogeneous, Homogeneous };

PartitionMode parse_partition_mode(const std::string& text);
const char* partition_mode_name(PartitionMode mode);

// One named experiment: data source, partitioning, run parameters, repeats.
struct ExperimentSpec {
  std::string name;
  std::string out_dir = "results";
  int repeats = 5;

  // Exactly one data source: a synthetic recipe or a CSV file.
  std::optional<SynthSpec> synth;  // its seed field is overridden per repeat
  std::optional<std::string> csv_path;
  CsvSchema csv_schema;

  PartitionMode partition = PartitionMode::Heterogeneous;
  std::vector<double> group_client_fractions;  // heterogeneous only
  double agg_fraction = 0.15;
  double test_fraction = 0.0;  // 0 disables the held-out test set

  RunConfig run;  // run.seed is the base seed; repeat r uses seed + r

  std::vector<double> sweep_alphas;              // [sweep] section
  PartitionMode oracle_partition = PartitionMode::Homogeneous;

  void validate() const;
};

// Parses the key-value experiment file format (sections in brackets,
// `key = value` lines, `#` comments). Throws ConfigError naming the
// offending key or constraint.
ExperimentSpec parse_experiment_file(const std::string& path);

struct CliOverrides {
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> repeats;
};

void apply_overrides(ExperimentSpec& spec, const CliOverrides& overrides);

// The desk-scale biased default recipe: 10 clients with roughly 1K samples
// each, heterogeneous 50/50 group split, group-1 labels flipped at 0.25,
// logistic model. configs/desk.ini mirrors this spec.
ExperimentSpec default_desk_spec();

// Data pipeline of one repeat: generate or load, carve the optional test set
// and the aggregator set, partition the remainder.
struct RepeatData {
  std::vector<Dataset> shards;
  Dataset agg_set;
  std::optional<Dataset> test_set;
};

RepeatData prepare_repeat_data(const ExperimentSpec& spec, PartitionMode mode,
                               int repeat);

// Runs one repeat of the spec under the given heuristic and partition mode.
// lmm switches the clients to penalized-objective training.
RunResult execute_repeat(const ExperimentSpec& spec,
                         const HeuristicSpec& heuristic, PartitionMode mode,
                         int repeat, bool lmm = false);

struct MetricStats {
  std::optional<double> mean;
  std::optional<double> stdev;  // sample (n-1)
  std::optional<double> cov;
  std::optional<double> median;
};

// Accuracy and violations of one heuristic across repeats, percent scale.
struct SummaryRow {
  std::string label;
  int repeats = 0;
  MetricStats accuracy;
  MetricStats d_eopp;
  MetricStats d_eo;
  MetricStats d_ap;
};

// Builds the percent-scale summary of the final models across repeats; uses
// the held-out test report when present, the aggregator report otherwise.
SummaryRow summarize(const std::string& label,
                     const std::vector<RunResult>& results);

// Percent reduction of a violation against a baseline:
// 100 * (baseline - value) / baseline.
double relative_improvement(double baseline, double value);

// CLI commands; return a process exit code (0 on success) and throw
// ConfigError / Error for exit codes 2 / 1.
int cmd_run(const ExperimentSpec& spec);
int cmd_sweep_alpha(const ExperimentSpec& spec,
                    const std::vector<double>& alphas);
int cmd_compare(const ExperimentSpec& spec);
int cmd_oracle(const ExperimentSpec& spec);

}  // namespace fairfed

#endif  // FAIRFED_EXPERIMENT_HPP_
