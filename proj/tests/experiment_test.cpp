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

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fairfed/errors.hpp"
#include "fairfed/experiment.hpp"
#include "fairfed/fairness.hpp"
#include "test_util.hpp"

using namespace fairfed;

namespace {

std::string write_file(const test::TempDir& dir, const std::string& name,
                       const std::string& content) {
  const auto path = dir.path() / name;
  std::ofstream out(path);
  out << content;
  return path.string();
}

// A fast synthetic experiment for file-level tests.
std::string tiny_config(const test::TempDir& dir, const std::string& extra = "") {
  return write_file(dir, "tiny.ini",
                    "name = tiny\n"
                    "out_dir = " + (dir.path() / "out").string() + "\n"
                    "repeats = 3\n"
                    "seed = 7\n"
                    "\n"
                    "[data]\n"
                    "source = synthetic\n"
                    "samples = 400\n"
                    "features = 2\n"
                    "groups = 2\n"
                    "noise = 0.6\n"
                    "class_separation = 1.0\n"
                    "group_offset = 2.0\n"
                    "boundary_shift = 0.8\n"
                    "flip_rates = 0.0,0.25\n"
                    "\n"
                    "[partition]\n"
                    "mode = heterogeneous\n"
                    "client_fractions = 0.5,0.5\n"
                    "agg_fraction = 0.2\n"
                    "\n"
                    "[train]\n"
                    "clients = 4\n"
                    "rounds = 5\n"
                    "epochs = 1\n"
                    "learning_rate = 0.4\n"
                    "batch_size = 16\n"
                    "tolerance = 1.0\n"
                    "threshold_round = 2\n"
                    "\n"
                    "[heuristic]\n"
                    "kind = FairAccAvg\n"
                    "alpha = 25\n"
                    "notion = EO\n" +
                        extra);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("parse_experiment_file reads the tiny config") {
  test::TempDir dir("cfg");
  const ExperimentSpec spec = parse_experiment_file(tiny_config(dir));
  CHECK(spec.name == "tiny");
  CHECK(spec.repeats == 3);
  CHECK(spec.run.seed == 7);
  REQUIRE(spec.synth.has_value());
  CHECK(spec.synth->num_samples == 400);
  CHECK(spec.synth->label_flip_rates == std::vector<double>{0.0, 0.25});
  CHECK(spec.synth->positive_means[1][0] ==
        doctest::Approx(1.8).epsilon(1e-12));  // boundary_shift + separation
  CHECK(spec.partition == PartitionMode::Heterogeneous);
  CHECK(spec.run.num_clients == 4);
  CHECK(spec.run.heuristic.kind == HeuristicKind::FairAccAvg);
  CHECK(*spec.run.heuristic.alpha == 25.0);
  CHECK(spec.run.heuristic.notion == FairnessNotion::EqualizedOdds);
}

TEST_CASE("unknown keys and broken constraints are config errors") {
  test::TempDir dir("cfg");
  const std::string bad_key = tiny_config(dir, "typo_key = 1\n");
  CHECK_THROWS_WITH_AS(parse_experiment_file(bad_key),
                       doctest::Contains("typo_key"), ConfigError);

  const std::string bad_tau = write_file(
      dir, "tau.ini",
      "name = t\n[data]\nsource = synthetic\nsamples = 100\nfeatures = 2\n"
      "[train]\nclients = 2\nrounds = 5\nthreshold_round = 5\n");
  CHECK_THROWS_WITH_AS(parse_experiment_file(bad_tau),
                       doctest::Contains("threshold_round"), ConfigError);

  const std::string missing = write_file(dir, "missing.ini", "name = x\n");
  CHECK_THROWS_AS(parse_experiment_file(missing), ConfigError);
}

TEST_CASE("overrides replace out_dir, seed, and repeats") {
  test::TempDir dir("cfg");
  ExperimentSpec spec = parse_experiment_file(tiny_config(dir));
  CliOverrides overrides;
  overrides.out_dir = "elsewhere";
  overrides.seed = 99;
  overrides.repeats = 2;
  apply_overrides(spec, overrides);
  CHECK(spec.out_dir == "elsewhere");
  CHECK(spec.run.seed == 99);
  CHECK(spec.repeats == 2);
}

TEST_CASE("the shipped desk config matches the built-in desk recipe") {
  const ExperimentSpec desk = default_desk_spec();
  const ExperimentSpec parsed =
      parse_experiment_file(std::string(FAIRFED_SOURCE_DIR) + "/configs/desk.ini");
  CHECK(parsed.synth->num_samples == desk.synth->num_samples);
  CHECK(parsed.synth->feature_dim == desk.synth->feature_dim);
  CHECK(parsed.synth->noise_scale == desk.synth->noise_scale);
  CHECK(parsed.synth->label_flip_rates == desk.synth->label_flip_rates);
  CHECK(parsed.synth->negative_means == desk.synth->negative_means);
  CHECK(parsed.synth->positive_means == desk.synth->positive_means);
  CHECK(parsed.agg_fraction == desk.agg_fraction);
  CHECK(parsed.run.num_clients == desk.run.num_clients);
  CHECK(parsed.run.rounds == desk.run.rounds);
  CHECK(parsed.run.local_epochs == desk.run.local_epochs);
  CHECK(parsed.run.learning_rate == desk.run.learning_rate);
  CHECK(parsed.run.batch_size == desk.run.batch_size);
  CHECK(parsed.run.accuracy_tolerance == desk.run.accuracy_tolerance);
  CHECK(parsed.run.threshold_round == desk.run.threshold_round);
  CHECK(parsed.run.seed == desk.run.seed);
  CHECK(parsed.sweep_alphas == desk.sweep_alphas);
}

TEST_CASE("cmd_run writes repeat files and recomputable summaries") {
  test::TempDir dir("run");
  ExperimentSpec spec = parse_experiment_file(tiny_config(dir));
  CHECK(cmd_run(spec) == 0);

  const auto base = std::filesystem::path(spec.out_dir) / "tiny";
  const auto label = spec.run.heuristic.label();
  for (int r = 0; r < spec.repeats; ++r) {
    CHECK(std::filesystem::exists(base / label / (std::to_string(r) + ".json")));
    CHECK(std::filesystem::exists(base / label /
                                  (std::to_string(r) + "_rounds.csv")));
  }
  REQUIRE(std::filesystem::exists(base / "summary.csv"));
  REQUIRE(std::filesystem::exists(base / "summary.json"));

  // Every summary number is recomputable from the per-repeat files. The CoV
  // check is the sharpest: recompute it from the final reports on disk.
  std::vector<double> eo;
  for (int r = 0; r < spec.repeats; ++r) {
    const auto doc = nlohmann::json::parse(
        read_file(base / label / (std::to_string(r) + ".json")));
    eo.push_back(100.0 *
                 doc["final_agg_report"]["delta_eo"].get<double>());
  }
  const auto summary = nlohmann::json::parse(read_file(base / "summary.json"));
  const double reported_cov = summary["rows"][0]["d_eo"]["cov"].get<double>();
  CHECK(reported_cov ==
        doctest::Approx(coefficient_of_variation(eo)).epsilon(1e-12));
  double mean = 0.0;
  for (double v : eo) mean += v;
  mean /= eo.size();
  CHECK(summary["rows"][0]["d_eo"]["mean"].get<double>() ==
        doctest::Approx(mean).epsilon(1e-12));
}

TEST_CASE("cmd_run twice produces byte-identical summaries") {
  test::TempDir dir("det");
  ExperimentSpec spec = parse_experiment_file(tiny_config(dir));
  spec.repeats = 2;

  ExperimentSpec first = spec;
  first.out_dir = (dir.path() / "a").string();
  ExperimentSpec second = spec;
  second.out_dir = (dir.path() / "b").string();
  CHECK(cmd_run(first) == 0);
  CHECK(cmd_run(second) == 0);

  CHECK(read_file(std::filesystem::path(first.out_dir) / "tiny/summary.csv") ==
        read_file(std::filesystem::path(second.out_dir) / "tiny/summary.csv"));
}

TEST_CASE("cmd_sweep_alpha validates alphas and emits the combined table") {
  test::TempDir dir("sweep");
  ExperimentSpec spec = parse_experiment_file(tiny_config(dir));
  spec.repeats = 2;
  CHECK_THROWS_AS(cmd_sweep_alpha(spec, {}), ConfigError);
  CHECK_THROWS_AS(cmd_sweep_alpha(spec, {0.0}), ConfigError);

  CHECK(cmd_sweep_alpha(spec, {25, 100}) == 0);
  const auto base = std::filesystem::path(spec.out_dir) / "tiny";
  const std::string sweep = read_file(base / "sweep.csv");
  CHECK(sweep.find("FairAvg,25") != std::string::npos);
  CHECK(sweep.find("FairAccAvg,100") != std::string::npos);
  // No nesting violations on any logged round.
  std::istringstream lines(sweep);
  std::string line;
  std::getline(lines, line);  // header
  while (std::getline(lines, line)) {
    CHECK(line.substr(line.rfind(',') + 1) == "0");
  }

  const auto summary = nlohmann::json::parse(read_file(base / "summary.json"));
  CHECK(summary["rows"].size() == 4);  // 2 heuristics x 2 alphas
}

TEST_CASE("relative improvement matches the worked example") {
  // A violation dropping from 16.3 to 8.2 is a 49.7% improvement.
  CHECK(relative_improvement(16.3, 8.2) ==
        doctest::Approx(49.7).epsilon(1e-3));
}

TEST_CASE("cmd_compare emits all four heuristics with improvement columns") {
  test::TempDir dir("cmp");
  ExperimentSpec spec = parse_experiment_file(tiny_config(dir));
  spec.repeats = 3;
  CHECK(cmd_compare(spec) == 0);

  const auto base = std::filesystem::path(spec.out_dir) / "tiny";
  const std::string csv = read_file(base / "summary.csv");
  CHECK(csv.find("FedAvg-DH") != std::string::npos);
  CHECK(csv.find("FairBest") != std::string::npos);
  CHECK(csv.find("25-FairAvg") != std::string::npos);
  CHECK(csv.find("25-FairAccAvg") != std::string::npos);
  CHECK(csv.find("improv_eo") != std::string::npos);
  CHECK(csv.find("md_eo") != std::string::npos);

  // The baseline improvement over itself is zero.
  const auto summary = nlohmann::json::parse(read_file(base / "summary.json"));
  CHECK(summary["rows"][0]["heuristic"] == "FedAvg-DH");
}

TEST_CASE("cmd_compare omits mahalanobis below three repeats") {
  test::TempDir dir("cmp2");
  ExperimentSpec spec = parse_experiment_file(tiny_config(dir));
  spec.repeats = 2;
  CHECK(cmd_compare(spec) == 0);
  const std::string csv = read_file(
      std::filesystem::path(spec.out_dir) / "tiny" / "summary.csv");
  CHECK(csv.find("improv_eo") != std::string::npos);
  CHECK(csv.find("md_eo") == std::string::npos);
}

TEST_CASE("cmd_oracle compares FedAvg, FedAvg-LMM, and the best heuristic") {
  test::TempDir dir("oracle");
  ExperimentSpec spec = parse_experiment_file(
      tiny_config(dir, "\n[oracle]\nmode = homogeneous\n"));
  spec.repeats = 2;
  spec.run.lambda = 0.0;  // the LMM column then matches FedAvg exactly
  CHECK(cmd_oracle(spec) == 0);

  const auto base = std::filesystem::path(spec.out_dir) / "tiny";
  const auto summary = nlohmann::json::parse(read_file(base / "summary.json"));
  REQUIRE(summary["rows"].size() == 3);
  CHECK(summary["rows"][0]["heuristic"] == "FedAvg");
  CHECK(summary["rows"][1]["heuristic"] == "FedAvg-LMM");
  CHECK(summary["rows"][2]["heuristic"] == "25-FairAccAvg");
  CHECK(summary["rows"][0]["accuracy"]["mean"] ==
        summary["rows"][1]["accuracy"]["mean"]);
  CHECK(summary["rows"][0]["d_eo"]["mean"] == summary["rows"][1]["d_eo"]["mean"]);
}

TEST_CASE("cmd_oracle surfaces the undefined loss on heterogeneous shards") {
  test::TempDir dir("oracle2");
  ExperimentSpec spec = parse_experiment_file(
      tiny_config(dir, "\n[oracle]\nmode = heterogeneous\n"));
  spec.repeats = 1;
  spec.run.lambda = 1.0;
  CHECK_THROWS_AS(cmd_oracle(spec), UndefinedFairnessLoss);
}

TEST_CASE("sweep rows at alpha 100 match a FedAvg run on every metric") {
  test::TempDir dir("limit");
  ExperimentSpec spec = parse_experiment_file(tiny_config(dir));
  spec.repeats = 3;

  ExperimentSpec sweep_spec = spec;
  sweep_spec.out_dir = (dir.path() / "sweep").string();
  CHECK(cmd_sweep_alpha(sweep_spec, {25, 100}) == 0);

  ExperimentSpec fedavg_spec = spec;
  fedavg_spec.out_dir = (dir.path() / "fedavg").string();
  fedavg_spec.run.heuristic = {HeuristicKind::FedAvg, std::nullopt,
                               spec.run.heuristic.notion};
  CHECK(cmd_run(fedavg_spec) == 0);

  const auto sweep_doc = nlohmann::json::parse(read_file(
      std::filesystem::path(sweep_spec.out_dir) / "tiny/summary.json"));
  const auto fed_doc = nlohmann::json::parse(read_file(
      std::filesystem::path(fedavg_spec.out_dir) / "tiny/summary.json"));
  const auto& fed_row = fed_doc["rows"][0];

  int matched_rows = 0;
  for (const auto& row : sweep_doc["rows"]) {
    const std::string label = row["heuristic"].get<std::string>();
    if (label != "100-FairAvg" && label != "100-FairAccAvg") continue;
    ++matched_rows;
    for (const char* metric : {"accuracy", "d_eopp", "d_eo", "d_ap"}) {
      for (const char* stat : {"mean", "stdev", "median"}) {
        const double got = row[metric][stat].get<double>();
        const double want = fed_row[metric][stat].get<double>();
        CHECK(std::fabs(got - want) <= 1e-9);
      }
    }
  }
  CHECK(matched_rows == 2);
}
