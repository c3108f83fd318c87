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
//
// End-to-end acceptance suite. Each criterion prints exactly one PASS/FAIL
// line; the process exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairfed/aggregation.hpp"
#include "fairfed/dataset.hpp"
#include "fairfed/errors.hpp"
#include "fairfed/experiment.hpp"
#include "fairfed/fairness.hpp"
#include "fairfed/model.hpp"
#include "fairfed/orchestrator.hpp"
#include "fairfed/serialization.hpp"
#include "../test_util.hpp"

using namespace fairfed;

namespace {

struct Check {
  std::vector<std::string> failures;

  void require(bool condition, const std::string& message) {
    if (!condition) failures.push_back(message);
  }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Criterion 1: hard metrics match an independent brute-force recount exactly
// on 1000 random prediction/dataset pairs, in under 5 seconds.

void criterion_metric_oracle(Check& check) {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240501);
  std::uniform_int_distribution<int> pred_dist(0, 1);
  std::uniform_int_distribution<int> group_count(2, 3);
  for (int trial = 0; trial < 1000; ++trial) {
    const int s = group_count(rng);
    const Dataset data = test::random_dataset(rng, 50, s, 1);
    std::vector<int> preds(data.samples.size());
    for (int& p : preds) p = pred_dist(rng);

    const FairnessReport fast = evaluate_predictions(data, preds);
    const test::BruteReport slow = test::brute_force_report(data, preds);

    bool equal = fast.accuracy == slow.accuracy && fast.fnr == slow.fnr &&
                 fast.fpr == slow.fpr && fast.delta_eopp == slow.delta_eopp &&
                 fast.delta_eo == slow.delta_eo && fast.delta_ap == slow.delta_ap;
    for (int g = 0; g < s && equal; ++g) {
      equal = fast.group_fnr[g] == slow.group_fnr[g] &&
              fast.group_fpr[g] == slow.group_fpr[g];
    }
    check.require(equal, "mismatch against brute-force recount at trial " +
                             std::to_string(trial));
    if (!equal) return;
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  check.require(seconds < 5.0,
                "metric oracle equivalence took " + fmt(seconds) + " s");
}

// ---------------------------------------------------------------------------
// Criterion 2: the penalized loss is rejected exactly on shards missing a
// group or stratum, across 200 randomized shard configurations.

void criterion_undefined_loss(Check& check) {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> cell_count(0, 3);
  std::normal_distribution<double> feat(0.0, 1.0);
  const FairnessNotion notions[] = {FairnessNotion::EqualOpportunity,
                                    FairnessNotion::EqualizedOdds,
                                    FairnessNotion::AccuracyParity};
  int tested = 0;
  while (tested < 200) {
    Dataset shard;
    shard.feature_dim = 2;
    shard.num_groups = 2;
    int positives[2] = {0, 0};
    int negatives[2] = {0, 0};
    for (int g = 0; g < 2; ++g) {
      for (int y = 0; y < 2; ++y) {
        const int count = cell_count(rng);
        (y == 1 ? positives : negatives)[g] = count;
        for (int i = 0; i < count; ++i) {
          shard.samples.push_back({{feat(rng), feat(rng)}, y, g});
        }
      }
    }
    if (shard.samples.empty()) continue;
    const FairnessNotion notion = notions[tested % 3];
    ++tested;

    // Expected definedness, restated independently of the library predicate.
    bool expected_defined = true;
    for (int g = 0; g < 2; ++g) {
      if (positives[g] == 0) expected_defined = false;
      if (notion != FairnessNotion::EqualOpportunity && negatives[g] == 0) {
        expected_defined = false;
      }
    }

    TrainConfig cfg;
    cfg.epochs = 1;
    cfg.learning_rate = 0.1;
    cfg.batch_size = 8;
    cfg.seed = tested;
    cfg.lambda = 1.0;
    cfg.notion = notion;
    bool threw = false;
    try {
      (void)local_train_lmm(init_params({ArchKind::Linear, 2, 0}, 1), shard, cfg);
    } catch (const UndefinedFairnessLoss&) {
      threw = true;
    }
    check.require(threw == !expected_defined,
                  "shard config " + std::to_string(tested) +
                      " misclassified (notion " + notion_name(notion) + ")");
    if (threw == expected_defined) return;
  }

  // The federated LMM oracle surfaces the same classification per shard list.
  SynthSpec synth;
  synth.num_samples = 400;
  synth.feature_dim = 2;
  synth.num_groups = 2;
  synth.group_proportions = {0.5, 0.5};
  synth.negative_means = {{-1.0, -1.0}, {-1.0, 1.0}};
  synth.positive_means = {{1.0, -1.0}, {1.0, 1.0}};
  synth.noise_scale = 0.8;
  synth.label_flip_rates = {0.0, 0.0};
  synth.seed = 5;
  const Dataset pool = generate_synthetic(synth);
  const SplitResult split = split_aggregator_set(pool, 0.2, 5);
  RunConfig cfg;
  cfg.num_clients = 2;
  cfg.rounds = 3;
  cfg.threshold_round = 1;
  cfg.local_epochs = 1;
  cfg.learning_rate = 0.2;
  cfg.batch_size = 32;
  cfg.arch = {ArchKind::Linear, 2, 0};
  cfg.heuristic = {HeuristicKind::FedAvg, std::nullopt,
                   FairnessNotion::EqualizedOdds};
  cfg.lambda = 1.0;
  cfg.seed = 9;

  bool hetero_threw = false;
  try {
    (void)run_oracle_lmm(
        cfg, partition_heterogeneous(split.train, 2, {0.5, 0.5}, 1),
        split.aggregator);
  } catch (const UndefinedFairnessLoss&) {
    hetero_threw = true;
  }
  check.require(hetero_threw, "heterogeneous shards must raise the undefined loss");

  bool homog_threw = false;
  try {
    (void)run_oracle_lmm(cfg, partition_homogeneous(split.train, 2, 1),
                         split.aggregator);
  } catch (const UndefinedFairnessLoss&) {
    homog_threw = true;
  }
  check.require(!homog_threw, "group-complete shards must not raise");
}

// ---------------------------------------------------------------------------
// Criterion 3: alpha = 100 with full participation reproduces FedAvg within
// 1e-12 per component on 50 random submission sets.

void criterion_fedavg_limit(Check& check) {
  std::mt19937_64 rng(31337);
  std::normal_distribution<double> value(0.0, 2.0);
  std::uniform_real_distribution<double> delta_dist(0.0, 1.0);
  std::uniform_real_distribution<double> acc_dist(0.0, 1.0);
  std::uniform_int_distribution<int> count_dist(1, 12);
  std::uniform_int_distribution<std::int64_t> n_dist(1, 500);

  for (int trial = 0; trial < 50; ++trial) {
    const int m = count_dist(rng);
    std::vector<ClientSubmission> subs;
    std::vector<ScoredSubmission> scored;
    for (int i = 0; i < m; ++i) {
      ClientSubmission sub;
      sub.client_id = i;
      sub.num_samples = n_dist(rng);
      sub.params.arch = {ArchKind::Linear, 4, 0};
      sub.params.values.resize(5);
      for (double& v : sub.params.values) v = value(rng);
      scored.push_back({sub, acc_dist(rng), delta_dist(rng)});
      subs.push_back(std::move(sub));
    }
    const ModelParams reference = fed_avg(subs);
    const ModelParams via_fair = fair_avg(scored, 100.0);
    const ModelParams via_ratio = fair_acc_avg(scored, 100.0);
    for (std::size_t j = 0; j < reference.values.size(); ++j) {
      check.require(
          std::fabs(via_fair.values[j] - reference.values[j]) <= 1e-12,
          "fair_avg(100) deviates at trial " + std::to_string(trial));
      check.require(
          std::fabs(via_ratio.values[j] - reference.values[j]) <= 1e-12,
          "fair_acc_avg(100) deviates at trial " + std::to_string(trial));
    }
    if (!check.failures.empty()) return;
  }
}

// ---------------------------------------------------------------------------
// Criterion 4: the stopping rule follows hand-traced tables on scripted
// accuracy sequences.

struct TraceRound {
  char branch;   // 'i' = t <= tau update, '>' = replace, '=' = FairCheck,
                 // '<' = stop
  double d_acc;  // expected percentage points; NaN when not computed
};

struct Trace {
  std::string name;
  std::vector<double> accuracies;  // accuracy of the round-t global, t = 1...
  double tolerance;
  int tau;
  int rounds;  // T
  std::vector<TraceRound> expected;
};

void criterion_stop_traces(Check& check) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const std::vector<Trace> traces = {
      {"documented stop", {0.50, 0.60, 0.70, 0.702}, 1.0, 2, 10,
       {{'i', nan}, {'i', nan}, {'>', 10.0}, {'<', 0.2}}},
      {"equality FairCheck", {0.50, 0.60, 0.70, 0.71, 0.712}, 1.0, 2, 10,
       {{'i', nan}, {'i', nan}, {'>', 10.0}, {'=', 1.0}, {'<', 0.2}}},
      {"huge tolerance", {0.50, 0.60, 0.65}, 100.0, 1, 5,
       {{'i', nan}, {'<', 10.0}}},
      {"budget exhausted", {0.10, 0.20, 0.30, 0.40, 0.50, 0.60}, 1.0, 2, 6,
       {{'i', nan}, {'i', nan}, {'>', 10.0}, {'>', 10.0}, {'>', 10.0}}},
      {"wide threshold window", {0.50, 0.60, 0.70, 0.71, 0.715}, 1.0, 3, 5,
       {{'i', nan}, {'i', nan}, {'i', nan}, {'=', 1.0}}},
      {"slow climb then stop", {0.50, 0.52, 0.54, 0.56, 0.565}, 1.0, 2, 10,
       {{'i', nan}, {'i', nan}, {'>', 2.0}, {'>', 2.0}, {'<', 0.5}}},
  };

  SynthSpec synth;
  synth.num_samples = 240;
  synth.feature_dim = 2;
  synth.num_groups = 2;
  synth.group_proportions = {0.5, 0.5};
  synth.negative_means = {{-1.0, -1.0}, {-1.0, 1.0}};
  synth.positive_means = {{1.0, -1.0}, {1.0, 1.0}};
  synth.noise_scale = 0.8;
  synth.label_flip_rates = {0.0, 0.1};
  synth.seed = 21;
  const Dataset pool = generate_synthetic(synth);
  const SplitResult split = split_aggregator_set(pool, 0.25, 21);
  const std::vector<Dataset> shards = partition_homogeneous(split.train, 2, 21);

  for (const Trace& trace : traces) {
    RunConfig cfg;
    cfg.num_clients = 2;
    cfg.rounds = trace.rounds;
    cfg.local_epochs = 1;
    cfg.learning_rate = 0.2;
    cfg.batch_size = 32;
    cfg.arch = {ArchKind::Linear, 2, 0};
    cfg.heuristic = {HeuristicKind::FedAvg, std::nullopt,
                     FairnessNotion::EqualizedOdds};
    cfg.accuracy_tolerance = trace.tolerance;
    cfg.threshold_round = trace.tau;
    cfg.seed = 5;

    RunHooks hooks;
    hooks.accuracy_override = [&trace](int round, const ModelParams&) {
      const std::size_t idx =
          std::min<std::size_t>(round - 1, trace.accuracies.size() - 1);
      return trace.accuracies[idx];
    };
    const RunResult result =
        run_federated(cfg, shards, split.aggregator, nullptr, &hooks);

    const int expected_stop = static_cast<int>(trace.expected.size());
    check.require(result.stop_round == expected_stop,
                  trace.name + ": stop round " +
                      std::to_string(result.stop_round) + ", expected " +
                      std::to_string(expected_stop));
    if (result.stop_round != expected_stop) continue;

    for (std::size_t i = 0; i < trace.expected.size(); ++i) {
      const TraceRound& want = trace.expected[i];
      const RoundLog& log = result.logs[i];
      const std::string where =
          trace.name + " round " + std::to_string(log.round);

      if (std::isnan(want.d_acc)) {
        check.require(!log.d_acc.has_value(), where + ": unexpected d_acc");
      } else {
        check.require(log.d_acc.has_value() &&
                          std::fabs(*log.d_acc - want.d_acc) < 1e-9,
                      where + ": d_acc mismatch");
      }
      switch (want.branch) {
        case 'i':
        case '>':
          check.require(log.phi_best_updated && !log.fair_check_invoked &&
                            !log.stopped,
                        where + ": expected a plain best-model update");
          break;
        case '=': {
          check.require(log.fair_check_invoked && !log.stopped,
                        where + ": expected FairCheck");
          if (log.fair_check_invoked) {
            // The kept side must be the one with the smaller violation.
            const bool kept = log.fair_check_kept_incumbent.value_or(false);
            const double inc = log.fair_check_delta_incumbent.value_or(-1);
            const double cha = log.fair_check_delta_challenger.value_or(-1);
            check.require(kept ? inc <= cha : cha < inc,
                          where + ": FairCheck kept the worse model");
            check.require(log.phi_best_updated == !kept,
                          where + ": FairCheck update flag inconsistent");
          }
          break;
        }
        case '<':
          check.require(log.stopped && !log.phi_best_updated &&
                            !log.fair_check_invoked,
                        where + ": expected the stop branch");
          break;
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Criterion 5: analytic gradients match central finite differences at 100
// random parameter points, within 1e-5 relative error.

void criterion_gradients(Check& check) {
  std::mt19937_64 rng(4242);
  std::normal_distribution<double> value(0.0, 0.8);
  std::normal_distribution<double> feat(0.0, 1.0);
  const FairnessNotion notions[] = {FairnessNotion::EqualOpportunity,
                                    FairnessNotion::EqualizedOdds,
                                    FairnessNotion::AccuracyParity};
  for (int point = 0; point < 100; ++point) {
    const Architecture arch = point % 2 == 0
                                  ? Architecture{ArchKind::Linear, 3, 0}
                                  : Architecture{ArchKind::Mlp, 3, 2};
    ModelParams params;
    params.arch = arch;
    params.values.resize(arch.param_count());
    for (double& v : params.values) v = value(rng);

    // Group-and-stratum-complete dataset for the soft violation.
    Dataset data;
    data.feature_dim = 3;
    data.num_groups = 2;
    for (int g = 0; g < 2; ++g) {
      for (int y = 0; y < 2; ++y) {
        for (int i = 0; i < 5; ++i) {
          data.samples.push_back({{feat(rng), feat(rng), feat(rng)}, y, g});
        }
      }
    }

    std::vector<double> analytic;
    ce_loss_and_grad(params, data, analytic);
    auto numeric = test::finite_difference(
        params, [&](const ModelParams& p) { return ce_loss(p, data); });
    check.require(test::gradients_close(analytic, numeric, 1e-5),
                  "cross-entropy gradient point " + std::to_string(point));

    const FairnessNotion notion = notions[point % 3];
    soft_violation_and_grad(params, data, notion, analytic);
    numeric = test::finite_difference(params, [&](const ModelParams& p) {
      return soft_violation(p, data, notion);
    });
    check.require(test::gradients_close(analytic, numeric, 1e-5),
                  std::string("soft violation gradient point ") +
                      std::to_string(point) + " (" + notion_name(notion) + ")");
    if (!check.failures.empty()) return;
  }
}

// ---------------------------------------------------------------------------
// Criterion 6: on the default biased desk recipe, FairBest and 10-FairAccAvg
// cut the median equalized-odds violation by at least 25% against FedAvg-DH
// at a median accuracy cost of at most 20 points.

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct HeuristicOutcome {
  double median_eo_pct = 0.0;
  double median_acc_pct = 0.0;
};

HeuristicOutcome run_heuristic(const ExperimentSpec& spec,
                               const HeuristicSpec& heuristic) {
  std::vector<double> eo, acc;
  for (int r = 0; r < spec.repeats; ++r) {
    const RunResult result =
        execute_repeat(spec, heuristic, PartitionMode::Heterogeneous, r);
    eo.push_back(100.0 * result.final_agg_report.delta_eo.value());
    acc.push_back(100.0 * result.final_agg_report.accuracy);
  }
  return {median(eo), median(acc)};
}

void criterion_desk_reproduction(Check& check) {
  const auto start = std::chrono::steady_clock::now();
  const ExperimentSpec spec = default_desk_spec();
  const FairnessNotion notion = FairnessNotion::EqualizedOdds;

  const HeuristicOutcome base =
      run_heuristic(spec, {HeuristicKind::FedAvg, std::nullopt, notion});
  const HeuristicOutcome best =
      run_heuristic(spec, {HeuristicKind::FairBest, std::nullopt, notion});
  const HeuristicOutcome acc_avg =
      run_heuristic(spec, {HeuristicKind::FairAccAvg, 10.0, notion});

  check.require(best.median_eo_pct <= 0.75 * base.median_eo_pct,
                "FairBest d_EO " + fmt(best.median_eo_pct) +
                    "% is not 25% below FedAvg-DH " + fmt(base.median_eo_pct) +
                    "%");
  check.require(acc_avg.median_eo_pct <= 0.75 * base.median_eo_pct,
                "10-FairAccAvg d_EO " + fmt(acc_avg.median_eo_pct) +
                    "% is not 25% below FedAvg-DH " + fmt(base.median_eo_pct) +
                    "%");
  check.require(base.median_acc_pct - best.median_acc_pct <= 20.0,
                "FairBest accuracy drop " +
                    fmt(base.median_acc_pct - best.median_acc_pct) +
                    " > 20 points");
  check.require(base.median_acc_pct - acc_avg.median_acc_pct <= 20.0,
                "10-FairAccAvg accuracy drop " +
                    fmt(base.median_acc_pct - acc_avg.median_acc_pct) +
                    " > 20 points");

  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  check.require(seconds < 300.0,
                "desk reproduction took " + fmt(seconds) + " s");
}

// ---------------------------------------------------------------------------
// Criterion 7: across alpha in {2,10,50,100}, the median violation and the
// median accuracy both correlate positively with alpha in at least 4 of 5
// seed families.

void criterion_alpha_direction(Check& check) {
  const std::vector<double> alphas = {2, 10, 50, 100};
  int good_families = 0;
  for (int family = 0; family < 5; ++family) {
    ExperimentSpec spec = default_desk_spec();
    spec.run.seed = 42 + 1000 * static_cast<std::uint64_t>(family);

    bool family_ok = true;
    for (const HeuristicKind kind :
         {HeuristicKind::FairAvg, HeuristicKind::FairAccAvg}) {
      std::vector<double> med_eo, med_acc;
      for (double alpha : alphas) {
        const HeuristicOutcome out =
            run_heuristic(spec, {kind, alpha, FairnessNotion::EqualizedOdds});
        med_eo.push_back(out.median_eo_pct);
        med_acc.push_back(out.median_acc_pct);
      }
      if (test::spearman(alphas, med_eo) <= 0.0) family_ok = false;
      if (test::spearman(alphas, med_acc) <= 0.0) family_ok = false;
    }
    if (family_ok) ++good_families;
  }
  check.require(good_families >= 4,
                "only " + std::to_string(good_families) +
                    " of 5 seed families show the positive alpha trend");
}

// ---------------------------------------------------------------------------
// Criterion 8: two executions of compare over the same config write
// byte-identical summaries.

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void criterion_compare_determinism(Check& check) {
  test::TempDir dir("accept_compare");
  ExperimentSpec spec = default_desk_spec();
  spec.name = "det";
  spec.repeats = 2;
  spec.synth->num_samples = 2000;
  spec.run.rounds = 8;

  ExperimentSpec first = spec;
  first.out_dir = (dir.path() / "a").string();
  ExperimentSpec second = spec;
  second.out_dir = (dir.path() / "b").string();
  cmd_compare(first);
  cmd_compare(second);

  const std::string csv_a =
      read_file(std::filesystem::path(first.out_dir) / "det/summary.csv");
  const std::string csv_b =
      read_file(std::filesystem::path(second.out_dir) / "det/summary.csv");
  check.require(!csv_a.empty() && csv_a == csv_b,
                "summary.csv differs between identical compare executions");
  const std::string json_a =
      read_file(std::filesystem::path(first.out_dir) / "det/summary.json");
  const std::string json_b =
      read_file(std::filesystem::path(second.out_dir) / "det/summary.json");
  check.require(!json_a.empty() && json_a == json_b,
                "summary.json differs between identical compare executions");
}

// ---------------------------------------------------------------------------
// Criterion 9: identity-covariance points reduce to Euclidean distances, and
// coordinate scaling never reorders the ranking.

void criterion_mahalanobis(Check& check) {
  const double r = std::sqrt(2.0);
  const std::vector<std::pair<double, double>> points = {
      {3.0, 4.0}, {3.0 + r, 4.0}, {3.0 - r, 4.0}, {3.0, 4.0 + r},
      {3.0, 4.0 - r}};
  const auto distances = mahalanobis_rank(points);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double euclid = std::hypot(points[i].first, points[i].second);
    check.require(std::fabs(distances[i] - euclid) <= 1e-9,
                  "identity-covariance distance " + std::to_string(i) +
                      " deviates from the Euclidean norm");
  }

  std::mt19937_64 rng(8);
  std::normal_distribution<double> coord(1.0, 2.0);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<std::pair<double, double>> cloud;
    for (int i = 0; i < 7; ++i) cloud.emplace_back(coord(rng), coord(rng));
    std::vector<std::pair<double, double>> scaled;
    for (const auto& [x, y] : cloud) scaled.emplace_back(3.0 * x, 3.0 * y);
    const auto base = mahalanobis_rank(cloud);
    const auto big = mahalanobis_rank(scaled);
    auto argsort = [](const std::vector<double>& v) {
      std::vector<std::size_t> idx(v.size());
      for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
      std::sort(idx.begin(), idx.end(),
                [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
      return idx;
    };
    check.require(argsort(base) == argsort(big),
                  "scaling changed the ranking at trial " +
                      std::to_string(trial));
  }
}

// ---------------------------------------------------------------------------
// Criterion 10: every summary CoV is recomputable from the per-repeat files
// within 1e-12.

void criterion_cov_reporting(Check& check) {
  test::TempDir dir("accept_cov");
  ExperimentSpec spec = default_desk_spec();
  spec.name = "cov";
  spec.repeats = 3;
  spec.synth->num_samples = 2000;
  spec.run.rounds = 8;
  spec.out_dir = (dir.path() / "out").string();
  cmd_run(spec);

  const auto base = std::filesystem::path(spec.out_dir) / "cov";
  const std::string label = spec.run.heuristic.label();
  std::vector<double> acc, eopp, eo, ap;
  for (int r = 0; r < spec.repeats; ++r) {
    const auto doc = nlohmann::json::parse(
        read_file(base / label / (std::to_string(r) + ".json")));
    const auto& rep = doc["final_agg_report"];
    acc.push_back(100.0 * rep["accuracy"].get<double>());
    eopp.push_back(100.0 * rep["delta_eopp"].get<double>());
    eo.push_back(100.0 * rep["delta_eo"].get<double>());
    ap.push_back(100.0 * rep["delta_ap"].get<double>());
  }

  const auto summary = nlohmann::json::parse(read_file(base / "summary.json"));
  const auto& row = summary["rows"][0];
  const struct {
    const char* key;
    const std::vector<double>* values;
  } metrics[] = {{"accuracy", &acc},
                 {"d_eopp", &eopp},
                 {"d_eo", &eo},
                 {"d_ap", &ap}};
  for (const auto& metric : metrics) {
    const auto& cell = row[metric.key]["cov"];
    if (cell.is_null()) {
      bool uncomputable = false;
      try {
        (void)coefficient_of_variation(*metric.values);
      } catch (const DomainError&) {
        uncomputable = true;  // zero mean: the summary rightly omits it
      }
      check.require(uncomputable, std::string("summary omitted a computable "
                                              "CoV for ") +
                                      metric.key);
      continue;
    }
    const double recomputed = coefficient_of_variation(*metric.values);
    check.require(std::fabs(cell.get<double>() - recomputed) <= 1e-12,
                  std::string("CoV mismatch for ") + metric.key);
  }
}

}  // namespace

int main() {
  setenv("FAIRFED_LOG", "quiet", /*overwrite=*/0);
  struct Criterion {
    int id;
    const char* name;
    std::function<void(Check&)> fn;
  };
  const std::vector<Criterion> criteria = {
      {1, "metric oracle equivalence", criterion_metric_oracle},
      {2, "undefined fairness loss classification", criterion_undefined_loss},
      {3, "alpha=100 FedAvg limit", criterion_fedavg_limit},
      {4, "stopping-rule hand traces", criterion_stop_traces},
      {5, "gradient finite-difference checks", criterion_gradients},
      {6, "desk-scale fairness reproduction", criterion_desk_reproduction},
      {7, "alpha trade-off direction", criterion_alpha_direction},
      {8, "compare determinism", criterion_compare_determinism},
      {9, "mahalanobis sanity", criterion_mahalanobis},
      {10, "CoV reporting", criterion_cov_reporting},
  };

  int failed = 0;
  for (const Criterion& criterion : criteria) {
    Check check;
    const auto start = std::chrono::steady_clock::now();
    try {
      criterion.fn(check);
    } catch (const std::exception& e) {
      check.failures.push_back(std::string("exception: ") + e.what());
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (check.failures.empty()) {
      std::printf("[PASS] criterion %2d: %s (%.2f s)\n", criterion.id,
                  criterion.name, seconds);
    } else {
      ++failed;
      std::printf("[FAIL] criterion %2d: %s (%.2f s)\n", criterion.id,
                  criterion.name, seconds);
      for (const std::string& failure : check.failures) {
        std::printf("       - %s\n", failure.c_str());
      }
    }
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
