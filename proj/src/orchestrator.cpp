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

#include "fairfed/orchestrator.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <numeric>
#include <random>
#include <string>
#include <thread>

#include "fairfed/errors.hpp"
#include "fairfed/rng.hpp"

namespace fairfed {

namespace {

// Seed streams for the independent RNG consumers of a run.
constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kParticipationStream = 2;
constexpr std::uint64_t kClientStream = 3;

// Comparison band for the literal delta_acc == a branch.
constexpr double kEqualityBand = 1e-12;

std::vector<int> select_clients(int num_clients, double participation,
                                std::uint64_t seed, int round) {
  int k = static_cast<int>(std::llround(participation * num_clients));
  k = std::clamp(k, 1, num_clients);
  std::vector<int> ids(num_clients);
  std::iota(ids.begin(), ids.end(), 0);
  if (k == num_clients) return ids;
  std::mt19937_64 rng(derive_seed(seed, kParticipationStream,
                                  static_cast<std::uint64_t>(round)));
  std::shuffle(ids.begin(), ids.end(), rng);
  ids.resize(k);
  std::sort(ids.begin(), ids.end());
  return ids;
}

// Trains the selected clients, possibly concurrently. Results land in slots
// keyed by selection position, so the outcome is independent of scheduling.
std::vector<ClientSubmission> train_selected(
    const RunConfig& cfg, const std::vector<Dataset>& shards,
    const std::vector<int>& selected, const ModelParams& global, int round,
    bool lmm) {
  const std::size_t n = selected.size();
  std::vector<ClientSubmission> out(n);
  std::vector<std::exception_ptr> failures(n);

  auto train_one = [&](std::size_t slot) {
    const int client = selected[slot];
    TrainConfig tc;
    tc.epochs = cfg.local_epochs;
    tc.learning_rate = cfg.learning_rate;
    tc.batch_size = cfg.batch_size;
    tc.seed = derive_seed(cfg.seed, kClientStream,
                          static_cast<std::uint64_t>(client),
                          static_cast<std::uint64_t>(round));
    tc.lambda = cfg.lambda;
    tc.notion = cfg.heuristic.notion;
    const Dataset& shard = shards[client];
    ClientSubmission sub;
    sub.client_id = client;
    sub.num_samples = static_cast<std::int64_t>(shard.samples.size());
    sub.params = lmm ? local_train_lmm(global, shard, tc)
                     : local_train_ce(global, shard, tc);
    out[slot] = std::move(sub);
  };

  const unsigned workers = std::min<unsigned>(
      std::max(1u, std::thread::hardware_concurrency()), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        train_one(i);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          train_one(i);
        } catch (...) {
          failures[i] = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  // Surface the failure of the lowest client id, with client/round context.
  for (std::size_t i = 0; i < n; ++i) {
    if (!failures[i]) continue;
    const std::string where = "client " + std::to_string(selected[i]) +
                              ", round " + std::to_string(round) + ": ";
    try {
      std::rethrow_exception(failures[i]);
    } catch (const DivergenceError& e) {
      throw DivergenceError(where + e.what());
    } catch (const UndefinedFairnessLoss& e) {
      throw UndefinedFairnessLoss(where + e.what());
    } catch (const Error& e) {
      throw Error(where + e.what());
    }
  }
  return out;
}

RunResult run_impl(const RunConfig& cfg, const std::vector<Dataset>& shards,
                   const Dataset& agg_set, const Dataset* test_set,
                   const RunHooks* hooks, bool lmm) {
  cfg.validate();
  if (static_cast<int>(shards.size()) != cfg.num_clients) {
    throw ConfigError("expected " + std::to_string(cfg.num_clients) +
                      " shards, got " + std::to_string(shards.size()));
  }
  for (std::size_t i = 0; i < shards.size(); ++i) {
    validate_dataset(shards[i]);
    if (shards[i].feature_dim != cfg.arch.input_dim) {
      throw ConfigError("shard " + std::to_string(i) + " feature_dim " +
                        std::to_string(shards[i].feature_dim) +
                        " does not match model input_dim " +
                        std::to_string(cfg.arch.input_dim));
    }
  }
  validate_dataset(agg_set);
  if (agg_set.feature_dim != cfg.arch.input_dim) {
    throw ConfigError("aggregator set feature_dim does not match model input_dim");
  }
  if (!is_group_complete(agg_set, cfg.heuristic.notion)) {
    throw ConfigError(std::string("aggregator set is not group-complete for "
                                  "notion ") + notion_name(cfg.heuristic.notion));
  }
  if (test_set) validate_dataset(*test_set);

  if (lmm) {
    for (std::size_t i = 0; i < shards.size(); ++i) {
      try {
        require_group_complete(shards[i], cfg.heuristic.notion);
      } catch (const UndefinedFairnessLoss& e) {
        throw UndefinedFairnessLoss("client " + std::to_string(i) + ": " +
                                    e.what());
      }
    }
  }

  const auto t_start = std::chrono::steady_clock::now();
  auto elapsed = [&]() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         t_start)
        .count();
  };

  // The LMM oracle always aggregates with FedAvg.
  HeuristicSpec effective = cfg.heuristic;
  if (lmm) {
    effective.kind = HeuristicKind::FedAvg;
    effective.alpha.reset();
  }

  auto stopping_accuracy = [&](int round, const ModelParams& p,
                               const FairnessReport& report) {
    if (hooks && hooks->accuracy_override) {
      return hooks->accuracy_override(round, p);
    }
    return report.accuracy;
  };

  RunResult result;
  result.config = cfg;

  ModelParams global = init_params(cfg.arch, derive_seed(cfg.seed, kInitStream));
  ModelParams phi_best = global;

  // acc_history[t] is the stopping-rule accuracy of the round-t global;
  // index 1 holds the shared initialization.
  std::vector<double> acc_history(1, 0.0);
  {
    const FairnessReport init_report =
        evaluate(global, agg_set, cfg.decision_threshold);
    acc_history.push_back(stopping_accuracy(1, global, init_report));
  }

  int stall_rounds = 0;
  for (int t = 1; t <= cfg.rounds - 1; ++t) {
    if (cfg.time_budget_seconds.has_value() &&
        elapsed() > *cfg.time_budget_seconds) {
      throw Error("wall-clock budget of " +
                  std::to_string(*cfg.time_budget_seconds) +
                  " s exceeded at round " + std::to_string(t));
    }

    const std::vector<int> selected =
        select_clients(cfg.num_clients, cfg.participation, cfg.seed, t);
    const std::vector<ClientSubmission> submissions =
        train_selected(cfg, shards, selected, global, t, lmm);

    AggregationOutcome outcome =
        aggregate(effective, submissions, agg_set, cfg.decision_threshold);
    ModelParams& next_global = outcome.params;

    const FairnessReport report =
        evaluate(next_global, agg_set, cfg.decision_threshold);
    const double acc_next = stopping_accuracy(t + 1, next_global, report);
    acc_history.push_back(acc_next);

    RoundLog log;
    log.round = t;
    log.selected = selected;
    log.aggregated = std::move(outcome.aggregated_ids);
    log.scores.reserve(outcome.scored.size());
    for (const ScoredSubmission& s : outcome.scored) {
      log.scores.push_back({s.submission.client_id, s.accuracy, s.delta});
    }
    log.acc_agg = acc_next;
    log.d_eopp = report.delta_eopp;
    log.d_eo = report.delta_eo;
    log.d_ap = report.delta_ap;
    if (test_set) {
      const FairnessReport test_report =
          evaluate(next_global, *test_set, cfg.decision_threshold);
      log.acc_test = test_report.accuracy;
      log.d_eopp_test = test_report.delta_eopp;
      log.d_eo_test = test_report.delta_eo;
      log.d_ap_test = test_report.delta_ap;
    }

    bool stop = false;
    if (t > cfg.threshold_round) {
      double trailing_best = acc_history[t - 1];
      for (int back = 2; back <= cfg.threshold_round; ++back) {
        trailing_best = std::max(trailing_best, acc_history[t - back]);
      }
      const double delta_acc = 100.0 * std::fabs(acc_history[t] - trailing_best);
      log.d_acc = delta_acc;

      auto run_fair_check = [&]() {
        log.fair_check_invoked = true;
        const auto incumbent = violation(
            evaluate(phi_best, agg_set, cfg.decision_threshold),
            cfg.heuristic.notion);
        const auto challenger = violation(report, cfg.heuristic.notion);
        log.fair_check_delta_incumbent = incumbent;
        log.fair_check_delta_challenger = challenger;
        if (challenger.has_value() && incumbent.has_value() &&
            *challenger < *incumbent) {
          phi_best = next_global;
          log.phi_best_updated = true;
          log.fair_check_kept_incumbent = false;
        } else {
          log.fair_check_kept_incumbent = true;
        }
      };

      if (!cfg.fair_check_band) {
        if (std::fabs(delta_acc - cfg.accuracy_tolerance) <= kEqualityBand) {
          run_fair_check();
        } else if (delta_acc < cfg.accuracy_tolerance) {
          stop = true;
        } else {
          phi_best = next_global;
          log.phi_best_updated = true;
        }
      } else {
        if (delta_acc > cfg.accuracy_tolerance) {
          phi_best = next_global;
          log.phi_best_updated = true;
          stall_rounds = 0;
        } else {
          if (delta_acc > 0.0) run_fair_check();
          ++stall_rounds;
          if (stall_rounds >= cfg.threshold_round) stop = true;
        }
      }
    } else {
      phi_best = next_global;
      log.phi_best_updated = true;
    }

    log.stopped = stop;
    result.logs.push_back(std::move(log));
    result.stop_round = t;
    global = std::move(next_global);
    if (stop) break;
  }

  result.final_params = phi_best;
  result.final_agg_report =
      evaluate(phi_best, agg_set, cfg.decision_threshold);
  if (test_set) {
    result.final_test_report =
        evaluate(phi_best, *test_set, cfg.decision_threshold);
  }
  result.wall_seconds = elapsed();
  return result;
}

}  // namespace

void RunConfig::validate() const {
  if (num_clients < 1) throw ConfigError("num_clients must be >= 1");
  if (threshold_round < 1) throw ConfigError("threshold_round must be >= 1");
  if (rounds <= threshold_round) {
    throw ConfigError("rounds must exceed threshold_round (rounds=" +
                      std::to_string(rounds) + ", threshold_round=" +
                      std::to_string(threshold_round) + ")");
  }
  if (!(accuracy_tolerance > 0.0)) {
    throw ConfigError("accuracy_tolerance must be positive");
  }
  if (!(participation > 0.0 && participation <= 1.0)) {
    throw ConfigError("participation must lie in (0, 1]");
  }
  if (local_epochs < 1) throw ConfigError("local_epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be finite and >= 0");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ConfigError("lambda must be finite and >= 0");
  }
  validate_arch(arch);
  heuristic.validate();
}

RunResult run_federated(const RunConfig& cfg,
                        const std::vector<Dataset>& train_shards,
                        const Dataset& agg_set, const Dataset* test_set,
                        const RunHooks* hooks) {
  return run_impl(cfg, train_shards, agg_set, test_set, hooks, /*lmm=*/false);
}

RunResult run_centralized(const RunConfig& cfg, const Dataset& full_train,
                          const Dataset& agg_set, const Dataset* test_set) {
  RunConfig pooled = cfg;
  pooled.num_clients = 1;
  pooled.participation = 1.0;
  pooled.heuristic.kind = HeuristicKind::FedAvg;
  pooled.heuristic.alpha.reset();
  return run_impl(pooled, {full_train}, agg_set, test_set, nullptr,
                  /*lmm=*/false);
}

RunResult run_oracle_lmm(const RunConfig& cfg,
                         const std::vector<Dataset>& train_shards,
                         const Dataset& agg_set, const Dataset* test_set) {
  return run_impl(cfg, train_shards, agg_set, test_set, nullptr, /*lmm=*/true);
}

}  // namespace fairfed
