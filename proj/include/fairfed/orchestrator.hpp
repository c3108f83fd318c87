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

#ifndef FAIRFED_ORCHESTRATOR_HPP_
#define FAIRFED_ORCHESTRATOR_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "fairfed/aggregation.hpp"
#include "fairfed/dataset.hpp"
#include "fairfed/fairness.hpp"
#include "fairfed/model.hpp"

namespace fairfed {

struct RunConfig {
  int num_clients = 0;
  int rounds = 0;            // T; the round loop executes t = 1 .. T-1
  int local_epochs = 1;      // E
  double learning_rate = 0.1;
  int batch_size = 32;
  Architecture arch;
  HeuristicSpec heuristic;
  double accuracy_tolerance = 1.0;  // a, in percentage points
  int threshold_round = 1;          // tau
  double participation = 1.0;       // fraction of clients per round
  std::uint64_t seed = 0;
  double lambda = 0.0;              // fairness penalty for LMM runs
  double decision_threshold = 0.5;
  // Widens the FairCheck branch to 0 < delta_acc <= a and stops only after
  // the tolerance condition holds for threshold_round consecutive rounds.
  bool fair_check_band = false;
  std::optional<double> time_budget_seconds;

  void validate() const;
};

struct ClientScore {
  int client_id = 0;
  double accuracy = 0.0;
  std::optional<double> delta;
};

// One communication round: round t produces and evaluates the new global.
struct RoundLog {
  int round = 0;
  std::vector<int> selected;        // S_t, the participating clients
  std::vector<int> aggregated;      // clients merged into the new global
  std::vector<ClientScore> scores;  // per-client scores on the aggregator set
  double acc_agg = 0.0;             // accuracy of the new global (rate)
  std::optional<double> acc_test;
  std::optional<double> d_eopp, d_eo, d_ap;                 // aggregator set
  std::optional<double> d_eopp_test, d_eo_test, d_ap_test;  // test set
  std::optional<double> d_acc;  // stopping-rule accuracy change, pct points
  bool phi_best_updated = false;
  bool fair_check_invoked = false;
  std::optional<bool> fair_check_kept_incumbent;
  std::optional<double> fair_check_delta_incumbent;
  std::optional<double> fair_check_delta_challenger;
  bool stopped = false;
};

struct RunResult {
  ModelParams final_params;  // the tracked best global
  int stop_round = 0;        // last executed round; logs cover 1..stop_round
  std::vector<RoundLog> logs;
  RunConfig config;
  FairnessReport final_agg_report;
  std::optional<FairnessReport> final_test_report;
  double wall_seconds = 0.0;
};

// Test seam: when set, replaces the accuracy that feeds the stopping rule
// (and the logged acc_agg) for the global model of each round, starting at
// round 1 with the initial parameters.
struct RunHooks {
  std::function<double(int round, const ModelParams& params)> accuracy_override;
};

// Runs the federated round loop: every selected client trains from the
// current global for local_epochs of cross-entropy SGD, the heuristic
// aggregates on the aggregator set, and for t > threshold_round the
// accuracy-tolerance rule decides between stopping, replacing the tracked
// best model, or a FairCheck between the incumbent and the new global.
RunResult run_federated(const RunConfig& cfg,
                        const std::vector<Dataset>& train_shards,
                        const Dataset& agg_set,
                        const Dataset* test_set = nullptr,
                        const RunHooks* hooks = nullptr);

// Single pooled client under FedAvg; same logging.
RunResult run_centralized(const RunConfig& cfg, const Dataset& full_train,
                          const Dataset& agg_set,
                          const Dataset* test_set = nullptr);

// As run_federated, but clients minimize the penalized objective
// (cross-entropy plus cfg.lambda times the fairness violation) and
// aggregation is fixed to FedAvg. Every shard must be group-complete for
// cfg.heuristic.notion; a single-group shard raises UndefinedFairnessLoss
// naming the client.
RunResult run_oracle_lmm(const RunConfig& cfg,
                         const std::vector<Dataset>& train_shards,
                         const Dataset& agg_set,
                         const Dataset* test_set = nullptr);

}  // namespace fairfed

#endif  // FAIRFED_ORCHESTRATOR_HPP_
