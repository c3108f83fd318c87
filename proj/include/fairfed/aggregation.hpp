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

#ifndef FAIRFED_AGGREGATION_HPP_
#define FAIRFED_AGGREGATION_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fairfed/dataset.hpp"
#include "fairfed/fairness.hpp"
#include "fairfed/model.hpp"
#include "fairfed/notion.hpp"

namespace fairfed {

struct ClientSubmission {
  int client_id = 0;
  ModelParams params;
  std::int64_t num_samples = 0;
};

enum class HeuristicKind { FedAvg, FairBest, FairAvg, FairAccAvg };

const char* heuristic_kind_name(HeuristicKind kind);
HeuristicKind parse_heuristic_kind(const std::string& text);

// Which choice function the aggregator runs, plus the fairness notion its
// scoring uses. alpha (a percentage in (0,100]) is required by FairAvg and
// FairAccAvg and must be absent otherwise.
struct HeuristicSpec {
  HeuristicKind kind = HeuristicKind::FedAvg;
  std::optional<double> alpha;
  FairnessNotion notion = FairnessNotion::EqualizedOdds;

  void validate() const;
  // "FedAvg", "FairBest", "10-FairAvg", "2.5-FairAccAvg", ...
  std::string label() const;
};

struct ScoredSubmission {
  ClientSubmission submission;
  double accuracy = 0.0;                 // on the aggregator set
  std::optional<double> delta;           // violation on the aggregator set
};

// Scores every submission on the aggregator set, order preserved. Throws
// ScoringError when the aggregator set is not group-complete for the notion.
std::vector<ScoredSubmission> score_submissions(
    const std::vector<ClientSubmission>& submissions, const Dataset& agg_set,
    FairnessNotion notion, double threshold = 0.5);

// Element-wise weighted mean with weights n_i / sum(n_j), accumulated in
// ascending client_id order.
ModelParams fed_avg(const std::vector<ClientSubmission>& submissions);

// Parameters of the submission with the smallest violation; ties broken by
// lowest client_id. Throws SelectionError when every delta is UNDEFINED.
ModelParams fair_best(const std::vector<ScoredSubmission>& scored);

// The ceil(alpha/100 * |scored|) submissions with the smallest violation
// (minimum one; UNDEFINED deltas excluded), ids in ascending client_id order.
std::vector<int> fair_avg_selection(const std::vector<ScoredSubmission>& scored,
                                    double alpha);

// Same size rule, ranked by descending accuracy / max(delta, 1e-6).
std::vector<int> fair_acc_avg_selection(
    const std::vector<ScoredSubmission>& scored, double alpha);

// Weighted mean over the fair_avg_selection set.
ModelParams fair_avg(const std::vector<ScoredSubmission>& scored, double alpha);

// Weighted mean over the fair_acc_avg_selection set.
ModelParams fair_acc_avg(const std::vector<ScoredSubmission>& scored,
                         double alpha);

// Returns whichever of a and b has the smaller violation on the aggregator
// set; ties keep a (the incumbent).
ModelParams fair_check(const ModelParams& a, const ModelParams& b,
                       const Dataset& agg_set, FairnessNotion notion,
                       double threshold = 0.5);

struct AggregationOutcome {
  ModelParams params;
  std::vector<ScoredSubmission> scored;  // empty for FedAvg (never scored)
  std::vector<int> aggregated_ids;       // ascending client_id
};

// Routes to the heuristic named by spec; FedAvg skips scoring entirely.
AggregationOutcome aggregate(const HeuristicSpec& spec,
                             const std::vector<ClientSubmission>& submissions,
                             const Dataset& agg_set, double threshold = 0.5);

// Spec-routed aggregation returning just the new global parameters.
ModelParams dispatch(const HeuristicSpec& spec,
                     const std::vector<ClientSubmission>& submissions,
                     const Dataset& agg_set, double threshold = 0.5);

}  // namespace fairfed

#endif  // FAIRFED_AGGREGATION_HPP_
