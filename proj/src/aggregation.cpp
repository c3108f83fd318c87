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

#include "fairfed/aggregation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <unordered_set>

#include "fairfed/errors.hpp"

namespace fairfed {

namespace {

// Floor for the violation denominator in the accuracy/violation ratio, so
// zero-violation models rank by accuracy among themselves.
constexpr double kRatioEpsilon = 1e-6;

void check_same_arch(const std::vector<ClientSubmission>& submissions) {
  if (submissions.empty()) {
    throw ConfigError("aggregation requires at least one submission");
  }
  std::unordered_set<int> seen;
  for (const ClientSubmission& s : submissions) {
    if (s.num_samples < 1) {
      throw ConfigError("client " + std::to_string(s.client_id) +
                        " submitted num_samples < 1");
    }
    if (!(s.params.arch == submissions.front().params.arch)) {
      throw ConfigError("client " + std::to_string(s.client_id) +
                        " submitted a mismatched architecture");
    }
    if (!seen.insert(s.client_id).second) {
      throw ConfigError("duplicate client_id " + std::to_string(s.client_id));
    }
  }
}

// Weighted mean over the referenced submissions, accumulated in ascending
// client_id order so results do not depend on input order.
ModelParams weighted_mean(std::vector<const ClientSubmission*> members) {
  std::sort(members.begin(), members.end(),
            [](const ClientSubmission* a, const ClientSubmission* b) {
              return a->client_id < b->client_id;
            });
  std::int64_t total = 0;
  for (const ClientSubmission* m : members) total += m->num_samples;

  ModelParams out;
  out.arch = members.front()->params.arch;
  out.values.assign(members.front()->params.values.size(), 0.0);
  for (const ClientSubmission* m : members) {
    const double w =
        static_cast<double>(m->num_samples) / static_cast<double>(total);
    for (std::size_t j = 0; j < out.values.size(); ++j) {
      out.values[j] += w * m->params.values[j];
    }
  }
  return out;
}

std::size_t selection_size(std::size_t total, double alpha) {
  if (!(alpha > 0.0 && alpha <= 100.0)) {
    throw ConfigError("alpha must lie in (0, 100]");
  }
  const auto k = static_cast<std::size_t>(
      std::ceil(alpha * static_cast<double>(total) / 100.0));
  return std::max<std::size_t>(k, 1);
}

// Indices of scored submissions with a defined delta, ordered by the given
// comparator, truncated to k entries.
template <typename Less>
std::vector<std::size_t> ranked_defined(
    const std::vector<ScoredSubmission>& scored, std::size_t k, Less less) {
  if (scored.empty()) {
    throw ConfigError("selection requires at least one scored submission");
  }
  std::vector<std::size_t> defined;
  for (std::size_t i = 0; i < scored.size(); ++i) {
    if (scored[i].delta.has_value()) defined.push_back(i);
  }
  if (defined.empty()) {
    throw SelectionError("every submission has an UNDEFINED violation");
  }
  std::sort(defined.begin(), defined.end(), less);
  defined.resize(std::min(k, defined.size()));
  return defined;
}

std::vector<std::size_t> fairness_ranked(
    const std::vector<ScoredSubmission>& scored, std::size_t k) {
  return ranked_defined(scored, k, [&](std::size_t a, std::size_t b) {
    if (*scored[a].delta != *scored[b].delta) {
      return *scored[a].delta < *scored[b].delta;
    }
    return scored[a].submission.client_id < scored[b].submission.client_id;
  });
}

std::vector<std::size_t> ratio_ranked(
    const std::vector<ScoredSubmission>& scored, std::size_t k) {
  auto key = [&](std::size_t i) {
    return scored[i].accuracy / std::max(*scored[i].delta, kRatioEpsilon);
  };
  return ranked_defined(scored, k, [&](std::size_t a, std::size_t b) {
    const double ka = key(a);
    const double kb = key(b);
    if (ka != kb) return ka > kb;
    return scored[a].submission.client_id < scored[b].submission.client_id;
  });
}

std::vector<int> ids_of(const std::vector<ScoredSubmission>& scored,
                        const std::vector<std::size_t>& indices) {
  std::vector<int> ids;
  ids.reserve(indices.size());
  for (std::size_t i : indices) ids.push_back(scored[i].submission.client_id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

ModelParams mean_of(const std::vector<ScoredSubmission>& scored,
                    const std::vector<std::size_t>& indices) {
  std::vector<const ClientSubmission*> members;
  members.reserve(indices.size());
  for (std::size_t i : indices) members.push_back(&scored[i].submission);
  return weighted_mean(std::move(members));
}

}  // namespace

const char* heuristic_kind_name(HeuristicKind kind) {
  switch (kind) {
    case HeuristicKind::FedAvg: return "FedAvg";
    case HeuristicKind::FairBest: return "FairBest";
    case HeuristicKind::FairAvg: return "FairAvg";
    case HeuristicKind::FairAccAvg: return "FairAccAvg";
  }
  return "?";
}

HeuristicKind parse_heuristic_kind(const std::string& text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "fedavg") return HeuristicKind::FedAvg;
  if (lower == "fairbest") return HeuristicKind::FairBest;
  if (lower == "fairavg") return HeuristicKind::FairAvg;
  if (lower == "fairaccavg") return HeuristicKind::FairAccAvg;
  throw ConfigError("unknown heuristic '" + text + "'");
}

void HeuristicSpec::validate() const {
  const bool needs_alpha =
      kind == HeuristicKind::FairAvg || kind == HeuristicKind::FairAccAvg;
  if (needs_alpha) {
    if (!alpha.has_value()) {
      throw ConfigError(std::string(heuristic_kind_name(kind)) +
                        " requires alpha");
    }
    if (!(*alpha > 0.0 && *alpha <= 100.0)) {
      throw ConfigError("alpha must lie in (0, 100]");
    }
  } else if (alpha.has_value()) {
    throw ConfigError(std::string(heuristic_kind_name(kind)) +
                      " does not take alpha");
  }
}

std::string HeuristicSpec::label() const {
  if (!alpha.has_value()) return heuristic_kind_name(kind);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", *alpha);
  return std::string(buf) + "-" + heuristic_kind_name(kind);
}

std::vector<ScoredSubmission> score_submissions(
    const std::vector<ClientSubmission>& submissions, const Dataset& agg_set,
    FairnessNotion notion, double threshold) {
  check_same_arch(submissions);
  if (!is_group_complete(agg_set, notion)) {
    throw ScoringError(std::string("aggregator set is not group-complete for "
                                   "notion ") + notion_name(notion));
  }
  std::vector<ScoredSubmission> scored;
  scored.reserve(submissions.size());
  for (const ClientSubmission& sub : submissions) {
    const FairnessReport report = evaluate(sub.params, agg_set, threshold);
    scored.push_back({sub, report.accuracy, violation(report, notion)});
  }
  return scored;
}

ModelParams fed_avg(const std::vector<ClientSubmission>& submissions) {
  check_same_arch(submissions);
  std::vector<const ClientSubmission*> members;
  members.reserve(submissions.size());
  for (const ClientSubmission& s : submissions) members.push_back(&s);
  return weighted_mean(std::move(members));
}

ModelParams fair_best(const std::vector<ScoredSubmission>& scored) {
  return mean_of(scored, fairness_ranked(scored, 1));
}

std::vector<int> fair_avg_selection(const std::vector<ScoredSubmission>& scored,
                                    double alpha) {
  return ids_of(scored, fairness_ranked(scored, selection_size(scored.size(), alpha)));
}

std::vector<int> fair_acc_avg_selection(
    const std::vector<ScoredSubmission>& scored, double alpha) {
  return ids_of(scored, ratio_ranked(scored, selection_size(scored.size(), alpha)));
}

ModelParams fair_avg(const std::vector<ScoredSubmission>& scored,
                     double alpha) {
  return mean_of(scored, fairness_ranked(scored, selection_size(scored.size(), alpha)));
}

ModelParams fair_acc_avg(const std::vector<ScoredSubmission>& scored,
                         double alpha) {
  return mean_of(scored, ratio_ranked(scored, selection_size(scored.size(), alpha)));
}

ModelParams fair_check(const ModelParams& a, const ModelParams& b,
                       const Dataset& agg_set, FairnessNotion notion,
                       double threshold) {
  if (!(a.arch == b.arch)) {
    throw ConfigError("fair_check candidates have mismatched architectures");
  }
  if (!is_group_complete(agg_set, notion)) {
    throw ScoringError(std::string("aggregator set is not group-complete for "
                                   "notion ") + notion_name(notion));
  }
  const auto va = violation(evaluate(a, agg_set, threshold), notion);
  const auto vb = violation(evaluate(b, agg_set, threshold), notion);
  return *vb < *va ? b : a;
}

AggregationOutcome aggregate(const HeuristicSpec& spec,
                             const std::vector<ClientSubmission>& submissions,
                             const Dataset& agg_set, double threshold) {
  spec.validate();
  check_same_arch(submissions);

  AggregationOutcome outcome;
  if (spec.kind == HeuristicKind::FedAvg) {
    outcome.params = fed_avg(submissions);
    outcome.aggregated_ids.reserve(submissions.size());
    for (const ClientSubmission& s : submissions) {
      outcome.aggregated_ids.push_back(s.client_id);
    }
    std::sort(outcome.aggregated_ids.begin(), outcome.aggregated_ids.end());
    return outcome;
  }

  outcome.scored = score_submissions(submissions, agg_set, spec.notion, threshold);
  switch (spec.kind) {
    case HeuristicKind::FairBest: {
      const auto picked = fairness_ranked(outcome.scored, 1);
      outcome.params = mean_of(outcome.scored, picked);
      outcome.aggregated_ids = ids_of(outcome.scored, picked);
      break;
    }
    case HeuristicKind::FairAvg: {
      const auto picked = fairness_ranked(
          outcome.scored, selection_size(outcome.scored.size(), *spec.alpha));
      outcome.params = mean_of(outcome.scored, picked);
      outcome.aggregated_ids = ids_of(outcome.scored, picked);
      break;
    }
    case HeuristicKind::FairAccAvg: {
      const auto picked = ratio_ranked(
          outcome.scored, selection_size(outcome.scored.size(), *spec.alpha));
      outcome.params = mean_of(outcome.scored, picked);
      outcome.aggregated_ids = ids_of(outcome.scored, picked);
      break;
    }
    case HeuristicKind::FedAvg:
      break;  // handled above
  }
  return outcome;
}

ModelParams dispatch(const HeuristicSpec& spec,
                     const std::vector<ClientSubmission>& submissions,
                     const Dataset& agg_set, double threshold) {
  return aggregate(spec, submissions, agg_set, threshold).params;
}

}  // namespace fairfed
