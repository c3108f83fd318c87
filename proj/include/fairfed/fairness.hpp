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

#ifndef FAIRFED_FAIRNESS_HPP_
#define FAIRFED_FAIRNESS_HPP_

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "fairfed/dataset.hpp"
#include "fairfed/model.hpp"
#include "fairfed/notion.hpp"

namespace fairfed {

struct ConfusionCounts {
  std::int64_t true_pos = 0;
  std::int64_t false_pos = 0;
  std::int64_t true_neg = 0;
  std::int64_t false_neg = 0;

  std::int64_t total() const {
    return true_pos + false_pos + true_neg + false_neg;
  }
  std::int64_t positives() const { return true_pos + false_neg; }
  std::int64_t negatives() const { return true_neg + false_pos; }
};

struct GroupConfusion {
  std::vector<ConfusionCounts> groups;  // one entry per declared group
  ConfusionCounts overall;
};

// Hard-prediction fairness evaluation of one model on one dataset.
// A rate whose denominator is zero is UNDEFINED (nullopt), and undefinedness
// propagates into every delta depending on it; accuracy is always defined.
//
// Deltas follow the signed-gap-versus-overall form:
//   delta_eopp = max_g (FNR_g - FNR)
//   delta_eo   = max(max_g (FPR_g - FPR), max_g (FNR_g - FNR))
//   delta_ap   = max_g (FPR_g - FPR) + max_g (FNR_g - FNR)
struct FairnessReport {
  double accuracy = 0.0;
  std::optional<double> fnr;
  std::optional<double> fpr;
  std::vector<std::optional<double>> group_fnr;
  std::vector<std::optional<double>> group_fpr;
  std::optional<double> delta_eopp;
  std::optional<double> delta_eo;
  std::optional<double> delta_ap;
};

// Integer tallies per group and overall; predictions[i] pairs with sample i.
GroupConfusion tally_confusion(const Dataset& data,
                               const std::vector<int>& predictions);

FairnessReport report_from_confusion(const GroupConfusion& confusion);

FairnessReport evaluate_predictions(const Dataset& data,
                                    const std::vector<int>& predictions);

// Predictions are 1[predict_proba >= threshold].
FairnessReport evaluate(const ModelParams& params, const Dataset& data,
                        double threshold = 0.5);

std::optional<double> violation(const FairnessReport& report,
                                FairnessNotion notion);

// Sample standard deviation (n-1) over |mean|. Throws DomainError on fewer
// than two values or a zero mean.
double coefficient_of_variation(const std::vector<double>& values);

// Mahalanobis distance of every (error, violation) point from the origin,
// under the sample covariance of the whole point cloud. Throws DomainError
// on fewer than three points and DegenerateCovariance on a singular
// covariance.
std::vector<double> mahalanobis_rank(
    const std::vector<std::pair<double, double>>& points);

}  // namespace fairfed

#endif  // FAIRFED_FAIRNESS_HPP_
