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

#include "fairfed/fairness.hpp"

#include <algorithm>
#include <cmath>

#include "fairfed/errors.hpp"

namespace fairfed {

namespace {

std::optional<double> rate(std::int64_t numerator, std::int64_t denominator) {
  if (denominator == 0) return std::nullopt;
  return static_cast<double>(numerator) / static_cast<double>(denominator);
}

// max_g (rate_g - overall); UNDEFINED as soon as any participant is.
std::optional<double> max_gap(const std::vector<std::optional<double>>& rates,
                              const std::optional<double>& overall) {
  if (!overall.has_value()) return std::nullopt;
  std::optional<double> gap;
  for (const auto& r : rates) {
    if (!r.has_value()) return std::nullopt;
    const double g = *r - *overall;
    if (!gap.has_value() || g > *gap) gap = g;
  }
  return gap;
}

}  // namespace

GroupConfusion tally_confusion(const Dataset& data,
                               const std::vector<int>& predictions) {
  validate_dataset(data);
  if (predictions.size() != data.samples.size()) {
    throw ConfigError("predictions size " + std::to_string(predictions.size()) +
                      " does not match dataset size " +
                      std::to_string(data.samples.size()));
  }
  GroupConfusion confusion;
  confusion.groups.resize(data.num_groups);
  for (std::size_t i = 0; i < data.samples.size(); ++i) {
    const Sample& s = data.samples[i];
    const int pred = predictions[i];
    if (pred != 0 && pred != 1) {
      throw ConfigError("prediction " + std::to_string(i) + " is not in {0,1}");
    }
    ConfusionCounts& c = confusion.groups[s.group];
    if (s.label == 1) {
      pred == 1 ? ++c.true_pos : ++c.false_neg;
    } else {
      pred == 1 ? ++c.false_pos : ++c.true_neg;
    }
  }
  for (const ConfusionCounts& c : confusion.groups) {
    confusion.overall.true_pos += c.true_pos;
    confusion.overall.false_pos += c.false_pos;
    confusion.overall.true_neg += c.true_neg;
    confusion.overall.false_neg += c.false_neg;
  }
  return confusion;
}

FairnessReport report_from_confusion(const GroupConfusion& confusion) {
  FairnessReport report;
  const ConfusionCounts& o = confusion.overall;
  if (o.total() == 0) throw ConfigError("confusion has no samples");

  report.accuracy = static_cast<double>(o.true_pos + o.true_neg) /
                    static_cast<double>(o.total());
  report.fnr = rate(o.false_neg, o.positives());
  report.fpr = rate(o.false_pos, o.negatives());

  report.group_fnr.reserve(confusion.groups.size());
  report.group_fpr.reserve(confusion.groups.size());
  for (const ConfusionCounts& c : confusion.groups) {
    report.group_fnr.push_back(rate(c.false_neg, c.positives()));
    report.group_fpr.push_back(rate(c.false_pos, c.negatives()));
  }

  const auto fnr_gap = max_gap(report.group_fnr, report.fnr);
  const auto fpr_gap = max_gap(report.group_fpr, report.fpr);
  report.delta_eopp = fnr_gap;
  if (fnr_gap.has_value() && fpr_gap.has_value()) {
    report.delta_eo = std::max(*fpr_gap, *fnr_gap);
    report.delta_ap = *fpr_gap + *fnr_gap;
  }
  return report;
}

FairnessReport evaluate_predictions(const Dataset& data,
                                    const std::vector<int>& predictions) {
  return report_from_confusion(tally_confusion(data, predictions));
}

FairnessReport evaluate(const ModelParams& params, const Dataset& data,
                        double threshold) {
  validate_dataset(data);
  std::vector<int> predictions(data.samples.size());
  for (std::size_t i = 0; i < data.samples.size(); ++i) {
    predictions[i] =
        predict_proba(params, data.samples[i].features) >= threshold ? 1 : 0;
  }
  return evaluate_predictions(data, predictions);
}

std::optional<double> violation(const FairnessReport& report,
                                FairnessNotion notion) {
  switch (notion) {
    case FairnessNotion::EqualOpportunity: return report.delta_eopp;
    case FairnessNotion::EqualizedOdds: return report.delta_eo;
    case FairnessNotion::AccuracyParity: return report.delta_ap;
  }
  return std::nullopt;
}

double coefficient_of_variation(const std::vector<double>& values) {
  if (values.size() < 2) {
    throw DomainError("coefficient of variation needs at least 2 values");
  }
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  if (mean == 0.0) {
    throw DomainError("coefficient of variation is undefined for zero mean");
  }
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double stdev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  return stdev / std::fabs(mean);
}

std::vector<double> mahalanobis_rank(
    const std::vector<std::pair<double, double>>& points) {
  const std::size_t n = points.size();
  if (n < 3) throw DomainError("mahalanobis ranking needs at least 3 points");

  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : points) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);

  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (const auto& [x, y] : points) {
    const double dx = x - mx;
    const double dy = y - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  const double denom = static_cast<double>(n - 1);
  sxx /= denom;
  syy /= denom;
  sxy /= denom;

  const double det = sxx * syy - sxy * sxy;
  const double scale = std::max(sxx * syy, sxy * sxy);
  if (!(det > scale * 1e-12) || scale == 0.0) {
    throw DegenerateCovariance("sample covariance of the points is singular");
  }

  // Distances are taken from the origin, not from the cloud mean.
  std::vector<double> distances;
  distances.reserve(n);
  for (const auto& [x, y] : points) {
    const double q = (syy * x * x - 2.0 * sxy * x * y + sxx * y * y) / det;
    distances.push_back(std::sqrt(std::max(q, 0.0)));
  }
  return distances;
}

}  // namespace fairfed
