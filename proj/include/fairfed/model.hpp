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

#ifndef FAIRFED_MODEL_HPP_
#define FAIRFED_MODEL_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "fairfed/dataset.hpp"
#include "fairfed/notion.hpp"

namespace fairfed {

enum class ArchKind : std::uint8_t { Linear = 0, Mlp = 1 };

// Small differentiable binary classifiers: logistic regression, or one
// tanh hidden layer followed by a logistic output.
struct Architecture {
  ArchKind kind = ArchKind::Linear;
  int input_dim = 0;
  int hidden_dim = 0;  // mlp only

  // linear: d + 1; mlp: d*h + h + h + 1
  int param_count() const;
  bool operator==(const Architecture&) const = default;
};

void validate_arch(const Architecture& arch);

// Flat parameter vector, layer-major, weights before biases:
// linear: [w(d), b]; mlp: [W1(h x d, row-major), b1(h), w2(h), b2].
struct ModelParams {
  Architecture arch;
  std::vector<double> values;
};

struct TrainConfig {
  int epochs = 1;
  double learning_rate = 0.1;
  int batch_size = 32;
  std::uint64_t seed = 0;
  double lambda = 0.0;  // fairness penalty weight; only read by local_train_lmm
  FairnessNotion notion = FairnessNotion::EqualOpportunity;
};

void validate_train_config(const TrainConfig& cfg);

// Weights drawn uniformly from [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases zero.
ModelParams init_params(const Architecture& arch, std::uint64_t seed);

double logit(const ModelParams& params, std::span<const double> features);

// d logit / d params, written into grad (resized to param_count).
void logit_grad(const ModelParams& params, std::span<const double> features,
                std::vector<double>& grad);

// sigmoid(logit), in [0,1].
double predict_proba(const ModelParams& params,
                     std::span<const double> features);

// Mean binary cross-entropy over the dataset.
double ce_loss(const ModelParams& params, const Dataset& data);

// Mean BCE and its gradient (grad resized and overwritten).
double ce_loss_and_grad(const ModelParams& params, const Dataset& data,
                        std::vector<double>& grad);

// Differentiable fairness-violation surrogate built from soft predictions:
// per-group soft FNR/FPR, combined as the max-minus-min spread across groups
// (FNR spread for EOpp, max of both spreads for EO, their sum for AP).
// Throws UndefinedFairnessLoss when a required stratum is missing.
double soft_violation(const ModelParams& params, const Dataset& data,
                      FairnessNotion notion);

double soft_violation_and_grad(const ModelParams& params, const Dataset& data,
                               FairnessNotion notion, std::vector<double>& grad);

// Mini-batch SGD on mean BCE for cfg.epochs, shuffle order seeded by
// cfg.seed. Returns fresh parameters; the inputs are never mutated.
// Throws DivergenceError naming epoch and batch on a non-finite or runaway
// loss.
ModelParams local_train_ce(const ModelParams& params, const Dataset& data,
                           const TrainConfig& cfg);

// SGD on mean BCE plus lambda times the soft violation, the penalty term
// evaluated over the full local dataset at every step. Requires the data to
// be group-complete for cfg.notion regardless of lambda; with lambda == 0 the
// trajectory is identical to local_train_ce under the same seed.
ModelParams local_train_lmm(const ModelParams& params, const Dataset& data,
                            const TrainConfig& cfg);

}  // namespace fairfed

#endif  // FAIRFED_MODEL_HPP_
