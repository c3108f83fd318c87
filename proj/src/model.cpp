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

#include "fairfed/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "fairfed/errors.hpp"

namespace fairfed {

namespace {

constexpr double kDivergenceCap = 1e6;

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::fabs(z)));
}

void check_features(const ModelParams& params, std::span<const double> x) {
  if (static_cast<int>(x.size()) != params.arch.input_dim) {
    throw ConfigError("feature vector has " + std::to_string(x.size()) +
                      " entries, model expects " +
                      std::to_string(params.arch.input_dim));
  }
}

void check_params(const ModelParams& params) {
  validate_arch(params.arch);
  if (static_cast<int>(params.values.size()) != params.arch.param_count()) {
    throw ConfigError("parameter vector has " +
                      std::to_string(params.values.size()) + " entries, " +
                      "architecture needs " +
                      std::to_string(params.arch.param_count()));
  }
}

void check_training_data(const ModelParams& params, const Dataset& data) {
  check_params(params);
  validate_dataset(data);
  if (data.feature_dim != params.arch.input_dim) {
    throw ConfigError("dataset feature_dim " + std::to_string(data.feature_dim) +
                      " does not match model input_dim " +
                      std::to_string(params.arch.input_dim));
  }
}

// Forward pass through the mlp hidden layer; activations cached for backward.
struct MlpForward {
  std::vector<double> hidden;  // tanh(W1 x + b1)
};

double mlp_logit(const ModelParams& params, std::span<const double> x,
                 MlpForward* cache) {
  const int d = params.arch.input_dim;
  const int h = params.arch.hidden_dim;
  const double* v = params.values.data();
  const double* w1 = v;              // h x d
  const double* b1 = v + h * d;      // h
  const double* w2 = b1 + h;         // h
  const double b2 = w2[h];

  double z = b2;
  if (cache) cache->hidden.resize(h);
  for (int i = 0; i < h; ++i) {
    double u = b1[i];
    const double* row = w1 + i * d;
    for (int j = 0; j < d; ++j) u += row[j] * x[j];
    const double a = std::tanh(u);
    if (cache) cache->hidden[i] = a;
    z += w2[i] * a;
  }
  return z;
}

// grad += coeff * (d logit / d params). The mlp path reuses a cached forward.
void accumulate_logit_grad(const ModelParams& params, std::span<const double> x,
                           double coeff, const MlpForward* cache,
                           std::vector<double>& grad) {
  const int d = params.arch.input_dim;
  if (params.arch.kind == ArchKind::Linear) {
    for (int j = 0; j < d; ++j) grad[j] += coeff * x[j];
    grad[d] += coeff;
    return;
  }
  const int h = params.arch.hidden_dim;
  const double* w2 = params.values.data() + h * d + h;
  double* g_w1 = grad.data();
  double* g_b1 = grad.data() + h * d;
  double* g_w2 = g_b1 + h;
  for (int i = 0; i < h; ++i) {
    const double a = cache->hidden[i];
    g_w2[i] += coeff * a;
    const double s = coeff * w2[i] * (1.0 - a * a);
    double* row = g_w1 + i * d;
    for (int j = 0; j < d; ++j) row[j] += s * x[j];
    g_b1[i] += s;
  }
  g_w2[h] += coeff;  // output bias
}

// Forward logit for either architecture, caching hidden activations for mlp.
double forward_logit(const ModelParams& params, std::span<const double> x,
                     MlpForward* cache) {
  if (params.arch.kind == ArchKind::Linear) {
    const int d = params.arch.input_dim;
    double z = params.values[d];
    for (int j = 0; j < d; ++j) z += params.values[j] * x[j];
    return z;
  }
  return mlp_logit(params, x, cache);
}

// Per-group soft error-rate tallies over a dataset.
struct SoftRates {
  std::vector<double> prob;         // cached p_j per sample
  std::vector<long long> positives; // hard counts per group
  std::vector<long long> negatives;
  std::vector<double> soft_fnr;     // sum(1 - p) over positives / positives
  std::vector<double> soft_fpr;     // sum(p) over negatives / negatives
};

SoftRates soft_rates(const ModelParams& params, const Dataset& data) {
  SoftRates r;
  const int s = data.num_groups;
  r.prob.resize(data.samples.size());
  r.positives.assign(s, 0);
  r.negatives.assign(s, 0);
  std::vector<double> fn_sum(s, 0.0), fp_sum(s, 0.0);
  MlpForward cache;
  for (std::size_t j = 0; j < data.samples.size(); ++j) {
    const Sample& smp = data.samples[j];
    const double p = sigmoid(forward_logit(params, smp.features, &cache));
    r.prob[j] = p;
    if (smp.label == 1) {
      r.positives[smp.group] += 1;
      fn_sum[smp.group] += 1.0 - p;
    } else {
      r.negatives[smp.group] += 1;
      fp_sum[smp.group] += p;
    }
  }
  r.soft_fnr.assign(s, 0.0);
  r.soft_fpr.assign(s, 0.0);
  for (int g = 0; g < s; ++g) {
    if (r.positives[g] > 0) r.soft_fnr[g] = fn_sum[g] / r.positives[g];
    if (r.negatives[g] > 0) r.soft_fpr[g] = fp_sum[g] / r.negatives[g];
  }
  return r;
}

struct Spread {
  double value = 0.0;
  int arg_max = 0;
  int arg_min = 0;
};

Spread rate_spread(const std::vector<double>& rates) {
  Spread s;
  s.arg_max = 0;
  s.arg_min = 0;
  for (int g = 1; g < static_cast<int>(rates.size()); ++g) {
    if (rates[g] > rates[s.arg_max]) s.arg_max = g;
    if (rates[g] < rates[s.arg_min]) s.arg_min = g;
  }
  s.value = rates[s.arg_max] - rates[s.arg_min];
  return s;
}

// Adds scale * d(spread)/d(params) for one rate family (FNR or FPR).
void accumulate_spread_grad(const ModelParams& params, const Dataset& data,
                            const SoftRates& rates, const Spread& spread,
                            bool fnr_family, double scale,
                            std::vector<double>& grad) {
  if (spread.arg_max == spread.arg_min) return;
  MlpForward cache;
  for (std::size_t j = 0; j < data.samples.size(); ++j) {
    const Sample& smp = data.samples[j];
    const bool relevant = fnr_family ? smp.label == 1 : smp.label == 0;
    if (!relevant) continue;
    double sign;
    long long denom;
    if (smp.group == spread.arg_max) {
      sign = 1.0;
      denom = fnr_family ? rates.positives[smp.group] : rates.negatives[smp.group];
    } else if (smp.group == spread.arg_min) {
      sign = -1.0;
      denom = fnr_family ? rates.positives[smp.group] : rates.negatives[smp.group];
    } else {
      continue;
    }
    const double p = rates.prob[j];
    // d soft_fnr / dz = -p(1-p)/|positives|; d soft_fpr / dz = +p(1-p)/|negatives|
    const double dz = (fnr_family ? -1.0 : 1.0) * p * (1.0 - p) / denom;
    const double coeff = scale * sign * dz;
    if (params.arch.kind == ArchKind::Mlp) {
      mlp_logit(params, smp.features, &cache);  // refresh hidden activations
      accumulate_logit_grad(params, smp.features, coeff, &cache, grad);
    } else {
      accumulate_logit_grad(params, smp.features, coeff, nullptr, grad);
    }
  }
}

double violation_from_rates(const Dataset& data, const SoftRates& rates,
                            FairnessNotion notion, Spread* fnr_out,
                            Spread* fpr_out) {
  const Spread fnr = rate_spread(rates.soft_fnr);
  const Spread fpr = rate_spread(rates.soft_fpr);
  if (fnr_out) *fnr_out = fnr;
  if (fpr_out) *fpr_out = fpr;
  (void)data;
  switch (notion) {
    case FairnessNotion::EqualOpportunity: return fnr.value;
    case FairnessNotion::EqualizedOdds: return std::max(fnr.value, fpr.value);
    case FairnessNotion::AccuracyParity: return fnr.value + fpr.value;
  }
  return 0.0;
}

}  // namespace

int Architecture::param_count() const {
  if (kind == ArchKind::Linear) return input_dim + 1;
  return input_dim * hidden_dim + hidden_dim + hidden_dim + 1;
}

void validate_arch(const Architecture& arch) {
  if (arch.input_dim < 1) throw ConfigError("architecture input_dim must be >= 1");
  if (arch.kind == ArchKind::Mlp && arch.hidden_dim < 1) {
    throw ConfigError("mlp architecture hidden_dim must be >= 1");
  }
}

void validate_train_config(const TrainConfig& cfg) {
  if (cfg.epochs < 1) throw ConfigError("epochs must be >= 1");
  if (!(cfg.learning_rate >= 0.0) || !std::isfinite(cfg.learning_rate)) {
    throw ConfigError("learning_rate must be finite and >= 0");
  }
  if (cfg.batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(cfg.lambda >= 0.0) || !std::isfinite(cfg.lambda)) {
    throw ConfigError("lambda must be finite and >= 0");
  }
}

ModelParams init_params(const Architecture& arch, std::uint64_t seed) {
  validate_arch(arch);
  ModelParams params;
  params.arch = arch;
  params.values.assign(arch.param_count(), 0.0);

  std::mt19937_64 rng(seed);
  auto fill_uniform = [&rng](double* begin, int count, int fan_in) {
    std::uniform_real_distribution<double> dist(-1.0 / std::sqrt(fan_in),
                                                1.0 / std::sqrt(fan_in));
    for (int i = 0; i < count; ++i) begin[i] = dist(rng);
  };

  const int d = arch.input_dim;
  if (arch.kind == ArchKind::Linear) {
    fill_uniform(params.values.data(), d, d);  // bias stays zero
  } else {
    const int h = arch.hidden_dim;
    fill_uniform(params.values.data(), h * d, d);
    fill_uniform(params.values.data() + h * d + h, h, h);
  }
  return params;
}

double logit(const ModelParams& params, std::span<const double> features) {
  check_params(params);
  check_features(params, features);
  return forward_logit(params, features, nullptr);
}

void logit_grad(const ModelParams& params, std::span<const double> features,
                std::vector<double>& grad) {
  check_params(params);
  check_features(params, features);
  grad.assign(params.values.size(), 0.0);
  if (params.arch.kind == ArchKind::Linear) {
    accumulate_logit_grad(params, features, 1.0, nullptr, grad);
  } else {
    MlpForward cache;
    mlp_logit(params, features, &cache);
    accumulate_logit_grad(params, features, 1.0, &cache, grad);
  }
}

double predict_proba(const ModelParams& params,
                     std::span<const double> features) {
  return sigmoid(logit(params, features));
}

double ce_loss(const ModelParams& params, const Dataset& data) {
  check_training_data(params, data);
  double total = 0.0;
  for (const Sample& s : data.samples) {
    const double z = forward_logit(params, s.features, nullptr);
    total += softplus(z) - s.label * z;
  }
  return total / static_cast<double>(data.samples.size());
}

double ce_loss_and_grad(const ModelParams& params, const Dataset& data,
                        std::vector<double>& grad) {
  check_training_data(params, data);
  grad.assign(params.values.size(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(data.samples.size());
  double total = 0.0;
  MlpForward cache;
  for (const Sample& s : data.samples) {
    const bool mlp = params.arch.kind == ArchKind::Mlp;
    const double z = forward_logit(params, s.features, mlp ? &cache : nullptr);
    total += softplus(z) - s.label * z;
    const double coeff = (sigmoid(z) - s.label) * inv_n;
    accumulate_logit_grad(params, s.features, coeff, mlp ? &cache : nullptr, grad);
  }
  return total * inv_n;
}

double soft_violation(const ModelParams& params, const Dataset& data,
                      FairnessNotion notion) {
  check_training_data(params, data);
  require_group_complete(data, notion);
  const SoftRates rates = soft_rates(params, data);
  return violation_from_rates(data, rates, notion, nullptr, nullptr);
}

double soft_violation_and_grad(const ModelParams& params, const Dataset& data,
                               FairnessNotion notion,
                               std::vector<double>& grad) {
  check_training_data(params, data);
  require_group_complete(data, notion);
  grad.assign(params.values.size(), 0.0);
  const SoftRates rates = soft_rates(params, data);
  Spread fnr, fpr;
  const double value = violation_from_rates(data, rates, notion, &fnr, &fpr);
  switch (notion) {
    case FairnessNotion::EqualOpportunity:
      accumulate_spread_grad(params, data, rates, fnr, true, 1.0, grad);
      break;
    case FairnessNotion::EqualizedOdds:
      if (fnr.value >= fpr.value) {
        accumulate_spread_grad(params, data, rates, fnr, true, 1.0, grad);
      } else {
        accumulate_spread_grad(params, data, rates, fpr, false, 1.0, grad);
      }
      break;
    case FairnessNotion::AccuracyParity:
      accumulate_spread_grad(params, data, rates, fnr, true, 1.0, grad);
      accumulate_spread_grad(params, data, rates, fpr, false, 1.0, grad);
      break;
  }
  return value;
}

namespace {

ModelParams train_loop(const ModelParams& start, const Dataset& data,
                       const TrainConfig& cfg, bool with_penalty) {
  check_training_data(start, data);
  validate_train_config(cfg);

  ModelParams params = start;
  const std::size_t n = data.samples.size();
  const std::size_t batch = std::min<std::size_t>(cfg.batch_size, n);

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  std::vector<double> grad(params.values.size());
  std::vector<double> penalty_grad;
  std::vector<std::size_t> batch_idx;
  MlpForward cache;
  const bool mlp = params.arch.kind == ArchKind::Mlp;
  const bool penalized = with_penalty && cfg.lambda > 0.0;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    int batch_index = 0;
    for (std::size_t begin = 0; begin < n; begin += batch, ++batch_index) {
      const std::size_t end = std::min(begin + batch, n);
      const double inv_b = 1.0 / static_cast<double>(end - begin);

      // Accumulate in ascending sample order: the batch gradient is then a
      // pure function of the batch membership, not of the shuffle order.
      batch_idx.assign(order.begin() + begin, order.begin() + end);
      std::sort(batch_idx.begin(), batch_idx.end());

      grad.assign(grad.size(), 0.0);
      double loss = 0.0;
      for (std::size_t idx : batch_idx) {
        const Sample& s = data.samples[idx];
        const double z = forward_logit(params, s.features, mlp ? &cache : nullptr);
        loss += softplus(z) - s.label * z;
        const double coeff = (sigmoid(z) - s.label) * inv_b;
        accumulate_logit_grad(params, s.features, coeff, mlp ? &cache : nullptr,
                              grad);
      }
      loss *= inv_b;

      if (penalized) {
        const double v =
            soft_violation_and_grad(params, data, cfg.notion, penalty_grad);
        loss += cfg.lambda * v;
        for (std::size_t j = 0; j < grad.size(); ++j) {
          grad[j] += cfg.lambda * penalty_grad[j];
        }
      }

      if (!std::isfinite(loss) || loss > kDivergenceCap) {
        throw DivergenceError("training diverged at epoch " +
                              std::to_string(epoch) + ", batch " +
                              std::to_string(batch_index));
      }
      for (std::size_t j = 0; j < grad.size(); ++j) {
        params.values[j] -= cfg.learning_rate * grad[j];
      }
    }
  }
  return params;
}

}  // namespace

ModelParams local_train_ce(const ModelParams& params, const Dataset& data,
                           const TrainConfig& cfg) {
  return train_loop(params, data, cfg, false);
}

ModelParams local_train_lmm(const ModelParams& params, const Dataset& data,
                            const TrainConfig& cfg) {
  check_training_data(params, data);
  validate_train_config(cfg);
  // The penalty is undefined on data missing a group or stratum, no matter
  // how it is weighted.
  require_group_complete(data, cfg.notion);
  return train_loop(params, data, cfg, true);
}

}  // namespace fairfed
