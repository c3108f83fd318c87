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

#ifndef FAIRFED_DATASET_HPP_
#define FAIRFED_DATASET_HPP_

#include <cstddef>
#include <cstdint>
#include <vector>

namespace fairfed {

// One labeled feature vector tagged with its demographic group.
struct Sample {
  std::vector<double> features;
  int label = 0;  // binary {0,1}
  int group = 0;  // in [0, num_groups)
};

struct Dataset {
  std::vector<Sample> samples;
  int feature_dim = 0;
  int num_groups = 0;

  std::size_t size() const { return samples.size(); }
};

// Throws ConfigError if the dataset violates its invariants (empty, feature
// dimension mismatches, out-of-range label or group, non-finite features).
void validate_dataset(const Dataset& data);

// Synthetic binary-classification data: per group, a two-Gaussian mixture of
// class-conditional feature clouds with shared isotropic noise; a per-group
// label-flip rate supplies the bias knob.
struct SynthSpec {
  std::size_t num_samples = 0;
  int feature_dim = 0;
  int num_groups = 2;
  std::vector<double> group_proportions;            // sums to 1 within 1e-9
  std::vector<std::vector<double>> negative_means;  // per group, class-0 centre
  std::vector<std::vector<double>> positive_means;  // per group, class-1 centre
  double noise_scale = 1.0;                         // shared stddev, > 0
  std::vector<double> label_flip_rates;             // per group, in [0, 0.5)
  std::uint64_t seed = 0;
};

// Throws ConfigError naming the violated field.
void validate_spec(const SynthSpec& spec);

// Deterministic given spec.seed. Per sample: draw the group from
// group_proportions, the label from a fair coin, features from the
// (group, label) Gaussian, then flip the label with the group's flip rate.
Dataset generate_synthetic(const SynthSpec& spec);

// Splits data so that every client shard holds samples of exactly one group.
// Group g is served by a contiguous block of clients whose size follows
// ceil(fraction_g * num_clients); the group's samples are shuffled by seed
// and spread over its block as evenly as possible.
std::vector<Dataset> partition_heterogeneous(
    const Dataset& data, int num_clients,
    const std::vector<double>& group_client_fractions, std::uint64_t seed);

// Splits data so that every client shard contains samples of every group,
// with per-shard group proportions close to the global ones.
std::vector<Dataset> partition_homogeneous(const Dataset& data,
                                           int num_clients, std::uint64_t seed);

struct SplitResult {
  Dataset train;
  Dataset aggregator;
};

// Carves out the aggregator set: roughly fraction * |data| samples, drawn by
// stratified sampling per (group, label) cell so the aggregator set covers
// every group and every label while the remainder keeps every group.
SplitResult split_aggregator_set(const Dataset& data, double fraction,
                                 std::uint64_t seed);

}  // namespace fairfed

#endif  // FAIRFED_DATASET_HPP_
