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

#include "fairfed/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "fairfed/errors.hpp"
#include "fairfed/rng.hpp"

namespace fairfed {

namespace {

std::string str(std::size_t v) { return std::to_string(v); }
std::string str(int v) { return std::to_string(v); }

Dataset shard_like(const Dataset& parent) {
  Dataset d;
  d.feature_dim = parent.feature_dim;
  d.num_groups = parent.num_groups;
  return d;
}

// Collects sample indices per group, in dataset order.
std::vector<std::vector<std::size_t>> indices_by_group(const Dataset& data) {
  std::vector<std::vector<std::size_t>> by_group(data.num_groups);
  for (std::size_t i = 0; i < data.samples.size(); ++i) {
    by_group[data.samples[i].group].push_back(i);
  }
  return by_group;
}

// Copies the samples at `indices` (sorted by original position) into a shard.
Dataset gather(const Dataset& data, std::vector<std::size_t> indices) {
  std::sort(indices.begin(), indices.end());
  Dataset out = shard_like(data);
  out.samples.reserve(indices.size());
  for (std::size_t i : indices) out.samples.push_back(data.samples[i]);
  return out;
}

}  // namespace

void validate_dataset(const Dataset& data) {
  if (data.samples.empty()) throw ConfigError("dataset is empty");
  if (data.feature_dim < 1) throw ConfigError("dataset feature_dim must be >= 1");
  if (data.num_groups < 1) throw ConfigError("dataset num_groups must be >= 1");
  for (std::size_t i = 0; i < data.samples.size(); ++i) {
    const Sample& s = data.samples[i];
    if (static_cast<int>(s.features.size()) != data.feature_dim) {
      throw ConfigError("sample " + str(i) + " has " + str(s.features.size()) +
                        " features, expected " + str(data.feature_dim));
    }
    for (double v : s.features) {
      if (!std::isfinite(v)) {
        throw ConfigError("sample " + str(i) + " has a non-finite feature");
      }
    }
    if (s.label != 0 && s.label != 1) {
      throw ConfigError("sample " + str(i) + " has label " + str(s.label) +
                        ", expected 0 or 1");
    }
    if (s.group < 0 || s.group >= data.num_groups) {
      throw ConfigError("sample " + str(i) + " has group " + str(s.group) +
                        ", expected < " + str(data.num_groups));
    }
  }
}

void validate_spec(const SynthSpec& spec) {
  if (spec.num_samples == 0) throw ConfigError("num_samples must be positive");
  if (spec.feature_dim < 1) throw ConfigError("feature_dim must be >= 1");
  if (spec.num_groups < 1) throw ConfigError("num_groups must be >= 1");
  const std::size_t s = static_cast<std::size_t>(spec.num_groups);
  if (spec.group_proportions.size() != s) {
    throw ConfigError("group_proportions must have one entry per group");
  }
  double sum = 0.0;
  for (double p : spec.group_proportions) {
    if (p < 0.0 || !std::isfinite(p)) {
      throw ConfigError("group_proportions entries must be finite and >= 0");
    }
    sum += p;
  }
  if (std::fabs(sum - 1.0) > 1e-9) {
    throw ConfigError("group_proportions must sum to 1");
  }
  if (spec.negative_means.size() != s || spec.positive_means.size() != s) {
    throw ConfigError("negative_means/positive_means must have one vector per group");
  }
  for (const auto* means : {&spec.negative_means, &spec.positive_means}) {
    for (const auto& m : *means) {
      if (static_cast<int>(m.size()) != spec.feature_dim) {
        throw ConfigError("class mean vectors must have feature_dim entries");
      }
    }
  }
  if (!(spec.noise_scale > 0.0) || !std::isfinite(spec.noise_scale)) {
    throw ConfigError("noise_scale must be positive");
  }
  if (spec.label_flip_rates.size() != s) {
    throw ConfigError("label_flip_rates must have one entry per group");
  }
  for (double r : spec.label_flip_rates) {
    if (!(r >= 0.0 && r < 0.5)) {
      throw ConfigError("label_flip_rates entries must lie in [0, 0.5)");
    }
  }
}

Dataset generate_synthetic(const SynthSpec& spec) {
  validate_spec(spec);

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Dataset data;
  data.feature_dim = spec.feature_dim;
  data.num_groups = spec.num_groups;
  data.samples.reserve(spec.num_samples);

  for (std::size_t i = 0; i < spec.num_samples; ++i) {
    // Group by cumulative inversion; the last group absorbs rounding slack.
    const double u = unit(rng);
    int group = spec.num_groups - 1;
    double cum = 0.0;
    for (int g = 0; g < spec.num_groups; ++g) {
      cum += spec.group_proportions[g];
      if (u < cum) {
        group = g;
        break;
      }
    }

    int label = unit(rng) < 0.5 ? 0 : 1;
    const std::vector<double>& mean =
        label == 1 ? spec.positive_means[group] : spec.negative_means[group];

    Sample sample;
    sample.group = group;
    sample.features.resize(spec.feature_dim);
    for (int d = 0; d < spec.feature_dim; ++d) {
      sample.features[d] = mean[d] + spec.noise_scale * gauss(rng);
    }
    if (unit(rng) < spec.label_flip_rates[group]) label = 1 - label;
    sample.label = label;
    data.samples.push_back(std::move(sample));
  }
  return data;
}

std::vector<Dataset> partition_heterogeneous(
    const Dataset& data, int num_clients,
    const std::vector<double>& group_client_fractions, std::uint64_t seed) {
  validate_dataset(data);
  const int s = data.num_groups;
  if (num_clients < s) {
    throw PartitionError("num_clients (" + str(num_clients) +
                         ") must be >= num_groups (" + str(s) + ")");
  }
  if (group_client_fractions.size() != static_cast<std::size_t>(s)) {
    throw PartitionError("group_client_fractions must have one entry per group");
  }
  double sum = 0.0;
  for (double f : group_client_fractions) {
    if (f < 0.0 || !std::isfinite(f)) {
      throw PartitionError("group_client_fractions entries must be finite and >= 0");
    }
    sum += f;
  }
  if (std::fabs(sum - 1.0) > 1e-9) {
    throw PartitionError("group_client_fractions must sum to 1");
  }

  auto by_group = indices_by_group(data);
  for (int g = 0; g < s; ++g) {
    if (by_group[g].empty()) {
      throw PartitionError("group " + str(g) + " has no samples");
    }
  }

  // Client counts per group: ceil(f_g * m) for all but the last group, which
  // takes the remainder; clamped so every later group keeps at least one.
  std::vector<int> clients_per_group(s, 0);
  int remaining = num_clients;
  for (int g = 0; g < s; ++g) {
    int c;
    if (g == s - 1) {
      c = remaining;
    } else {
      c = static_cast<int>(
          std::ceil(group_client_fractions[g] * num_clients));
      c = std::min(c, remaining - (s - 1 - g));
    }
    if (c < 1) {
      throw PartitionError("group " + str(g) + " would receive no clients");
    }
    if (static_cast<std::size_t>(c) > by_group[g].size()) {
      throw PartitionError("group " + str(g) + " has " +
                           str(by_group[g].size()) + " samples for " + str(c) +
                           " clients");
    }
    clients_per_group[g] = c;
    remaining -= c;
  }

  std::mt19937_64 rng(seed);
  std::vector<Dataset> shards;
  shards.reserve(num_clients);
  for (int g = 0; g < s; ++g) {
    std::vector<std::size_t>& pool = by_group[g];
    std::shuffle(pool.begin(), pool.end(), rng);
    const std::size_t n = pool.size();
    const std::size_t c = static_cast<std::size_t>(clients_per_group[g]);
    const std::size_t base = n / c;
    const std::size_t extra = n % c;
    std::size_t offset = 0;
    for (std::size_t j = 0; j < c; ++j) {
      const std::size_t take = base + (j < extra ? 1 : 0);
      std::vector<std::size_t> chunk(pool.begin() + offset,
                                     pool.begin() + offset + take);
      offset += take;
      shards.push_back(gather(data, std::move(chunk)));
    }
  }
  return shards;
}

std::vector<Dataset> partition_homogeneous(const Dataset& data,
                                           int num_clients,
                                           std::uint64_t seed) {
  validate_dataset(data);
  if (num_clients < 1) throw PartitionError("num_clients must be >= 1");

  auto by_group = indices_by_group(data);
  for (int g = 0; g < data.num_groups; ++g) {
    if (by_group[g].size() < static_cast<std::size_t>(num_clients)) {
      throw PartitionError("group " + str(g) + " has " +
                           str(by_group[g].size()) + " samples, need >= " +
                           str(num_clients));
    }
  }

  std::mt19937_64 rng(seed);
  const std::size_t m = static_cast<std::size_t>(num_clients);
  std::vector<std::vector<std::size_t>> per_client(m);
  for (int g = 0; g < data.num_groups; ++g) {
    std::vector<std::size_t>& pool = by_group[g];
    std::shuffle(pool.begin(), pool.end(), rng);
    const std::size_t base = pool.size() / m;
    const std::size_t extra = pool.size() % m;
    std::size_t offset = 0;
    for (std::size_t j = 0; j < m; ++j) {
      // Rotate which clients receive the leftover samples across groups.
      const std::size_t slot = (j + static_cast<std::size_t>(g)) % m;
      const std::size_t take = base + (j < extra ? 1 : 0);
      per_client[slot].insert(per_client[slot].end(), pool.begin() + offset,
                              pool.begin() + offset + take);
      offset += take;
    }
  }

  std::vector<Dataset> shards;
  shards.reserve(m);
  for (std::size_t j = 0; j < m; ++j) {
    shards.push_back(gather(data, std::move(per_client[j])));
  }
  return shards;
}

SplitResult split_aggregator_set(const Dataset& data, double fraction,
                                 std::uint64_t seed) {
  validate_dataset(data);
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw SplitError("fraction must lie in (0, 1)");
  }

  const int s = data.num_groups;
  // Per (group, label) cell index lists, dataset order.
  std::vector<std::vector<std::size_t>> cells(2 * s);
  for (std::size_t i = 0; i < data.samples.size(); ++i) {
    const Sample& smp = data.samples[i];
    cells[2 * smp.group + smp.label].push_back(i);
  }

  std::vector<bool> label_present(2, false);
  for (int g = 0; g < s; ++g) {
    const std::size_t group_total = cells[2 * g].size() + cells[2 * g + 1].size();
    if (group_total < 2) {
      throw SplitError("group " + str(g) + " has " + str(group_total) +
                       " samples, need >= 2 for a covering split");
    }
    for (int y = 0; y < 2; ++y) {
      if (!cells[2 * g + y].empty()) label_present[y] = true;
    }
  }

  // Target per-cell counts: round(fraction * cell), at least 1 per nonempty
  // cell so the aggregator set covers every group and label.
  std::vector<std::size_t> take(2 * s, 0);
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const std::size_t n = cells[c].size();
    if (n == 0) continue;
    auto k = static_cast<std::size_t>(
        std::llround(fraction * static_cast<double>(n)));
    take[c] = std::clamp<std::size_t>(k, 1, n);
  }

  // The training side must keep at least one sample of every group.
  for (int g = 0; g < s; ++g) {
    const std::size_t total = cells[2 * g].size() + cells[2 * g + 1].size();
    if (take[2 * g] + take[2 * g + 1] == total) {
      const int y = take[2 * g] >= take[2 * g + 1] ? 0 : 1;
      take[2 * g + y] -= 1;
    }
  }

  // Label coverage can be lost by the adjustment above; restore it from a
  // cell that still has training samples to spare.
  for (int y = 0; y < 2; ++y) {
    if (!label_present[y]) continue;
    std::size_t covered = 0;
    for (int g = 0; g < s; ++g) covered += take[2 * g + y];
    if (covered > 0) continue;
    bool fixed = false;
    for (int g = 0; g < s && !fixed; ++g) {
      const std::size_t c = static_cast<std::size_t>(2 * g + y);
      const std::size_t group_train = cells[2 * g].size() +
                                      cells[2 * g + 1].size() - take[2 * g] -
                                      take[2 * g + 1];
      if (take[c] < cells[c].size() && group_train >= 2) {
        take[c] += 1;
        fixed = true;
      }
    }
    if (!fixed) {
      throw SplitError("cannot cover label " + str(y) +
                       " in the aggregator set");
    }
  }

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> agg_indices;
  std::vector<bool> in_agg(data.samples.size(), false);
  for (std::size_t c = 0; c < cells.size(); ++c) {
    std::vector<std::size_t>& pool = cells[c];
    if (pool.empty()) continue;
    std::shuffle(pool.begin(), pool.end(), rng);
    for (std::size_t i = 0; i < take[c]; ++i) {
      agg_indices.push_back(pool[i]);
      in_agg[pool[i]] = true;
    }
  }

  std::vector<std::size_t> train_indices;
  train_indices.reserve(data.samples.size() - agg_indices.size());
  for (std::size_t i = 0; i < data.samples.size(); ++i) {
    if (!in_agg[i]) train_indices.push_back(i);
  }

  SplitResult out;
  out.aggregator = gather(data, std::move(agg_indices));
  out.train = gather(data, std::move(train_indices));
  return out;
}

}  // namespace fairfed
