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

#include "fairfed/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fairfed/errors.hpp"
#include "fairfed/fairness.hpp"
#include "fairfed/log.hpp"
#include "fairfed/rng.hpp"
#include "fairfed/serialization.hpp"

namespace fairfed {

namespace {

namespace fs = std::filesystem;

// Seed streams for the per-repeat data pipeline.
constexpr std::uint64_t kTestSplitStream = 11;
constexpr std::uint64_t kAggSplitStream = 12;
constexpr std::uint64_t kPartitionStream = 13;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string opt_cell(const std::optional<double>& v) {
  return v.has_value() ? fmt(*v) : std::string();
}

void atomic_write(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out << content;
    if (!out) throw Error("write to '" + tmp.string() + "' failed");
  }
  fs::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// Experiment file parsing: bracketed sections, `key = value` lines,
// `#` comments. Every key must be consumed, so typos fail loudly.

struct ConfigFile {
  std::map<std::string, std::string> values;  // "section.key" -> value
  mutable std::set<std::string> consumed;
  std::string path;

  bool has(const std::string& key) const {
    return values.find(key) != values.end();
  }

  std::optional<std::string> get(const std::string& key) const {
    auto it = values.find(key);
    if (it == values.end()) return std::nullopt;
    consumed.insert(key);
    return it->second;
  }

  std::string require(const std::string& key) const {
    auto v = get(key);
    if (!v.has_value()) {
      throw ConfigError("'" + path + "' is missing required key '" + key + "'");
    }
    return *v;
  }

  void finish() const {
    for (const auto& [key, value] : values) {
      if (consumed.find(key) == consumed.end()) {
        throw ConfigError("'" + path + "' has unknown key '" + key + "'");
      }
    }
  }
};

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

ConfigFile read_config(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw ConfigError("cannot open config '" + path + "'");
  ConfigFile cfg;
  cfg.path = path;
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(file, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) {
      line.resize(hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError(path + ":" + std::to_string(line_no) +
                          ": unterminated section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) {
        throw ConfigError(path + ":" + std::to_string(line_no) +
                          ": empty section name");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(line_no) +
                        ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": empty key");
    }
    const std::string full = section.empty() ? key : section + "." + key;
    if (!cfg.values.emplace(full, value).second) {
      throw ConfigError(path + ":" + std::to_string(line_no) +
                        ": duplicate key '" + full + "'");
    }
  }
  return cfg;
}

double to_double(const std::string& value, const std::string& key) {
  double out = 0.0;
  const char* first = value.data();
  const char* last = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) {
    throw ConfigError("key '" + key + "': '" + value + "' is not a number");
  }
  return out;
}

template <typename Int>
Int to_int(const std::string& value, const std::string& key) {
  Int out = 0;
  const char* first = value.data();
  const char* last = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) {
    throw ConfigError("key '" + key + "': '" + value + "' is not an integer");
  }
  return out;
}

bool to_bool(const std::string& value, const std::string& key) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("key '" + key + "': '" + value + "' is not a boolean");
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) items.push_back(trim(item));
  if (!items.empty() && items.back().empty()) items.pop_back();
  return items;
}

std::vector<double> to_double_list(const std::string& value,
                                   const std::string& key) {
  std::vector<double> out;
  for (const std::string& item : split_list(value)) {
    out.push_back(to_double(item, key));
  }
  return out;
}

// Builds the group geometry from the compact knobs: axis 0 carries the class
// signal (class centres at shift_g -/+ separation, where shift_g moves the
// per-group decision boundary), axis 1 separates the groups.
void build_geometry(SynthSpec& spec, double separation, double group_offset,
                    double boundary_shift) {
  const int s = spec.num_groups;
  if (spec.feature_dim < 2 && s > 1) {
    throw ConfigError("synthetic geometry with several groups needs features >= 2");
  }
  spec.negative_means.assign(s, std::vector<double>(spec.feature_dim, 0.0));
  spec.positive_means.assign(s, std::vector<double>(spec.feature_dim, 0.0));
  for (int g = 0; g < s; ++g) {
    const double shift = g * boundary_shift;
    const double gpos =
        s > 1 ? (g - (s - 1) / 2.0) * group_offset : 0.0;
    spec.negative_means[g][0] = shift - separation;
    spec.positive_means[g][0] = shift + separation;
    if (spec.feature_dim >= 2) {
      spec.negative_means[g][1] = gpos;
      spec.positive_means[g][1] = gpos;
    }
  }
}

SynthSpec parse_synth(const ConfigFile& cfg) {
  SynthSpec spec;
  const auto samples =
      to_int<std::int64_t>(cfg.require("data.samples"), "data.samples");
  if (samples < 1) throw ConfigError("data.samples must be >= 1");
  spec.num_samples = static_cast<std::size_t>(samples);
  spec.feature_dim = to_int<int>(cfg.require("data.features"), "data.features");
  spec.num_groups = to_int<int>(cfg.get("data.groups").value_or("2"), "data.groups");
  if (spec.num_groups < 1) throw ConfigError("data.groups must be >= 1");

  if (auto v = cfg.get("data.proportions"); v.has_value()) {
    spec.group_proportions = to_double_list(*v, "data.proportions");
  } else {
    spec.group_proportions.assign(spec.num_groups, 1.0 / spec.num_groups);
  }
  if (auto v = cfg.get("data.flip_rates"); v.has_value()) {
    spec.label_flip_rates = to_double_list(*v, "data.flip_rates");
  } else {
    spec.label_flip_rates.assign(spec.num_groups, 0.0);
  }
  spec.noise_scale = to_double(cfg.get("data.noise").value_or("1.0"), "data.noise");

  const double separation =
      to_double(cfg.get("data.class_separation").value_or("1.0"),
                "data.class_separation");
  const double group_offset = to_double(
      cfg.get("data.group_offset").value_or("2.0"), "data.group_offset");
  const double boundary_shift = to_double(
      cfg.get("data.boundary_shift").value_or("0.0"), "data.boundary_shift");
  build_geometry(spec, separation, group_offset, boundary_shift);

  // Explicit per-group mean vectors override the compact geometry.
  for (int g = 0; g < spec.num_groups; ++g) {
    const std::string neg_key = "data.mean_neg_" + std::to_string(g);
    const std::string pos_key = "data.mean_pos_" + std::to_string(g);
    if (auto v = cfg.get(neg_key); v.has_value()) {
      spec.negative_means[g] = to_double_list(*v, neg_key);
    }
    if (auto v = cfg.get(pos_key); v.has_value()) {
      spec.positive_means[g] = to_double_list(*v, pos_key);
    }
  }
  return spec;
}

HeuristicSpec parse_heuristic(const ConfigFile& cfg) {
  HeuristicSpec h;
  h.kind = parse_heuristic_kind(cfg.get("heuristic.kind").value_or("FedAvg"));
  if (auto v = cfg.get("heuristic.alpha"); v.has_value()) {
    h.alpha = to_double(*v, "heuristic.alpha");
  }
  h.notion = parse_notion(cfg.get("heuristic.notion").value_or("EO"));
  h.validate();
  return h;
}

// ---------------------------------------------------------------------------
// Summary statistics.

std::optional<double> median_of(std::vector<double> values) {
  if (values.empty()) return std::nullopt;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

MetricStats stats_of(const std::vector<std::optional<double>>& values) {
  MetricStats stats;
  std::vector<double> defined;
  for (const auto& v : values) {
    if (v.has_value()) defined.push_back(*v);
  }
  if (defined.size() != values.size() || defined.empty()) return stats;

  double mean = 0.0;
  for (double v : defined) mean += v;
  mean /= static_cast<double>(defined.size());
  stats.mean = mean;
  stats.median = median_of(defined);
  if (defined.size() >= 2) {
    double ss = 0.0;
    for (double v : defined) ss += (v - mean) * (v - mean);
    stats.stdev = std::sqrt(ss / static_cast<double>(defined.size() - 1));
    try {
      stats.cov = coefficient_of_variation(defined);
    } catch (const DomainError&) {
      stats.cov = std::nullopt;  // zero mean
    }
  }
  return stats;
}

const FairnessReport& final_report(const RunResult& result) {
  return result.final_test_report.has_value() ? *result.final_test_report
                                              : result.final_agg_report;
}

const MetricStats& violation_stats(const SummaryRow& row,
                                   FairnessNotion notion) {
  switch (notion) {
    case FairnessNotion::EqualOpportunity: return row.d_eopp;
    case FairnessNotion::EqualizedOdds: return row.d_eo;
    case FairnessNotion::AccuracyParity: return row.d_ap;
  }
  return row.d_eo;
}

nlohmann::json stats_json(const MetricStats& s) {
  auto opt = [](const std::optional<double>& v) {
    return v.has_value() ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  return {{"mean", opt(s.mean)},
          {"stdev", opt(s.stdev)},
          {"cov", opt(s.cov)},
          {"median", opt(s.median)}};
}

nlohmann::json row_json(const SummaryRow& row) {
  return {{"heuristic", row.label},
          {"repeats", row.repeats},
          {"accuracy", stats_json(row.accuracy)},
          {"d_eopp", stats_json(row.d_eopp)},
          {"d_eo", stats_json(row.d_eo)},
          {"d_ap", stats_json(row.d_ap)}};
}

void append_stats_cells(std::string& line, const MetricStats& s) {
  line += ',' + opt_cell(s.mean) + ',' + opt_cell(s.stdev) + ',' +
          opt_cell(s.cov) + ',' + opt_cell(s.median);
}

// ---------------------------------------------------------------------------
// Run batches: one heuristic label, `repeats` seeded runs, files on disk.

struct Batch {
  std::string label;
  std::vector<RunResult> results;
  SummaryRow row;
};

Batch run_batch(const ExperimentSpec& spec, const std::string& label,
                const HeuristicSpec& heuristic, PartitionMode mode, bool lmm) {
  Batch batch;
  batch.label = label;
  const fs::path dir = fs::path(spec.out_dir) / spec.name / label;
  for (int r = 0; r < spec.repeats; ++r) {
    RunResult result = execute_repeat(spec, heuristic, mode, r, lmm);
    atomic_write(dir / (std::to_string(r) + ".json"),
                 run_result_to_json(result).dump(2) + "\n");
    atomic_write(dir / (std::to_string(r) + "_rounds.csv"),
                 run_result_round_csv(result));
    batch.results.push_back(std::move(result));
    log_debug(label + " repeat " + std::to_string(r) + " done (" +
              std::to_string(batch.results.back().stop_round) + " rounds)");
  }
  batch.row = summarize(label, batch.results);
  log_info(label + ": accuracy " + opt_cell(batch.row.accuracy.mean) +
           "%, d_" + notion_name(heuristic.notion) + " " +
           opt_cell(violation_stats(batch.row, heuristic.notion).mean) + "%");
  return batch;
}

void write_summary_files(const ExperimentSpec& spec,
                         const std::vector<SummaryRow>& rows,
                         const std::vector<std::string>& extra_headers,
                         const std::vector<std::vector<std::string>>& extra_cells) {
  std::string csv =
      "heuristic,repeats,acc_mean,acc_std,acc_cov,acc_median,"
      "eopp_mean,eopp_std,eopp_cov,eopp_median,"
      "eo_mean,eo_std,eo_cov,eo_median,"
      "ap_mean,ap_std,ap_cov,ap_median";
  for (const std::string& h : extra_headers) csv += ',' + h;
  csv += '\n';
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const SummaryRow& row = rows[i];
    std::string line = row.label + ',' + std::to_string(row.repeats);
    append_stats_cells(line, row.accuracy);
    append_stats_cells(line, row.d_eopp);
    append_stats_cells(line, row.d_eo);
    append_stats_cells(line, row.d_ap);
    if (!extra_cells.empty()) {
      for (const std::string& cell : extra_cells[i]) line += ',' + cell;
    }
    csv += line + '\n';
  }
  const fs::path dir = fs::path(spec.out_dir) / spec.name;
  atomic_write(dir / "summary.csv", csv);

  nlohmann::json doc;
  doc["experiment"] = spec.name;
  nlohmann::json jrows = nlohmann::json::array();
  for (const SummaryRow& row : rows) jrows.push_back(row_json(row));
  doc["rows"] = std::move(jrows);
  atomic_write(dir / "summary.json", doc.dump(2) + "\n");
}

}  // namespace

PartitionMode parse_partition_mode(const std::string& text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "heterogeneous") return PartitionMode::Heterogeneous;
  if (lower == "homogeneous") return PartitionMode::Homogeneous;
  throw ConfigError("unknown partition mode '" + text + "'");
}

const char* partition_mode_name(PartitionMode mode) {
  return mode == PartitionMode::Heterogeneous ? "heterogeneous" : "homogeneous";
}

void ExperimentSpec::validate() const {
  if (name.empty()) throw ConfigError("experiment name must not be empty");
  for (char c : name) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' ||
          c == '_' || c == '.')) {
      throw ConfigError("experiment name has a non-filesystem-safe character");
    }
  }
  if (repeats < 1) throw ConfigError("repeats must be >= 1");
  if (synth.has_value() == csv_path.has_value()) {
    throw ConfigError("exactly one data source (synthetic or csv) is required");
  }
  if (synth.has_value()) validate_spec(*synth);
  if (!(agg_fraction > 0.0 && agg_fraction < 1.0)) {
    throw ConfigError("agg_fraction must lie in (0, 1)");
  }
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) {
    throw ConfigError("test_fraction must lie in [0, 1)");
  }
  run.validate();
  if (partition == PartitionMode::Heterogeneous &&
      !group_client_fractions.empty()) {
    double sum = 0.0;
    for (double f : group_client_fractions) sum += f;
    if (std::fabs(sum - 1.0) > 1e-9) {
      throw ConfigError("partition client_fractions must sum to 1");
    }
  }
}

ExperimentSpec parse_experiment_file(const std::string& path) {
  const ConfigFile cfg = read_config(path);
  ExperimentSpec spec;
  spec.name = cfg.require("name");
  spec.out_dir = cfg.get("out_dir").value_or(spec.out_dir);
  spec.repeats = to_int<int>(cfg.get("repeats").value_or("5"), "repeats");
  spec.run.seed = to_int<std::uint64_t>(cfg.get("seed").value_or("0"), "seed");

  const std::string source = cfg.require("data.source");
  if (source == "synthetic") {
    spec.synth = parse_synth(cfg);
  } else if (source == "csv") {
    spec.csv_path = cfg.require("data.path");
    CsvSchema schema;
    schema.feature_columns = split_list(cfg.require("data.feature_columns"));
    schema.label_column = cfg.get("data.label_column").value_or("label");
    schema.group_column = cfg.get("data.group_column").value_or("group");
    schema.num_groups =
        to_int<int>(cfg.get("data.groups").value_or("2"), "data.groups");
    spec.csv_schema = schema;
  } else {
    throw ConfigError("data.source must be 'synthetic' or 'csv'");
  }

  spec.partition = parse_partition_mode(
      cfg.get("partition.mode").value_or("heterogeneous"));
  if (auto v = cfg.get("partition.client_fractions"); v.has_value()) {
    spec.group_client_fractions =
        to_double_list(*v, "partition.client_fractions");
  }
  spec.agg_fraction = to_double(
      cfg.get("partition.agg_fraction").value_or("0.15"), "partition.agg_fraction");
  spec.test_fraction = to_double(
      cfg.get("partition.test_fraction").value_or("0"), "partition.test_fraction");

  RunConfig& run = spec.run;
  run.num_clients = to_int<int>(cfg.require("train.clients"), "train.clients");
  run.rounds = to_int<int>(cfg.require("train.rounds"), "train.rounds");
  run.local_epochs =
      to_int<int>(cfg.get("train.epochs").value_or("1"), "train.epochs");
  run.learning_rate = to_double(
      cfg.get("train.learning_rate").value_or("0.1"), "train.learning_rate");
  run.batch_size =
      to_int<int>(cfg.get("train.batch_size").value_or("32"), "train.batch_size");
  run.accuracy_tolerance =
      to_double(cfg.get("train.tolerance").value_or("1.0"), "train.tolerance");
  run.threshold_round = to_int<int>(
      cfg.get("train.threshold_round").value_or("1"), "train.threshold_round");
  run.participation = to_double(
      cfg.get("train.participation").value_or("1.0"), "train.participation");
  run.lambda = to_double(cfg.get("train.lambda").value_or("0"), "train.lambda");
  run.decision_threshold = to_double(
      cfg.get("train.threshold").value_or("0.5"), "train.threshold");
  run.fair_check_band = to_bool(
      cfg.get("train.fair_check_band").value_or("false"), "train.fair_check_band");
  if (auto v = cfg.get("train.time_budget_seconds"); v.has_value()) {
    run.time_budget_seconds = to_double(*v, "train.time_budget_seconds");
  }

  const std::string model = cfg.get("train.model").value_or("linear");
  if (model == "linear") {
    run.arch.kind = ArchKind::Linear;
  } else if (model == "mlp") {
    run.arch.kind = ArchKind::Mlp;
    run.arch.hidden_dim =
        to_int<int>(cfg.get("train.hidden").value_or("8"), "train.hidden");
  } else {
    throw ConfigError("train.model must be 'linear' or 'mlp'");
  }
  run.arch.input_dim =
      spec.synth.has_value()
          ? spec.synth->feature_dim
          : static_cast<int>(spec.csv_schema.feature_columns.size());

  run.heuristic = parse_heuristic(cfg);

  if (auto v = cfg.get("sweep.alphas"); v.has_value()) {
    spec.sweep_alphas = to_double_list(*v, "sweep.alphas");
  }
  spec.oracle_partition = parse_partition_mode(
      cfg.get("oracle.mode").value_or("homogeneous"));

  cfg.finish();
  spec.validate();
  return spec;
}

void apply_overrides(ExperimentSpec& spec, const CliOverrides& overrides) {
  if (overrides.out_dir.has_value()) spec.out_dir = *overrides.out_dir;
  if (overrides.seed.has_value()) spec.run.seed = *overrides.seed;
  if (overrides.repeats.has_value()) spec.repeats = *overrides.repeats;
  spec.validate();
}

ExperimentSpec default_desk_spec() {
  ExperimentSpec spec;
  spec.name = "desk";
  spec.repeats = 5;

  SynthSpec synth;
  synth.num_samples = 12000;
  synth.feature_dim = 2;
  synth.num_groups = 2;
  synth.group_proportions = {0.5, 0.5};
  synth.noise_scale = 0.6;
  synth.label_flip_rates = {0.0, 0.25};
  build_geometry(synth, /*separation=*/1.0, /*group_offset=*/2.0,
                 /*boundary_shift=*/0.8);
  spec.synth = synth;

  spec.partition = PartitionMode::Heterogeneous;
  spec.group_client_fractions = {0.5, 0.5};
  spec.agg_fraction = 0.15;
  spec.test_fraction = 0.0;

  RunConfig& run = spec.run;
  run.num_clients = 10;
  run.rounds = 30;
  run.local_epochs = 2;
  run.learning_rate = 0.5;
  run.batch_size = 32;
  run.arch = {ArchKind::Linear, synth.feature_dim, 0};
  run.heuristic = {HeuristicKind::FairAccAvg, 10.0, FairnessNotion::EqualizedOdds};
  run.accuracy_tolerance = 1.0;
  run.threshold_round = 5;
  run.participation = 1.0;
  run.seed = 42;
  run.lambda = 1.0;

  spec.sweep_alphas = {2, 10, 50, 100};
  spec.validate();
  return spec;
}

RepeatData prepare_repeat_data(const ExperimentSpec& spec, PartitionMode mode,
                               int repeat) {
  const std::uint64_t data_seed = spec.run.seed + static_cast<std::uint64_t>(repeat);

  Dataset pool;
  if (spec.synth.has_value()) {
    SynthSpec synth = *spec.synth;
    synth.seed = data_seed;
    pool = generate_synthetic(synth);
  } else {
    pool = load_csv(*spec.csv_path, spec.csv_schema);
  }

  RepeatData data;
  Dataset remainder;
  if (spec.test_fraction > 0.0) {
    SplitResult split = split_aggregator_set(
        pool, spec.test_fraction, derive_seed(data_seed, kTestSplitStream));
    data.test_set = std::move(split.aggregator);
    remainder = std::move(split.train);
  } else {
    remainder = std::move(pool);
  }

  SplitResult split = split_aggregator_set(
      remainder, spec.agg_fraction, derive_seed(data_seed, kAggSplitStream));
  data.agg_set = std::move(split.aggregator);

  const std::uint64_t part_seed = derive_seed(data_seed, kPartitionStream);
  if (mode == PartitionMode::Heterogeneous) {
    std::vector<double> fractions = spec.group_client_fractions;
    if (fractions.empty()) {
      fractions.assign(split.train.num_groups, 1.0 / split.train.num_groups);
    }
    data.shards = partition_heterogeneous(split.train, spec.run.num_clients,
                                          fractions, part_seed);
  } else {
    data.shards =
        partition_homogeneous(split.train, spec.run.num_clients, part_seed);
  }
  return data;
}

RunResult execute_repeat(const ExperimentSpec& spec,
                         const HeuristicSpec& heuristic, PartitionMode mode,
                         int repeat, bool lmm) {
  RepeatData data = prepare_repeat_data(spec, mode, repeat);
  RunConfig cfg = spec.run;
  cfg.heuristic = heuristic;
  cfg.seed = spec.run.seed + static_cast<std::uint64_t>(repeat);
  const Dataset* test = data.test_set.has_value() ? &*data.test_set : nullptr;
  return lmm ? run_oracle_lmm(cfg, data.shards, data.agg_set, test)
             : run_federated(cfg, data.shards, data.agg_set, test);
}

SummaryRow summarize(const std::string& label,
                     const std::vector<RunResult>& results) {
  SummaryRow row;
  row.label = label;
  row.repeats = static_cast<int>(results.size());
  std::vector<std::optional<double>> acc, eopp, eo, ap;
  for (const RunResult& r : results) {
    const FairnessReport& rep = final_report(r);
    auto pct = [](const std::optional<double>& v) -> std::optional<double> {
      if (!v.has_value()) return std::nullopt;
      return 100.0 * *v;
    };
    acc.push_back(100.0 * rep.accuracy);
    eopp.push_back(pct(rep.delta_eopp));
    eo.push_back(pct(rep.delta_eo));
    ap.push_back(pct(rep.delta_ap));
  }
  row.accuracy = stats_of(acc);
  row.d_eopp = stats_of(eopp);
  row.d_eo = stats_of(eo);
  row.d_ap = stats_of(ap);
  return row;
}

double relative_improvement(double baseline, double value) {
  return 100.0 * (baseline - value) / baseline;
}

int cmd_run(const ExperimentSpec& spec) {
  spec.validate();
  const Batch batch = run_batch(spec, spec.run.heuristic.label(),
                                spec.run.heuristic, spec.partition, false);
  write_summary_files(spec, {batch.row}, {}, {});
  return 0;
}

int cmd_sweep_alpha(const ExperimentSpec& spec,
                    const std::vector<double>& alphas) {
  spec.validate();
  if (alphas.empty()) throw ConfigError("sweep needs at least one alpha value");
  for (double a : alphas) {
    if (!(a > 0.0 && a <= 100.0)) {
      throw ConfigError("sweep alpha " + fmt(a) + " is not in (0, 100]");
    }
  }
  std::vector<double> sorted_alphas(alphas);
  std::sort(sorted_alphas.begin(), sorted_alphas.end());

  std::vector<SummaryRow> rows;
  std::string sweep_csv =
      "heuristic,alpha,acc_mean,acc_median,eopp_mean,eopp_median,"
      "eo_mean,eo_median,ap_mean,ap_median,nesting_rounds,nesting_violations\n";

  for (HeuristicKind kind : {HeuristicKind::FairAvg, HeuristicKind::FairAccAvg}) {
    for (double alpha : alphas) {
      HeuristicSpec h{kind, alpha, spec.run.heuristic.notion};
      const Batch batch = run_batch(spec, h.label(), h, spec.partition, false);
      rows.push_back(batch.row);

      // Selection-set nesting diagnostic: under each round's logged scores,
      // the top-alpha set must grow monotonically with alpha.
      long long rounds_checked = 0;
      long long violations = 0;
      for (const RunResult& result : batch.results) {
        for (const RoundLog& log : result.logs) {
          if (log.scores.empty()) continue;
          std::vector<ScoredSubmission> scored;
          scored.reserve(log.scores.size());
          for (const ClientScore& s : log.scores) {
            ClientSubmission sub;
            sub.client_id = s.client_id;
            sub.num_samples = 1;
            scored.push_back({std::move(sub), s.accuracy, s.delta});
          }
          std::vector<int> previous;
          bool nested = true;
          for (double a : sorted_alphas) {
            std::vector<int> ids = kind == HeuristicKind::FairAvg
                                       ? fair_avg_selection(scored, a)
                                       : fair_acc_avg_selection(scored, a);
            if (!std::includes(ids.begin(), ids.end(), previous.begin(),
                               previous.end())) {
              nested = false;
            }
            previous = std::move(ids);
          }
          ++rounds_checked;
          if (!nested) ++violations;
        }
      }
      if (violations > 0) {
        log_warn(h.label() + ": " + std::to_string(violations) +
                 " rounds violated selection-set nesting");
      }

      std::string line = std::string(heuristic_kind_name(kind)) + ',' + fmt(alpha);
      line += ',' + opt_cell(batch.row.accuracy.mean) + ',' +
              opt_cell(batch.row.accuracy.median);
      line += ',' + opt_cell(batch.row.d_eopp.mean) + ',' +
              opt_cell(batch.row.d_eopp.median);
      line += ',' + opt_cell(batch.row.d_eo.mean) + ',' +
              opt_cell(batch.row.d_eo.median);
      line += ',' + opt_cell(batch.row.d_ap.mean) + ',' +
              opt_cell(batch.row.d_ap.median);
      line += ',' + std::to_string(rounds_checked) + ',' +
              std::to_string(violations);
      sweep_csv += line + '\n';
    }
  }

  write_summary_files(spec, rows, {}, {});
  atomic_write(fs::path(spec.out_dir) / spec.name / "sweep.csv", sweep_csv);
  return 0;
}

int cmd_compare(const ExperimentSpec& spec) {
  spec.validate();
  const double alpha = spec.run.heuristic.alpha.value_or(10.0);
  const FairnessNotion notion = spec.run.heuristic.notion;

  struct Row {
    std::string label;
    HeuristicSpec heuristic;
  };
  const std::vector<Row> plan = {
      {"FedAvg-DH", {HeuristicKind::FedAvg, std::nullopt, notion}},
      {"FairBest", {HeuristicKind::FairBest, std::nullopt, notion}},
      {HeuristicSpec{HeuristicKind::FairAvg, alpha, notion}.label(),
       {HeuristicKind::FairAvg, alpha, notion}},
      {HeuristicSpec{HeuristicKind::FairAccAvg, alpha, notion}.label(),
       {HeuristicKind::FairAccAvg, alpha, notion}},
  };

  std::vector<Batch> batches;
  for (const Row& r : plan) {
    batches.push_back(
        run_batch(spec, r.label, r.heuristic, PartitionMode::Heterogeneous,
                  false));
  }

  // Relative fairness improvement versus the FedAvg-DH baseline, from the
  // mean violations.
  const SummaryRow& base = batches.front().row;
  auto improvement = [](const MetricStats& b, const MetricStats& h)
      -> std::optional<double> {
    if (!b.mean.has_value() || !h.mean.has_value() || *b.mean == 0.0) {
      return std::nullopt;
    }
    return relative_improvement(*b.mean, *h.mean);
  };

  const bool with_md = spec.repeats >= 3;
  if (!with_md) {
    log_warn("mahalanobis columns omitted: covariance needs >= 3 repeats");
  }

  std::vector<std::string> extra_headers = {"improv_eopp", "improv_eo",
                                            "improv_ap"};
  if (with_md) {
    extra_headers.insert(extra_headers.end(), {"md_eopp", "md_eo", "md_ap"});
  }

  std::vector<std::vector<std::string>> extra_cells;
  for (const Batch& batch : batches) {
    std::vector<std::string> cells;
    cells.push_back(opt_cell(improvement(base.d_eopp, batch.row.d_eopp)));
    cells.push_back(opt_cell(improvement(base.d_eo, batch.row.d_eo)));
    cells.push_back(opt_cell(improvement(base.d_ap, batch.row.d_ap)));
    if (with_md) {
      for (FairnessNotion k :
           {FairnessNotion::EqualOpportunity, FairnessNotion::EqualizedOdds,
            FairnessNotion::AccuracyParity}) {
        std::vector<std::pair<double, double>> points;
        bool defined = true;
        for (const RunResult& result : batch.results) {
          const FairnessReport& rep = final_report(result);
          const auto delta = violation(rep, k);
          if (!delta.has_value()) {
            defined = false;
            break;
          }
          points.emplace_back(100.0 * (1.0 - rep.accuracy), 100.0 * *delta);
        }
        std::optional<double> md;
        if (defined) {
          try {
            const std::vector<double> distances = mahalanobis_rank(points);
            double mean = 0.0;
            for (double d : distances) mean += d;
            md = mean / static_cast<double>(distances.size());
          } catch (const DegenerateCovariance&) {
            log_warn(batch.label +
                     ": degenerate trade-off covariance, md omitted");
          }
        }
        cells.push_back(opt_cell(md));
      }
    }
    extra_cells.push_back(std::move(cells));
  }

  std::vector<SummaryRow> rows;
  for (const Batch& batch : batches) rows.push_back(batch.row);
  write_summary_files(spec, rows, extra_headers, extra_cells);
  return 0;
}

int cmd_oracle(const ExperimentSpec& spec) {
  spec.validate();
  std::vector<SummaryRow> rows;

  rows.push_back(run_batch(spec, "FedAvg",
                           {HeuristicKind::FedAvg, std::nullopt,
                            spec.run.heuristic.notion},
                           spec.oracle_partition, false)
                     .row);
  rows.push_back(run_batch(spec, "FedAvg-LMM",
                           {HeuristicKind::FedAvg, std::nullopt,
                            spec.run.heuristic.notion},
                           spec.oracle_partition, true)
                     .row);

  HeuristicSpec best = spec.run.heuristic;
  if (best.kind == HeuristicKind::FedAvg) {
    best = {HeuristicKind::FairAccAvg, 10.0, best.notion};
  }
  rows.push_back(
      run_batch(spec, best.label(), best, PartitionMode::Heterogeneous, false)
          .row);

  write_summary_files(spec, rows, {}, {});
  return 0;
}

}  // namespace fairfed
