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

#include "fairfed/serialization.hpp"

#include <bit>
#include <cstdio>
#include <sstream>

#include "fairfed/errors.hpp"

namespace fairfed {

namespace {

constexpr char kMagic[4] = {'F', 'F', 'P', '1'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back((v >> (8 * i)) & 0xFF);
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back((v >> (8 * i)) & 0xFF);
}

std::uint32_t get_u32(const std::vector<std::uint8_t>& in, std::size_t pos) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t(in[pos + i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(const std::vector<std::uint8_t>& in, std::size_t pos) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(in[pos + i]) << (8 * i);
  return v;
}

nlohmann::json opt_json(const std::optional<double>& v) {
  if (!v.has_value()) return nullptr;
  return *v;
}

nlohmann::json opt_json(const std::optional<bool>& v) {
  if (!v.has_value()) return nullptr;
  return *v;
}

std::string csv_cell(const std::optional<double>& v) {
  if (!v.has_value()) return "";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", *v);
  return buf;
}

constexpr char kB64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

}  // namespace

std::vector<std::uint8_t> serialize_params(const ModelParams& params) {
  validate_arch(params.arch);
  if (static_cast<int>(params.values.size()) != params.arch.param_count()) {
    throw ConfigError("parameter vector does not match its architecture");
  }
  std::vector<std::uint8_t> out;
  out.reserve(4 + 1 + 8 + 8 + 8 * params.values.size());
  for (char c : kMagic) out.push_back(static_cast<std::uint8_t>(c));
  out.push_back(static_cast<std::uint8_t>(params.arch.kind));
  put_u32(out, static_cast<std::uint32_t>(params.arch.input_dim));
  put_u32(out, static_cast<std::uint32_t>(params.arch.hidden_dim));
  put_u64(out, params.values.size());
  for (double v : params.values) put_u64(out, std::bit_cast<std::uint64_t>(v));
  return out;
}

ModelParams deserialize_params(const std::vector<std::uint8_t>& blob) {
  constexpr std::size_t kHeader = 4 + 1 + 4 + 4 + 8;
  if (blob.size() < kHeader) throw IngestError("parameter blob is truncated");
  for (int i = 0; i < 4; ++i) {
    if (blob[i] != static_cast<std::uint8_t>(kMagic[i])) {
      throw IngestError("parameter blob has a bad magic header");
    }
  }
  ModelParams params;
  const std::uint8_t kind = blob[4];
  if (kind > 1) throw IngestError("parameter blob names an unknown architecture");
  params.arch.kind = static_cast<ArchKind>(kind);
  params.arch.input_dim = static_cast<int>(get_u32(blob, 5));
  params.arch.hidden_dim = static_cast<int>(get_u32(blob, 9));
  const std::uint64_t count = get_u64(blob, 13);
  validate_arch(params.arch);
  if (count != static_cast<std::uint64_t>(params.arch.param_count())) {
    throw IngestError("parameter blob count does not match its architecture");
  }
  if (blob.size() != kHeader + 8 * count) {
    throw IngestError("parameter blob has a bad length");
  }
  params.values.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    params.values.push_back(
        std::bit_cast<double>(get_u64(blob, kHeader + 8 * i)));
  }
  return params;
}

std::string params_debug_text(const ModelParams& params) {
  std::string out;
  char buf[40];
  for (double v : params.values) {
    std::snprintf(buf, sizeof(buf), "%.17g\n", v);
    out += buf;
  }
  return out;
}

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 3 <= bytes.size(); i += 3) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out.push_back(kB64Alphabet[(v >> 18) & 63]);
    out.push_back(kB64Alphabet[(v >> 12) & 63]);
    out.push_back(kB64Alphabet[(v >> 6) & 63]);
    out.push_back(kB64Alphabet[v & 63]);
  }
  const std::size_t rest = bytes.size() - i;
  if (rest == 1) {
    const std::uint32_t v = bytes[i] << 16;
    out.push_back(kB64Alphabet[(v >> 18) & 63]);
    out.push_back(kB64Alphabet[(v >> 12) & 63]);
    out += "==";
  } else if (rest == 2) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8);
    out.push_back(kB64Alphabet[(v >> 18) & 63]);
    out.push_back(kB64Alphabet[(v >> 12) & 63]);
    out.push_back(kB64Alphabet[(v >> 6) & 63]);
    out.push_back('=');
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  auto value_of = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  if (text.size() % 4 != 0) throw IngestError("base64 text has a bad length");
  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    int vals[4];
    int pad = 0;
    for (int j = 0; j < 4; ++j) {
      const char c = text[i + j];
      if (c == '=' && i + 4 == text.size() && j >= 2) {
        vals[j] = 0;
        ++pad;
        continue;
      }
      vals[j] = value_of(c);
      if (vals[j] < 0) throw IngestError("base64 text has a bad character");
    }
    const std::uint32_t v =
        (vals[0] << 18) | (vals[1] << 12) | (vals[2] << 6) | vals[3];
    out.push_back((v >> 16) & 0xFF);
    if (pad < 2) out.push_back((v >> 8) & 0xFF);
    if (pad < 1) out.push_back(v & 0xFF);
  }
  return out;
}

nlohmann::json report_to_json(const FairnessReport& report) {
  nlohmann::json j;
  j["accuracy"] = report.accuracy;
  j["fnr"] = opt_json(report.fnr);
  j["fpr"] = opt_json(report.fpr);
  nlohmann::json fnr_g = nlohmann::json::array();
  nlohmann::json fpr_g = nlohmann::json::array();
  for (const auto& v : report.group_fnr) fnr_g.push_back(opt_json(v));
  for (const auto& v : report.group_fpr) fpr_g.push_back(opt_json(v));
  j["group_fnr"] = std::move(fnr_g);
  j["group_fpr"] = std::move(fpr_g);
  j["delta_eopp"] = opt_json(report.delta_eopp);
  j["delta_eo"] = opt_json(report.delta_eo);
  j["delta_ap"] = opt_json(report.delta_ap);
  return j;
}

nlohmann::json round_log_to_json(const RoundLog& log) {
  nlohmann::json j;
  j["round"] = log.round;
  j["selected"] = log.selected;
  j["aggregated"] = log.aggregated;
  nlohmann::json scores = nlohmann::json::array();
  for (const ClientScore& s : log.scores) {
    scores.push_back({{"client_id", s.client_id},
                      {"accuracy", s.accuracy},
                      {"delta", opt_json(s.delta)}});
  }
  j["scores"] = std::move(scores);
  j["acc_agg"] = log.acc_agg;
  j["acc_test"] = opt_json(log.acc_test);
  j["d_eopp"] = opt_json(log.d_eopp);
  j["d_eo"] = opt_json(log.d_eo);
  j["d_ap"] = opt_json(log.d_ap);
  j["d_eopp_test"] = opt_json(log.d_eopp_test);
  j["d_eo_test"] = opt_json(log.d_eo_test);
  j["d_ap_test"] = opt_json(log.d_ap_test);
  j["d_acc"] = opt_json(log.d_acc);
  j["phi_best_updated"] = log.phi_best_updated;
  j["fair_check_invoked"] = log.fair_check_invoked;
  j["fair_check_kept_incumbent"] = opt_json(log.fair_check_kept_incumbent);
  j["fair_check_delta_incumbent"] = opt_json(log.fair_check_delta_incumbent);
  j["fair_check_delta_challenger"] = opt_json(log.fair_check_delta_challenger);
  j["stopped"] = log.stopped;
  return j;
}

nlohmann::json run_result_to_json(const RunResult& result) {
  const RunConfig& cfg = result.config;
  nlohmann::json config;
  config["num_clients"] = cfg.num_clients;
  config["rounds"] = cfg.rounds;
  config["local_epochs"] = cfg.local_epochs;
  config["learning_rate"] = cfg.learning_rate;
  config["batch_size"] = cfg.batch_size;
  config["arch"] = {{"kind", cfg.arch.kind == ArchKind::Linear ? "linear" : "mlp"},
                    {"input_dim", cfg.arch.input_dim},
                    {"hidden_dim", cfg.arch.hidden_dim}};
  config["heuristic"] = {{"kind", heuristic_kind_name(cfg.heuristic.kind)},
                         {"alpha", opt_json(cfg.heuristic.alpha)},
                         {"notion", notion_name(cfg.heuristic.notion)}};
  config["accuracy_tolerance"] = cfg.accuracy_tolerance;
  config["threshold_round"] = cfg.threshold_round;
  config["participation"] = cfg.participation;
  config["seed"] = cfg.seed;
  config["lambda"] = cfg.lambda;
  config["decision_threshold"] = cfg.decision_threshold;
  config["fair_check_band"] = cfg.fair_check_band;

  nlohmann::json logs = nlohmann::json::array();
  for (const RoundLog& log : result.logs) logs.push_back(round_log_to_json(log));

  nlohmann::json j;
  j["config"] = std::move(config);
  j["stop_round"] = result.stop_round;
  j["logs"] = std::move(logs);
  j["final_params"] = base64_encode(serialize_params(result.final_params));
  j["final_agg_report"] = report_to_json(result.final_agg_report);
  j["final_test_report"] = result.final_test_report.has_value()
                               ? report_to_json(*result.final_test_report)
                               : nlohmann::json(nullptr);
  j["wall_seconds"] = result.wall_seconds;
  return j;
}

std::string run_result_round_csv(const RunResult& result) {
  std::string out =
      "round,acc_agg,acc_test,d_eopp,d_eo,d_ap,d_acc,phi_best_updated,"
      "fair_check,stopped\n";
  for (const RoundLog& log : result.logs) {
    out += std::to_string(log.round);
    out += ',';
    out += csv_cell(log.acc_agg);
    out += ',';
    out += csv_cell(log.acc_test);
    out += ',';
    out += csv_cell(log.d_eopp);
    out += ',';
    out += csv_cell(log.d_eo);
    out += ',';
    out += csv_cell(log.d_ap);
    out += ',';
    out += csv_cell(log.d_acc);
    out += ',';
    out += log.phi_best_updated ? '1' : '0';
    out += ',';
    out += log.fair_check_invoked ? '1' : '0';
    out += ',';
    out += log.stopped ? '1' : '0';
    out += '\n';
  }
  return out;
}

}  // namespace fairfed
