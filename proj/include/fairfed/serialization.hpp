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

#ifndef FAIRFED_SERIALIZATION_HPP_
#define FAIRFED_SERIALIZATION_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fairfed/fairness.hpp"
#include "fairfed/model.hpp"
#include "fairfed/orchestrator.hpp"

namespace fairfed {

// Versioned binary blob: magic "FFP1", architecture descriptor, then the
// parameter values as little-endian 64-bit floats.
std::vector<std::uint8_t> serialize_params(const ModelParams& params);
ModelParams deserialize_params(const std::vector<std::uint8_t>& blob);

// Debug text form, one value per line.
std::string params_debug_text(const ModelParams& params);

std::string base64_encode(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

// Flat JSON object with snake_case keys; UNDEFINED rates serialize as null.
nlohmann::json report_to_json(const FairnessReport& report);

nlohmann::json round_log_to_json(const RoundLog& log);

// Full run document: config echo, per-round logs, final reports, and the
// final parameters as a base64 blob.
nlohmann::json run_result_to_json(const RunResult& result);

// Per-round CSV with columns round, acc_agg, acc_test, d_eopp, d_eo, d_ap,
// d_acc, phi_best_updated, fair_check, stopped. Undefined cells are empty.
std::string run_result_round_csv(const RunResult& result);

}  // namespace fairfed

#endif  // FAIRFED_SERIALIZATION_HPP_
