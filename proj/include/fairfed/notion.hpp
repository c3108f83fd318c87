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

#ifndef FAIRFED_NOTION_HPP_
#define FAIRFED_NOTION_HPP_

#include <string>

#include "fairfed/dataset.hpp"

namespace fairfed {

// Group-fairness notions: equality of opportunity (FNR parity), equalized
// odds (FNR and FPR parity), accuracy parity (summed error-rate parity).
enum class FairnessNotion { EqualOpportunity, EqualizedOdds, AccuracyParity };

const char* notion_name(FairnessNotion notion);  // "EOpp" | "EO" | "AP"

// Parses "EOpp" / "EO" / "AP" (case-insensitive); throws ConfigError.
FairnessNotion parse_notion(const std::string& text);

// True when the dataset carries every label stratum the notion's rates need:
// every declared group present with at least one positive sample (EOpp), or
// at least one positive and one negative sample per group (EO, AP).
bool is_group_complete(const Dataset& data, FairnessNotion notion);

// Throws UndefinedFairnessLoss describing the first missing stratum.
void require_group_complete(const Dataset& data, FairnessNotion notion);

}  // namespace fairfed

#endif  // FAIRFED_NOTION_HPP_
