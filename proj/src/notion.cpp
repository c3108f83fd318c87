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

#include "fairfed/notion.hpp"

#include <algorithm>
#include <cctype>
#include <vector>

#include "fairfed/errors.hpp"

namespace fairfed {

const char* notion_name(FairnessNotion notion) {
  switch (notion) {
    case FairnessNotion::EqualOpportunity: return "EOpp";
    case FairnessNotion::EqualizedOdds: return "EO";
    case FairnessNotion::AccuracyParity: return "AP";
  }
  return "?";
}

FairnessNotion parse_notion(const std::string& text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "eopp") return FairnessNotion::EqualOpportunity;
  if (lower == "eo") return FairnessNotion::EqualizedOdds;
  if (lower == "ap") return FairnessNotion::AccuracyParity;
  throw ConfigError("unknown fairness notion '" + text +
                    "' (expected EOpp, EO, or AP)");
}

namespace {

// Returns (group, label) for the first missing stratum, or (-1, -1).
std::pair<int, int> first_missing_stratum(const Dataset& data,
                                          FairnessNotion notion) {
  const bool needs_negatives = notion != FairnessNotion::EqualOpportunity;
  std::vector<int> positives(data.num_groups, 0);
  std::vector<int> negatives(data.num_groups, 0);
  for (const Sample& s : data.samples) {
    if (s.group < 0 || s.group >= data.num_groups) continue;
    (s.label == 1 ? positives : negatives)[s.group] += 1;
  }
  for (int g = 0; g < data.num_groups; ++g) {
    if (positives[g] == 0) return {g, 1};
    if (needs_negatives && negatives[g] == 0) return {g, 0};
  }
  return {-1, -1};
}

}  // namespace

bool is_group_complete(const Dataset& data, FairnessNotion notion) {
  return first_missing_stratum(data, notion).first < 0;
}

void require_group_complete(const Dataset& data, FairnessNotion notion) {
  auto [group, label] = first_missing_stratum(data, notion);
  if (group < 0) return;
  throw UndefinedFairnessLoss(
      std::string("fairness violation for notion ") + notion_name(notion) +
      " is undefined: group " + std::to_string(group) + " has no " +
      (label == 1 ? "positive" : "negative") + " samples");
}

}  // namespace fairfed
