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

#include "fairfed/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>
#include <unordered_map>

#include "fairfed/errors.hpp"

namespace fairfed {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string::size_type start = 0;
  while (true) {
    auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

double parse_double(const std::string& field, const std::string& column,
                    std::size_t row) {
  double value = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw IngestError("row " + std::to_string(row) + ": column '" + column +
                      "' value '" + field + "' is not a number");
  }
  return value;
}

int parse_int(const std::string& field, const std::string& column,
              std::size_t row) {
  int value = 0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw IngestError("row " + std::to_string(row) + ": column '" + column +
                      "' value '" + field + "' is not an integer");
  }
  return value;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

CsvSchema default_schema(int feature_dim, int num_groups) {
  CsvSchema schema;
  schema.feature_columns.reserve(feature_dim);
  for (int d = 0; d < feature_dim; ++d) {
    schema.feature_columns.push_back("f" + std::to_string(d));
  }
  schema.num_groups = num_groups;
  return schema;
}

Dataset load_csv(const std::string& path, const CsvSchema& schema) {
  if (schema.feature_columns.empty()) {
    throw ConfigError("schema must name at least one feature column");
  }
  if (schema.num_groups < 1) {
    throw ConfigError("schema num_groups must be >= 1");
  }

  std::ifstream file(path);
  if (!file) throw IngestError("cannot open '" + path + "'");

  std::string line;
  if (!std::getline(file, line)) throw IngestError("'" + path + "' is empty");
  strip_cr(line);

  std::unordered_map<std::string, std::size_t> header;
  {
    auto names = split_fields(line);
    for (std::size_t i = 0; i < names.size(); ++i) header[names[i]] = i;
  }
  auto column_index = [&](const std::string& name) {
    auto it = header.find(name);
    if (it == header.end()) {
      throw IngestError("'" + path + "' is missing column '" + name + "'");
    }
    return it->second;
  };

  std::vector<std::size_t> feature_idx;
  feature_idx.reserve(schema.feature_columns.size());
  for (const auto& name : schema.feature_columns) {
    feature_idx.push_back(column_index(name));
  }
  const std::size_t label_idx = column_index(schema.label_column);
  const std::size_t group_idx = column_index(schema.group_column);

  Dataset data;
  data.feature_dim = static_cast<int>(schema.feature_columns.size());
  data.num_groups = schema.num_groups;

  std::size_t row = 0;
  while (std::getline(file, line)) {
    strip_cr(line);
    if (line.empty()) continue;
    ++row;
    auto fields = split_fields(line);
    auto field = [&](std::size_t idx, const std::string& column) -> const std::string& {
      if (idx >= fields.size()) {
        throw IngestError("row " + std::to_string(row) + ": column '" + column +
                          "' is missing");
      }
      return fields[idx];
    };

    Sample sample;
    sample.features.reserve(feature_idx.size());
    for (std::size_t f = 0; f < feature_idx.size(); ++f) {
      sample.features.push_back(parse_double(
          field(feature_idx[f], schema.feature_columns[f]),
          schema.feature_columns[f], row));
    }
    sample.label = parse_int(field(label_idx, schema.label_column),
                             schema.label_column, row);
    if (sample.label != 0 && sample.label != 1) {
      throw IngestError("row " + std::to_string(row) + ": label " +
                        std::to_string(sample.label) + " is not in {0,1}");
    }
    sample.group = parse_int(field(group_idx, schema.group_column),
                             schema.group_column, row);
    if (sample.group < 0 || sample.group >= schema.num_groups) {
      throw IngestError("row " + std::to_string(row) + ": group " +
                        std::to_string(sample.group) + " is not in [0, " +
                        std::to_string(schema.num_groups) + ")");
    }
    data.samples.push_back(std::move(sample));
  }

  if (data.samples.empty()) throw IngestError("'" + path + "' has no data rows");
  return data;
}

void export_csv(const Dataset& data, const std::string& path,
                const CsvSchema& schema) {
  if (schema.feature_columns.size() != static_cast<std::size_t>(data.feature_dim)) {
    throw ConfigError("schema feature columns do not match dataset feature_dim");
  }
  std::ofstream file(path);
  if (!file) throw IngestError("cannot write '" + path + "'");

  for (const auto& name : schema.feature_columns) file << name << ',';
  file << schema.label_column << ',' << schema.group_column << '\n';

  char buf[32];
  for (const Sample& s : data.samples) {
    for (double v : s.features) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      file << buf << ',';
    }
    file << s.label << ',' << s.group << '\n';
  }
  if (!file) throw IngestError("write to '" + path + "' failed");
}

}  // namespace fairfed
