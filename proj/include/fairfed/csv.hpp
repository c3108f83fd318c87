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

#ifndef FAIRFED_CSV_HPP_
#define FAIRFED_CSV_HPP_

#include <string>
#include <vector>

#include "fairfed/dataset.hpp"

namespace fairfed {

// Column mapping for tabular data files: comma-delimited, header row,
// decimal feature columns, integer label and group columns, no quoting.
struct CsvSchema {
  std::vector<std::string> feature_columns;
  std::string label_column = "label";
  std::string group_column = "group";
  int num_groups = 2;
};

CsvSchema default_schema(int feature_dim, int num_groups = 2);

// Rows map to samples in file order. Throws IngestError citing the data-row
// number (1-based, header excluded) on malformed values.
Dataset load_csv(const std::string& path, const CsvSchema& schema);

void export_csv(const Dataset& data, const std::string& path,
                const CsvSchema& schema);

}  // namespace fairfed

#endif  // FAIRFED_CSV_HPP_
