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

#ifndef FAIRFED_ERRORS_HPP_
#define FAIRFED_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace fairfed {

// Root of all library errors. CLI maps ConfigError to exit code 2,
// everything else derived from Error to exit code 1.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid configuration or precondition violation (bad field values,
// dimension/architecture mismatches, malformed experiment specs).
struct ConfigError : Error {
  using Error::Error;
};

// CSV and blob ingestion failures; messages cite the offending row.
struct IngestError : Error {
  using Error::Error;
};

struct PartitionError : Error {
  using Error::Error;
};

struct SplitError : Error {
  using Error::Error;
};

// SGD produced a non-finite or runaway loss; message names epoch and batch.
struct DivergenceError : Error {
  using Error::Error;
};

// The fairness penalty cannot be evaluated because the training data lacks
// a demographic group or a label stratum the notion needs.
struct UndefinedFairnessLoss : Error {
  using Error::Error;
};

// The aggregator set cannot score submissions for the requested notion.
struct ScoringError : Error {
  using Error::Error;
};

// No submission with a defined violation is available for selection.
struct SelectionError : Error {
  using Error::Error;
};

struct DomainError : Error {
  using Error::Error;
};

// Sample covariance of the trade-off points is singular.
struct DegenerateCovariance : Error {
  using Error::Error;
};

}  // namespace fairfed

#endif  // FAIRFED_ERRORS_HPP_
