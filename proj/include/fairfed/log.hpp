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

#ifndef FAIRFED_LOG_HPP_
#define FAIRFED_LOG_HPP_

#include <string>

namespace fairfed {

enum class LogLevel { Quiet = 0, Warn = 1, Info = 2, Debug = 3 };

// Threshold comes from the FAIRFED_LOG environment variable
// (quiet|warn|info|debug), default info. Messages go to stderr.
LogLevel log_threshold();

void log_warn(const std::string& message);
void log_info(const std::string& message);
void log_debug(const std::string& message);

}  // namespace fairfed

#endif  // FAIRFED_LOG_HPP_
