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

#include "fairfed/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace fairfed {

LogLevel log_threshold() {
  static const LogLevel level = [] {
    const char* env = std::getenv("FAIRFED_LOG");
    if (env == nullptr) return LogLevel::Info;
    if (std::strcmp(env, "quiet") == 0) return LogLevel::Quiet;
    if (std::strcmp(env, "warn") == 0) return LogLevel::Warn;
    if (std::strcmp(env, "debug") == 0) return LogLevel::Debug;
    return LogLevel::Info;
  }();
  return level;
}

namespace {

void emit(LogLevel level, const char* tag, const std::string& message) {
  if (static_cast<int>(log_threshold()) < static_cast<int>(level)) return;
  std::fprintf(stderr, "[%s] %s\n", tag, message.c_str());
}

}  // namespace

void log_warn(const std::string& message) { emit(LogLevel::Warn, "warn", message); }
void log_info(const std::string& message) { emit(LogLevel::Info, "info", message); }
void log_debug(const std::string& message) { emit(LogLevel::Debug, "debug", message); }

}  // namespace fairfed
