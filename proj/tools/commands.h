// Copyright 2026 The fnlgen Authors.
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

#ifndef FNLGEN_TOOLS_COMMANDS_H_
#define FNLGEN_TOOLS_COMMANDS_H_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "run_config.h"

namespace fnlgen::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitValidation = 2,
  kExitIo = 3,
  kExitNumerical = 4,
  kExitAlarm = 5,
};

enum class LogLevel { kQuiet, kError, kWarn, kInfo, kDebug };

// Reads FNLGEN_LOG (quiet, error, warn, info, debug); unset means warn.
LogLevel log_level_from_env();

struct CommandContext {
  RunConfig config;
  std::filesystem::path out_dir = ".";
  std::size_t workers = 1;
  std::ostream* out = nullptr;  // summaries
  std::ostream* err = nullptr;  // log lines
  LogLevel log_level = LogLevel::kWarn;

  void log(LogLevel level, std::string_view message) const;
};

int cmd_generate(const CommandContext& ctx);
int cmd_train(const CommandContext& ctx, const std::filesystem::path& cohort);
int cmd_score(const CommandContext& ctx, const std::filesystem::path& bundle,
              const std::filesystem::path& cohort);
int cmd_evaluate(const CommandContext& ctx, const std::filesystem::path& bundle,
                 const std::vector<std::filesystem::path>& cohorts,
                 const std::vector<std::filesystem::path>& reports);
int cmd_diagnose(const CommandContext& ctx, const std::filesystem::path& bundle,
                 const std::filesystem::path& positives);

// Parses `args` (without the program name), runs the chosen subcommand and
// maps library errors to exit codes.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fnlgen::cli

#endif  // FNLGEN_TOOLS_COMMANDS_H_
