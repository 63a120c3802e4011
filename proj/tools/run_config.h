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

#ifndef FNLGEN_TOOLS_RUN_CONFIG_H_
#define FNLGEN_TOOLS_RUN_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fnlgen/synth.h"
#include "fnlgen/trainer.h"

namespace fnlgen::cli {

struct GenerateConfig {
  CohortSpec train;
  CohortSpec test_internal;
  CohortSpec test_shifted;
};

struct RunConfig {
  std::uint64_t seed = 0;
  GenerateConfig generate;
  TrainConfig train;
  // Low-flag rate above which `score` prints an alarm.
  double alarm_low_rate = 0.15;
  // FNL value above which `diagnose` exits with the alarm status.
  double fnl_alarm = 1.0;
  // The merged document every typed field above was read from.
  std::string effective_text;
};

struct ConfigSources {
  std::optional<std::filesystem::path> file;
  // "section.key=value"; the value is read as JSON, falling back to a string.
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
};

// The shipped defaults (identical to configs/default.json).
const std::string& default_config_text();

// Merges defaults <- file <- --set <- --seed, rejects unknown keys and
// validates every section. Throws ConfigError, or IoError for an unreadable
// file.
RunConfig load_run_config(const ConfigSources& sources);

}  // namespace fnlgen::cli

#endif  // FNLGEN_TOOLS_RUN_CONFIG_H_
