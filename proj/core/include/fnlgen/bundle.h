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

// Persisted model: network weights, forced distribution, calibrated
// threshold and the training recipe, as a versioned JSON document.

#ifndef FNLGEN_BUNDLE_H_
#define FNLGEN_BUNDLE_H_

#include <cstdint>
#include <filesystem>
#include <string>

#include "fnlgen/fnl.h"
#include "fnlgen/forced_dist.h"
#include "fnlgen/net.h"

namespace fnlgen {

inline constexpr int kBundleFormatVersion = 1;

struct TrainingMeta {
  std::uint64_t seed = 0;
  std::uint64_t data_fingerprint = 0;
  std::uint64_t steps = 0;
  // Trained without the FNL term (w_fnl == 0).
  bool baseline = false;
  double achieved_sensitivity = 0.0;

  friend bool operator==(const TrainingMeta&, const TrainingMeta&) = default;
};

struct ModelBundle {
  Network network;
  ForcedDist forced;
  double psi = 0.5;
  LossWeights loss_weights;
  OptimConfig optim;
  FnlConfig fnl;
  GenCheckConfig gencheck;
  TrainingMeta meta;
};

// Compares everything that is persisted.
bool bundles_equal(const ModelBundle& a, const ModelBundle& b);

std::string bundle_to_text(const ModelBundle& bundle);
// Throws VersionError, FormatError or ShapeError.
ModelBundle bundle_from_text(const std::string& text);

void save_bundle(const ModelBundle& bundle, const std::filesystem::path& path);
ModelBundle load_bundle(const std::filesystem::path& path);

}  // namespace fnlgen

#endif  // FNLGEN_BUNDLE_H_
