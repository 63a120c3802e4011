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

// End-to-end training: paired batches, combined BCE + FNL loss, Adam, then
// fitting the forced distribution on every training positive and
// calibrating psi for the target sensitivity.

#ifndef FNLGEN_TRAINER_H_
#define FNLGEN_TRAINER_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fnlgen/bundle.h"
#include "fnlgen/evalkit.h"
#include "fnlgen/sampler.h"
#include "fnlgen/synth.h"

namespace fnlgen {

struct TrainConfig {
  NetConfig net;  // input_dim == 0 means "take it from the data"; seed is derived
  LossWeights weights;
  OptimConfig optim;
  FnlConfig fnl;
  PairedBatchSpec batch;
  GenCheckConfig gencheck;
  std::size_t max_steps = 4000;
  // Stop once the smoothed combined loss has not improved by more than
  // plateau_tol for plateau_window steps. A window of 0 disables the check.
  std::size_t plateau_window = 200;
  double plateau_tol = 1e-5;
  double target_sensitivity = 0.90;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainLogRow {
  std::uint64_t step = 0;
  double bce = 0.0;
  double fnl = 0.0;
  double combined = 0.0;
};

struct TrainResult {
  ModelBundle bundle;
  std::vector<TrainLogRow> log;
  ThresholdCalibration calibration;
};

TrainResult train_model(const TrainConfig& config, std::span<const Exam> training_exams);

// Latents of every positive candidate, one per row.
Matrix positive_latents(const Network& net, std::span<const Exam> exams);

// Fits the forced distribution and psi for an already-trained network.
ModelBundle finalize_bundle(Network net, std::span<const Exam> training_exams,
                            const TrainConfig& config, std::uint64_t steps,
                            ThresholdCalibration* calibration = nullptr);

std::string train_log_to_csv(std::span<const TrainLogRow> log);

}  // namespace fnlgen

#endif  // FNLGEN_TRAINER_H_
