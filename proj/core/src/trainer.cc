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

#include "fnlgen/trainer.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "fnlgen/errors.h"
#include "fnlgen/gencheck.h"

namespace fnlgen {
namespace {

constexpr double kLossSmoothing = 0.05;

}  // namespace

void TrainConfig::validate() const {
  weights.validate();
  optim.validate();
  fnl.validate();
  batch.validate();
  gencheck.validate();
  if (max_steps == 0) throw ConfigError("train.max_steps must be >= 1");
  if (!(plateau_tol >= 0.0)) throw ConfigError("train.plateau_tol must be >= 0");
  if (!(target_sensitivity > 0.0 && target_sensitivity <= 1.0)) {
    throw ConfigError("target_sensitivity must lie in (0, 1]");
  }
}

Matrix positive_latents(const Network& net, std::span<const Exam> exams) {
  const std::size_t l = net.config().latent_dim;
  std::vector<double> flat;
  std::size_t n = 0;
  for (const Exam& e : exams) {
    for (const Candidate& c : e.candidates) {
      if (c.label != 1) continue;
      const ForwardTrace tr = net.forward(c.features);
      flat.insert(flat.end(), tr.latent.begin(), tr.latent.end());
      ++n;
    }
  }
  return Matrix(n, l, std::move(flat));
}

ModelBundle finalize_bundle(Network net, std::span<const Exam> training_exams,
                            const TrainConfig& config, std::uint64_t steps,
                            ThresholdCalibration* calibration) {
  ModelBundle b;
  b.forced = fit_forced_dist(positive_latents(net, training_exams), config.gencheck.ridge);
  const ThresholdCalibration cal =
      calibrate_threshold(net, training_exams, config.target_sensitivity);
  if (calibration) *calibration = cal;
  b.network = std::move(net);
  b.psi = cal.psi;
  b.loss_weights = config.weights;
  b.optim = config.optim;
  b.fnl = config.fnl;
  b.gencheck = config.gencheck;
  b.meta.seed = config.seed;
  b.meta.data_fingerprint = fingerprint(training_exams);
  b.meta.steps = steps;
  b.meta.baseline = config.weights.w_fnl == 0.0;
  b.meta.achieved_sensitivity = cal.achieved_sensitivity;
  return b;
}

TrainResult train_model(const TrainConfig& config, std::span<const Exam> training_exams) {
  config.validate();
  if (training_exams.empty()) throw ConfigError("training cohort has no exams");
  const std::vector<LabeledSample> pool = pool_samples(training_exams);

  NetConfig nc = config.net;
  const std::size_t data_dim = pool.front().features.size();
  if (nc.input_dim == 0) nc.input_dim = data_dim;
  if (nc.input_dim != data_dim) {
    throw DimensionError("net.input_dim does not match the training features");
  }
  nc.seed = derive_seed(config.seed, "init");
  Network net(nc);

  const PairedSampler sampler(pool, config.batch);
  Rng rng(derive_seed(config.seed, "sampler"));
  AdamState adam = AdamState::ZerosLike(net.params());

  TrainResult result;
  result.log.reserve(config.max_steps);
  double smoothed = std::numeric_limits<double>::quiet_NaN();
  double best = std::numeric_limits<double>::infinity();
  std::uint64_t last_improvement = 0;
  std::uint64_t step = 0;
  while (step < config.max_steps) {
    ++step;
    const std::vector<LabeledSample> batch = sampler.draw(rng);
    LossAndGrads lg;
    try {
      lg = combined_loss_and_grads(net, batch, config.weights, config.fnl);
    } catch (const NumericalError& e) {
      throw NumericalError("training step " + std::to_string(step) + ": " + e.what());
    }
    if (!std::isfinite(lg.loss.total)) {
      throw NumericalError("training step " + std::to_string(step) +
                           ": loss became non-finite");
    }
    adam_step(net.params(), lg.grads, adam, config.optim, step);
    result.log.push_back({step, lg.loss.bce, lg.loss.fnl, lg.loss.total});

    smoothed = std::isnan(smoothed)
                   ? lg.loss.total
                   : (1.0 - kLossSmoothing) * smoothed + kLossSmoothing * lg.loss.total;
    if (smoothed < best - config.plateau_tol) {
      best = smoothed;
      last_improvement = step;
    }
    if (config.plateau_window > 0 && step - last_improvement >= config.plateau_window) {
      break;
    }
  }

  result.bundle = finalize_bundle(std::move(net), training_exams, config, step,
                                  &result.calibration);
  return result;
}

std::string train_log_to_csv(std::span<const TrainLogRow> log) {
  std::ostringstream os;
  os << "step,bce,fnl,combined\n" << std::setprecision(17);
  for (const TrainLogRow& r : log) {
    os << r.step << ',' << r.bce << ',' << r.fnl << ',' << r.combined << '\n';
  }
  return os.str();
}

}  // namespace fnlgen
