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

#include "fnlgen/sampler.h"

#include <random>
#include <string>

#include "fnlgen/errors.h"

namespace fnlgen {

void AugmentSpec::validate() const {
  if (!(jitter_sigma >= 0.0)) throw ConfigError("jitter_sigma must be >= 0");
  if (!(scale_lo > 0.0 && scale_lo <= 1.0 && scale_hi >= 1.0)) {
    throw ConfigError("scale range must satisfy 0 < lo <= 1 <= hi");
  }
}

Augmenter make_feature_augmenter(const AugmentSpec& spec) {
  spec.validate();
  if (spec.is_identity()) return [](std::vector<double>&, Rng&) {};
  return [spec](std::vector<double>& x, Rng& rng) {
    if (spec.scale_lo != spec.scale_hi) {
      std::uniform_real_distribution<double> scale(spec.scale_lo, spec.scale_hi);
      const double s = scale(rng);
      for (double& v : x) v *= s;
    } else if (spec.scale_lo != 1.0) {
      for (double& v : x) v *= spec.scale_lo;
    }
    if (spec.jitter_sigma > 0.0) {
      std::normal_distribution<double> jitter(0.0, spec.jitter_sigma);
      for (double& v : x) v += jitter(rng);
    }
  };
}

void PairedBatchSpec::validate() const {
  if (batch_size < 2 || batch_size % 2 != 0) {
    throw ConfigError("batch_size must be even and >= 2, got " +
                      std::to_string(batch_size));
  }
  augment.validate();
}

PairedSampler::PairedSampler(std::span<const LabeledSample> pool,
                             PairedBatchSpec spec)
    : PairedSampler(pool, spec, make_feature_augmenter(spec.augment)) {}

PairedSampler::PairedSampler(std::span<const LabeledSample> pool,
                             PairedBatchSpec spec, Augmenter augmenter)
    : pool_(pool), spec_(spec), augmenter_(std::move(augmenter)) {
  spec_.validate();
  for (std::size_t i = 0; i < pool_.size(); ++i) {
    (pool_[i].label == 1 ? positives_ : negatives_).push_back(i);
  }
  if (positives_.empty() || negatives_.empty()) {
    throw ConfigError("paired sampling needs at least one positive and one negative (pool has " +
                      std::to_string(positives_.size()) + " positives, " +
                      std::to_string(negatives_.size()) + " negatives)");
  }
}

std::vector<LabeledSample> PairedSampler::draw(Rng& rng) const {
  const std::size_t half = spec_.batch_size / 2;
  std::uniform_int_distribution<std::size_t> pick_pos(0, positives_.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_neg(0, negatives_.size() - 1);
  std::vector<LabeledSample> batch;
  batch.reserve(spec_.batch_size);
  for (std::size_t i = 0; i < half; ++i) {
    batch.push_back(pool_[positives_[pick_pos(rng)]]);
    augmenter_(batch.back().features, rng);
  }
  for (std::size_t i = 0; i < half; ++i) {
    batch.push_back(pool_[negatives_[pick_neg(rng)]]);
    augmenter_(batch.back().features, rng);
  }
  return batch;
}

std::vector<LabeledSample> draw_paired_batch(std::span<const LabeledSample> pool,
                                             const PairedBatchSpec& spec,
                                             Rng& rng) {
  return PairedSampler(pool, spec).draw(rng);
}

}  // namespace fnlgen
