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

// Class-balanced batch construction. Every batch holds exactly half positives
// and half negatives, drawn uniformly with replacement from each class pool
// and augmented independently.

#ifndef FNLGEN_SAMPLER_H_
#define FNLGEN_SAMPLER_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "fnlgen/rng.h"
#include "fnlgen/types.h"

namespace fnlgen {

struct AugmentSpec {
  double jitter_sigma = 0.0;  // additive N(0, sigma^2) per feature
  double scale_lo = 1.0;      // multiplicative factor ~ U[lo, hi]
  double scale_hi = 1.0;

  void validate() const;
  bool is_identity() const {
    return jitter_sigma == 0.0 && scale_lo == 1.0 && scale_hi == 1.0;
  }
};

// Mutates a feature vector in place. Labels are never touched.
using Augmenter = std::function<void(std::vector<double>&, Rng&)>;

Augmenter make_feature_augmenter(const AugmentSpec& spec);

struct PairedBatchSpec {
  std::size_t batch_size = 128;
  AugmentSpec augment;

  void validate() const;
};

class PairedSampler {
 public:
  // Throws ConfigError if the pool lacks either class.
  PairedSampler(std::span<const LabeledSample> pool, PairedBatchSpec spec);
  PairedSampler(std::span<const LabeledSample> pool, PairedBatchSpec spec,
                Augmenter augmenter);

  // Positives first, then negatives.
  std::vector<LabeledSample> draw(Rng& rng) const;

  std::size_t positive_pool_size() const { return positives_.size(); }
  std::size_t negative_pool_size() const { return negatives_.size(); }

 private:
  std::span<const LabeledSample> pool_;
  PairedBatchSpec spec_;
  Augmenter augmenter_;
  std::vector<std::size_t> positives_;
  std::vector<std::size_t> negatives_;
};

std::vector<LabeledSample> draw_paired_batch(std::span<const LabeledSample> pool,
                                             const PairedBatchSpec& spec,
                                             Rng& rng);

}  // namespace fnlgen

#endif  // FNLGEN_SAMPLER_H_
