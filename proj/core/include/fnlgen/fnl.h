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

// Frechet Normal Loss: squared Frechet (2-Wasserstein) distance between the
// Gaussian fitted to a batch of latent vectors and the standard normal
// N(0, I), together with its exact gradient with respect to every latent.
//
//   d^2 = |mu_b|^2 + tr(Sigma_b + I - 2 (Sigma_b + eps I)^{1/2})
//
// mu_b and Sigma_b are the population mean and covariance of the batch.

#ifndef FNLGEN_FNL_H_
#define FNLGEN_FNL_H_

#include <cstddef>

#include "fnlgen/numstat.h"

namespace fnlgen {

// n x l batch of finite latent vectors, one per row.
class LatentBatch {
 public:
  explicit LatentBatch(Matrix latents);

  std::size_t size() const { return latents_.rows(); }
  std::size_t dim() const { return latents_.cols(); }
  const Matrix& latents() const { return latents_; }

 private:
  Matrix latents_;
};

struct FnlConfig {
  // Regularizes only the matrix square root.
  double eps = 1e-6;

  // Configuration-level check: eps in (0, 1e-2].
  void validate() const;
  friend bool operator==(const FnlConfig&, const FnlConfig&) = default;
};

double fnl_forward(const LatentBatch& batch, const FnlConfig& cfg);

// Returns the n x l matrix of partial derivatives of d^2 with respect to each
// latent entry, with mu_b and Sigma_b differentiated as functions of the batch.
Matrix fnl_backward(const LatentBatch& batch, const FnlConfig& cfg);

}  // namespace fnlgen

#endif  // FNLGEN_FNL_H_
