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

#ifndef FNLGEN_FORCED_DIST_H_
#define FNLGEN_FORCED_DIST_H_

#include <cstddef>
#include <span>
#include <string>

#include "fnlgen/numstat.h"

namespace fnlgen {

inline constexpr double kDefaultRidge = 1e-8;

// Settings of the inference-time generalizability check.
struct GenCheckConfig {
  double quantile = 0.95;  // chi-square quantile compared to median(D)
  double ridge = kDefaultRidge;

  void validate() const;
  friend bool operator==(const GenCheckConfig&, const GenCheckConfig&) = default;
};

// Gaussian N(mu_f, Sigma_f) fitted to the final latent positions of every
// training positive. Immutable after construction.
class ForcedDist {
 public:
  ForcedDist() = default;

  // Population mean/covariance of the rows of `latents`. Needs >= 2 rows;
  // fewer than dim + 1 rows, or a degenerate covariance, is accepted thanks
  // to the ridge but recorded in warning().
  static ForcedDist Fit(const Matrix& latents, double ridge = kDefaultRidge);

  // Rebuilds from stored moments (used when loading a bundle).
  static ForcedDist FromMoments(Vec mu, SymMatrix sigma, double ridge,
                                std::size_t n_fit);

  std::size_t dim() const { return mu_.size(); }
  const Vec& mu() const { return mu_; }
  const SymMatrix& sigma() const { return sigma_; }
  SymMatrix regularized_sigma() const { return sigma_.plus_identity(ridge_); }
  const SymMatrix& sigma_inv() const { return sigma_inv_; }
  double ridge() const { return ridge_; }
  std::size_t n_fit() const { return n_fit_; }
  const std::string& warning() const { return warning_; }

  double mahalanobis_sq(std::span<const double> z) const;

 private:
  Vec mu_;
  SymMatrix sigma_;
  SymMatrix sigma_inv_;
  double ridge_ = kDefaultRidge;
  std::size_t n_fit_ = 0;
  std::string warning_;
};

}  // namespace fnlgen

#endif  // FNLGEN_FORCED_DIST_H_
