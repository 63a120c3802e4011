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

#include "fnlgen/forced_dist.h"

#include <algorithm>
#include <string>

#include "fnlgen/errors.h"

namespace fnlgen {

void GenCheckConfig::validate() const {
  if (!(quantile > 0.0 && quantile < 1.0)) {
    throw ConfigError("gencheck.quantile must lie in (0, 1)");
  }
  if (!(ridge >= 0.0)) throw ConfigError("gencheck.ridge must be >= 0");
}

ForcedDist ForcedDist::Fit(const Matrix& latents, double ridge) {
  if (latents.rows() < 2) {
    throw DomainError("fit_forced_dist needs at least 2 latents, got " +
                      std::to_string(latents.rows()));
  }
  MeanCov mc = batch_mean_cov(latents);
  ForcedDist fd = FromMoments(std::move(mc.mean), std::move(mc.cov), ridge,
                              latents.rows());
  if (latents.rows() < fd.dim() + 1) {
    fd.warning_ = "fitted from " + std::to_string(latents.rows()) +
                  " latents, fewer than dim + 1; covariance is rank-deficient";
  } else if (sym_eig(fd.sigma_).values.back() <=
             1e-12 * std::max(1.0, fd.sigma_.frobenius_norm())) {
    fd.warning_ = "fitted covariance is numerically singular; relying on ridge";
  }
  return fd;
}

ForcedDist ForcedDist::FromMoments(Vec mu, SymMatrix sigma, double ridge,
                                   std::size_t n_fit) {
  if (mu.empty() || sigma.dim() != mu.size()) {
    throw DimensionError("forced distribution: mean/covariance dimension mismatch");
  }
  ForcedDist fd;
  fd.mu_ = std::move(mu);
  fd.sigma_ = std::move(sigma);
  fd.ridge_ = ridge;
  fd.n_fit_ = n_fit;
  fd.sigma_inv_ = spd_inverse(fd.sigma_, ridge);
  return fd;
}

double ForcedDist::mahalanobis_sq(std::span<const double> z) const {
  return fnlgen::mahalanobis_sq(z, mu_, sigma_inv_);
}

}  // namespace fnlgen
