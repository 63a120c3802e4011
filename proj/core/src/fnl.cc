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

#include "fnlgen/fnl.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "fnlgen/errors.h"

namespace fnlgen {
namespace {

constexpr double kMaxEps = 1e-2;

// The kernels accept eps = 0 (handy for closed-form checks); configuration
// files must use a strictly positive value.
void check_eps(double eps) {
  if (!(eps >= 0.0 && eps <= kMaxEps)) {
    throw DomainError("fnl: eps must lie in [0, 1e-2], got " +
                      std::to_string(eps));
  }
}

}  // namespace

LatentBatch::LatentBatch(Matrix latents) : latents_(std::move(latents)) {
  if (latents_.rows() == 0 || latents_.cols() == 0) {
    throw DimensionError("latent batch must have n >= 1 and l >= 1");
  }
  for (double v : latents_.data()) {
    if (!std::isfinite(v)) throw NumericalError("latent batch has non-finite entry");
  }
}

void FnlConfig::validate() const {
  if (!(eps > 0.0 && eps <= kMaxEps)) {
    throw ConfigError("fnl.eps must lie in (0, 1e-2]");
  }
}

double fnl_forward(const LatentBatch& batch, const FnlConfig& cfg) {
  check_eps(cfg.eps);
  const MeanCov mc = batch_mean_cov(batch.latents());
  double mean_sq = 0.0;
  for (double m : mc.mean) mean_sq += m * m;
  const SymMatrix root = spd_sqrt(mc.cov, cfg.eps);
  const double l = static_cast<double>(batch.dim());
  return mean_sq + mc.cov.trace() + l - 2.0 * root.trace();
}

Matrix fnl_backward(const LatentBatch& batch, const FnlConfig& cfg) {
  check_eps(cfg.eps);
  const std::size_t n = batch.size();
  const std::size_t l = batch.dim();
  const MeanCov mc = batch_mean_cov(batch.latents());

  // d/dSigma [tr(Sigma) - 2 tr((Sigma + eps I)^{1/2})] = I - (Sigma + eps I)^{-1/2}
  SymEigen e = sym_eig(mc.cov);
  const double floor = 1e-14 * std::max(1.0, std::abs(e.values.front()));
  for (double& lambda : e.values) {
    const double shifted = lambda + cfg.eps;
    if (!(shifted > floor)) {
      throw SingularMatrixError(
          "fnl_backward: Sigma_b + eps I is singular; increase eps");
    }
    lambda = 1.0 - 1.0 / std::sqrt(shifted);
  }
  const SymMatrix g = from_eigen(e.vectors, e.values);

  // The mean-path contribution of the covariance term vanishes because the
  // centered rows sum to zero, leaving
  //   grad_i = (2/n) mu + (2/n) G (z_i - mu).
  const double inv_n2 = 2.0 / static_cast<double>(n);
  Matrix grad(n, l);
  Vec centered(l);
  for (std::size_t i = 0; i < n; ++i) {
    const auto z = batch.latents().row(i);
    for (std::size_t j = 0; j < l; ++j) centered[j] = z[j] - mc.mean[j];
    for (std::size_t r = 0; r < l; ++r) {
      double gz = 0.0;
      for (std::size_t c = 0; c < l; ++c) gz += g(r, c) * centered[c];
      grad(i, r) = inv_n2 * (mc.mean[r] + gz);
    }
  }
  return grad;
}

}  // namespace fnlgen
