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

#include "fnlgen/numstat.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <boost/math/distributions/chi_squared.hpp>

#include "fnlgen/errors.h"

namespace fnlgen {
namespace {

constexpr int kMaxJacobiSweeps = 100;

// Eigenvalues of S + eps*I closer to zero than this (scaled by ||S||) are
// treated as round-off and clamped.
constexpr double kClampTolerance = 1e-10;

double off_diagonal_sq(const Matrix& a) {
  double off = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = i + 1; j < a.cols(); ++j) off += a(i, j) * a(i, j);
  }
  return off;
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw DimensionError("matrix data has " + std::to_string(data_.size()) +
                         " entries, expected " + std::to_string(rows * cols));
  }
}

Matrix Matrix::Identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  }
  return t;
}

double Matrix::frobenius_norm() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matrix product shape mismatch");
  }
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

Vec operator*(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) {
    throw DimensionError("matrix-vector product shape mismatch");
  }
  Vec y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

SymMatrix::SymMatrix(const Matrix& m) : m_(m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw DimensionError("symmetric matrix must be square with dim >= 1");
  }
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = i + 1; j < m.cols(); ++j) {
      const double v = 0.5 * (m(i, j) + m(j, i));
      m_(i, j) = v;
      m_(j, i) = v;
    }
  }
}

SymMatrix SymMatrix::Identity(std::size_t n) {
  return SymMatrix(Matrix::Identity(n));
}

SymMatrix SymMatrix::Zero(std::size_t n) { return SymMatrix(Matrix(n, n)); }

SymMatrix SymMatrix::Diagonal(std::span<const double> diag) {
  Matrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return SymMatrix(m);
}

double SymMatrix::trace() const {
  double t = 0.0;
  for (std::size_t i = 0; i < dim(); ++i) t += m_(i, i);
  return t;
}

SymMatrix SymMatrix::plus_identity(double alpha) const {
  Matrix m = m_;
  for (std::size_t i = 0; i < dim(); ++i) m(i, i) += alpha;
  return SymMatrix(m);
}

SymEigen sym_eig(const SymMatrix& s) {
  const std::size_t n = s.dim();
  Matrix a = s.matrix();
  Matrix v = Matrix::Identity(n);
  const double scale = a.frobenius_norm();

  bool converged = false;
  for (int sweep = 0; sweep < kMaxJacobiSweeps; ++sweep) {
    const double off = off_diagonal_sq(a);
    if (off == 0.0 || std::sqrt(off) <= 1e-15 * scale) {
      converged = true;
      break;
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - sn * vkq;
          v(k, q) = sn * vkp + c * vkq;
        }
      }
    }
  }
  if (!converged) {
    throw NumericalError("Jacobi eigendecomposition did not converge in " +
                         std::to_string(kMaxJacobiSweeps) + " sweeps");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return a(i, i) > a(j, j);
  });

  SymEigen out{Vec(n), Matrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, k) = v(r, order[k]);
  }
  return out;
}

SymMatrix from_eigen(const Matrix& vectors, std::span<const double> values) {
  const std::size_t n = vectors.rows();
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        s += vectors(i, k) * values[k] * vectors(j, k);
      }
      m(i, j) = s;
      m(j, i) = s;
    }
  }
  return SymMatrix(m);
}

SymMatrix spd_sqrt(const SymMatrix& s, double eps) {
  if (!(eps >= 0.0)) throw DomainError("spd_sqrt: eps must be >= 0");
  SymEigen e = sym_eig(s);
  const double tol = kClampTolerance * std::max(1.0, s.frobenius_norm());
  for (double& lambda : e.values) {
    double shifted = lambda + eps;
    if (shifted < -tol) {
      throw DomainError("spd_sqrt: matrix has eigenvalue " +
                        std::to_string(lambda) + " below -eps");
    }
    lambda = std::sqrt(std::max(shifted, 0.0));
  }
  return from_eigen(e.vectors, e.values);
}

SymMatrix spd_inverse(const SymMatrix& s, double ridge) {
  if (!(ridge >= 0.0)) throw DomainError("spd_inverse: ridge must be >= 0");
  SymEigen e = sym_eig(s);
  const double largest = e.values.front() + ridge;
  const double smallest = e.values.back() + ridge;
  if (!(smallest > 0.0) || smallest <= 1e-15 * std::abs(largest)) {
    throw SingularMatrixError("spd_inverse: smallest eigenvalue " +
                              std::to_string(smallest) +
                              " of the regularized matrix is not positive");
  }
  for (double& lambda : e.values) lambda = 1.0 / (lambda + ridge);
  return from_eigen(e.vectors, e.values);
}

MeanCov batch_mean_cov(const Matrix& batch) {
  const std::size_t n = batch.rows();
  const std::size_t l = batch.cols();
  if (n == 0 || l == 0) throw DimensionError("batch_mean_cov: empty batch");

  Vec mean(l, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < l; ++j) mean[j] += batch(i, j);
  }
  for (double& m : mean) m /= static_cast<double>(n);

  Matrix cov(l, l);
  Vec centered(l);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < l; ++j) centered[j] = batch(i, j) - mean[j];
    for (std::size_t r = 0; r < l; ++r) {
      for (std::size_t c = r; c < l; ++c) cov(r, c) += centered[r] * centered[c];
    }
  }
  for (std::size_t r = 0; r < l; ++r) {
    for (std::size_t c = r; c < l; ++c) {
      cov(r, c) /= static_cast<double>(n);
      cov(c, r) = cov(r, c);
    }
  }
  return {std::move(mean), SymMatrix(cov)};
}

double mahalanobis_sq(std::span<const double> z, std::span<const double> mu,
                      const SymMatrix& sigma_inv) {
  const std::size_t l = z.size();
  if (mu.size() != l || sigma_inv.dim() != l) {
    throw DimensionError("mahalanobis_sq: dimension mismatch");
  }
  Vec d(l);
  for (std::size_t i = 0; i < l; ++i) d[i] = z[i] - mu[i];
  double s = 0.0;
  for (std::size_t i = 0; i < l; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < l; ++j) row += sigma_inv(i, j) * d[j];
    s += d[i] * row;
  }
  return std::max(s, 0.0);
}

double chi2_quantile(int df, double p) {
  if (df < 1) throw DomainError("chi2_quantile: df must be >= 1");
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("chi2_quantile: p must lie in (0, 1)");
  }
  const boost::math::chi_squared_distribution<double> dist(df);
  return boost::math::quantile(dist, p);
}

double median(std::span<const double> values) {
  if (values.empty()) throw DomainError("median of an empty sequence");
  std::vector<double> v(values.begin(), values.end());
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + mid);
  return 0.5 * (lower + upper);
}

}  // namespace fnlgen
