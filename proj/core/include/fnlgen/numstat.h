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

// Dense linear-algebra and statistics kernels sized for latent spaces of a
// handful of dimensions: symmetric eigendecomposition by cyclic Jacobi
// rotations, SPD matrix functions, sample moments, Mahalanobis distance and
// the chi-square quantile.

#ifndef FNLGEN_NUMSTAT_H_
#define FNLGEN_NUMSTAT_H_

#include <cstddef>
#include <span>
#include <vector>

namespace fnlgen {

using Vec = std::vector<double>;

// Row-major dense matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix Identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  Matrix transpose() const;
  double frobenius_norm() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Vec operator*(const Matrix& a, std::span<const double> x);

// Symmetric square matrix. Construction symmetrizes the input as (A + A^T)/2
// so entries(i, j) == entries(j, i) holds exactly.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(const Matrix& m);

  static SymMatrix Identity(std::size_t n);
  static SymMatrix Zero(std::size_t n);
  static SymMatrix Diagonal(std::span<const double> diag);

  std::size_t dim() const { return m_.rows(); }
  double operator()(std::size_t r, std::size_t c) const { return m_(r, c); }
  const Matrix& matrix() const { return m_; }

  double trace() const;
  double frobenius_norm() const { return m_.frobenius_norm(); }

  // Returns this + alpha * I.
  SymMatrix plus_identity(double alpha) const;

  friend bool operator==(const SymMatrix&, const SymMatrix&) = default;

 private:
  Matrix m_;
};

struct SymEigen {
  Vec values;      // descending
  Matrix vectors;  // column k pairs with values[k]
};

// Cyclic Jacobi eigendecomposition. Throws NumericalError if the sweep cap
// is hit before the off-diagonal mass vanishes.
SymEigen sym_eig(const SymMatrix& s);

// Rebuilds V * diag(f(lambda)) * V^T.
SymMatrix from_eigen(const Matrix& vectors, std::span<const double> values);

// Principal square root of S + eps * I. Eigenvalues of S + eps * I within
// round-off of zero are clamped to zero; anything more negative raises
// DomainError.
SymMatrix spd_sqrt(const SymMatrix& s, double eps);

// (S + ridge * I)^{-1}. Throws SingularMatrixError when the regularized
// matrix is not numerically positive definite.
SymMatrix spd_inverse(const SymMatrix& s, double ridge);

struct MeanCov {
  Vec mean;
  SymMatrix cov;
};

// Population (1/N) mean and covariance of the rows of `batch`.
MeanCov batch_mean_cov(const Matrix& batch);

// (z - mu)^T * sigma_inv * (z - mu).
double mahalanobis_sq(std::span<const double> z, std::span<const double> mu,
                      const SymMatrix& sigma_inv);

// Inverse CDF of the chi-square distribution with `df` degrees of freedom.
double chi2_quantile(int df, double p);

double median(std::span<const double> values);

}  // namespace fnlgen

#endif  // FNLGEN_NUMSTAT_H_
