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

#include "fnlgen/gencheck.h"

#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fnlgen/errors.h"
#include "oracles.h"

namespace fnlgen {
namespace {

constexpr std::size_t kL = 4;

// A network whose latent equals its 4D input (relu(x) - relu(-x)) and whose
// head is sigmoid(w . z + b).
Network pass_through_net(const Vec& head_w, double head_b) {
  NetConfig c;
  c.input_dim = kL;
  c.hidden_dims = {2 * kL};
  c.latent_dim = kL;
  c.activation = Activation::kRelu;
  NetParams p;
  Matrix w1(2 * kL, kL), w2(kL, 2 * kL);
  for (std::size_t i = 0; i < kL; ++i) {
    w1(i, i) = 1.0;
    w1(kL + i, i) = -1.0;
    w2(i, i) = 1.0;
    w2(i, kL + i) = -1.0;
  }
  p.layers.push_back({w1, Vec(2 * kL, 0.0)});
  p.layers.push_back({w2, Vec(kL, 0.0)});
  p.layers.push_back({Matrix(1, kL, head_w), Vec{head_b}});
  return Network(c, p);
}

ModelBundle make_bundle(const Vec& mu, const SymMatrix& sigma) {
  ModelBundle b;
  b.network = pass_through_net({1.0, 0.0, 0.0, 0.0}, 0.0);
  b.forced = ForcedDist::FromMoments(mu, sigma, 0.0, 100);
  b.psi = 0.5;
  return b;
}

Exam exam_from_points(const std::vector<Vec>& pts) {
  Exam e;
  e.exam_id = "t-000";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    e.candidates.push_back({static_cast<std::uint32_t>(i), pts[i], 0});
  }
  return e;
}

Matrix gaussian_rows(std::size_t n, const Vec& mu, const SymMatrix& cov, std::mt19937_64& rng) {
  const Matrix chol = testing::cholesky(cov);
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix out(n, mu.size());
  std::vector<double> e(mu.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (double& v : e) v = g(rng);
    const Vec x = chol * std::span<const double>(e);
    for (std::size_t j = 0; j < mu.size(); ++j) out(i, j) = mu[j] + x[j];
  }
  return out;
}

TEST(ForcedDistTest, FitsStandardNormalSample) {
  std::mt19937_64 rng(1);
  const Matrix z = gaussian_rows(50000, Vec(kL, 0.0), SymMatrix::Identity(kL), rng);
  const ForcedDist f = fit_forced_dist(z);
  double mu_norm = 0.0;
  for (double m : f.mu()) mu_norm += m * m;
  EXPECT_LT(std::sqrt(mu_norm), 0.02);
  double diff = 0.0;
  for (std::size_t r = 0; r < kL; ++r) {
    for (std::size_t c = 0; c < kL; ++c) {
      const double d = f.sigma()(r, c) - (r == c ? 1.0 : 0.0);
      diff += d * d;
    }
  }
  EXPECT_LT(std::sqrt(diff), 0.05);
  EXPECT_EQ(f.n_fit(), 50000u);
  EXPECT_TRUE(f.warning().empty());
}

TEST(ForcedDistTest, HandListedPoints) {
  // Points (0,0), (2,0), (0,2), (2,2), (1,1): mean (1,1); population
  // variances 4/5 each, covariance 0.
  const Matrix z(5, 2, std::vector<double>{0, 0, 2, 0, 0, 2, 2, 2, 1, 1});
  const ForcedDist f = fit_forced_dist(z, 0.0);
  EXPECT_DOUBLE_EQ(f.mu()[0], 1.0);
  EXPECT_DOUBLE_EQ(f.mu()[1], 1.0);
  EXPECT_NEAR(f.sigma()(0, 0), 0.8, 1e-15);
  EXPECT_NEAR(f.sigma()(1, 1), 0.8, 1e-15);
  EXPECT_NEAR(f.sigma()(0, 1), 0.0, 1e-15);
  EXPECT_NEAR(f.sigma_inv()(0, 0), 1.25, 1e-12);
  EXPECT_NEAR(f.mahalanobis_sq(std::vector<double>{3.0, 1.0}), 5.0, 1e-12);
}

TEST(ForcedDistTest, InverseMatchesRegularizedSigma) {
  std::mt19937_64 rng(2);
  const SymMatrix cov = testing::random_spd(kL, rng);
  const ForcedDist f = fit_forced_dist(gaussian_rows(200, Vec(kL, 1.0), cov, rng));
  const Matrix prod = f.sigma_inv().matrix() * f.regularized_sigma().matrix();
  for (std::size_t r = 0; r < kL; ++r) {
    for (std::size_t c = 0; c < kL; ++c) EXPECT_NEAR(prod(r, c), r == c ? 1.0 : 0.0, 1e-8);
  }
}

TEST(ForcedDistTest, IdenticalLatentsNeedRidge) {
  const Matrix z(10, kL, 0.5);
  const ForcedDist f = fit_forced_dist(z, 1e-8);
  EXPECT_FALSE(f.warning().empty());
  const SymMatrix reg = f.regularized_sigma();
  for (std::size_t r = 0; r < kL; ++r) {
    for (std::size_t c = 0; c < kL; ++c) EXPECT_EQ(reg(r, c), r == c ? 1e-8 : 0.0);
  }
  EXPECT_THROW(fit_forced_dist(z, 0.0), SingularMatrixError);
}

TEST(ForcedDistTest, TooFewLatents) {
  EXPECT_THROW(fit_forced_dist(Matrix(1, kL, 0.0)), DomainError);
  const ForcedDist f = fit_forced_dist(Matrix(3, kL, std::vector<double>{
      1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0}));
  EXPECT_FALSE(f.warning().empty());
}

TEST(ScoreExamTest, LatentsAtMeanAreHigh) {
  const Vec mu{2.0, 0.5, -0.5, 1.0};
  const ModelBundle b = make_bundle(mu, SymMatrix::Diagonal(Vec{1.0, 2.0, 0.5, 1.5}));
  const GenReport r = score_exam(b, exam_from_points({mu, mu, {-3, 0, 0, 0}, mu}));
  EXPECT_EQ(r.n_pseudo_positives, 3u);
  EXPECT_EQ(r.distances, (std::vector<double>{0.0, 0.0, 0.0}));
  EXPECT_EQ(r.median_d, 0.0);
  EXPECT_NEAR(r.threshold, 9.4877290367811, 1e-9);
  EXPECT_EQ(r.status, GenStatus::kHigh);
  EXPECT_EQ(r.warning_text, "model generalizes");
}

TEST(ScoreExamTest, FarAlongPrincipalAxisIsLow) {
  std::mt19937_64 rng(3);
  const Vec mu{50.0, 0.0, 0.0, 0.0};
  SymMatrix sigma = testing::random_spd(kL, rng, 0.05);
  const ModelBundle b = make_bundle(mu, sigma);
  const SymEigen eig = sym_eig(sigma);
  std::vector<Vec> pts;
  for (double sign : {1.0, -1.0, 1.0}) {
    Vec p = mu;
    for (std::size_t j = 0; j < kL; ++j) {
      p[j] += sign * 10.0 * std::sqrt(eig.values[0]) * eig.vectors(j, 0);
    }
    pts.push_back(p);
  }
  ASSERT_LT(10.0 * std::sqrt(eig.values[0]), 50.0);
  const GenReport r = score_exam(b, exam_from_points(pts));
  ASSERT_EQ(r.n_pseudo_positives, 3u);
  for (double d : r.distances) EXPECT_NEAR(d, 100.0, 1e-8);
  EXPECT_EQ(r.status, GenStatus::kLow);
  EXPECT_EQ(r.warning_text, "low model generalizability");
}

TEST(ScoreExamTest, NothingAboveThresholdIsIndeterminate) {
  const ModelBundle b = make_bundle(Vec(kL, 0.0), SymMatrix::Identity(kL));
  // z0 == 0 gives exactly 0.5, which is not strictly above psi.
  const GenReport r = score_exam(b, exam_from_points({{-1, 0, 0, 0}, {0, 3, 3, 3}}));
  EXPECT_EQ(r.n_pseudo_positives, 0u);
  EXPECT_TRUE(r.distances.empty());
  EXPECT_TRUE(std::isnan(r.median_d));
  EXPECT_EQ(r.status, GenStatus::kIndeterminate);
  EXPECT_EQ(r.warning_text, "no findings above threshold");
}

TEST(ScoreExamTest, DimensionMismatch) {
  const ModelBundle b = make_bundle(Vec(kL, 0.0), SymMatrix::Identity(kL));
  EXPECT_THROW(score_exam(b, exam_from_points({{1.0, 2.0}})), DimensionError);
}

TEST(ScoreExamTest, RaisingPsiNeverAddsPseudoPositives) {
  std::mt19937_64 rng(4);
  ModelBundle b = make_bundle(Vec(kL, 0.0), SymMatrix::Identity(kL));
  b.network = pass_through_net({0.7, -0.3, 0.2, 0.5}, 0.1);
  const Matrix pts = gaussian_rows(300, Vec(kL, 0.0), SymMatrix::Identity(kL), rng);
  std::vector<Vec> rows;
  for (std::size_t i = 0; i < pts.rows(); ++i) rows.emplace_back(pts.row(i).begin(), pts.row(i).end());
  const Exam e = exam_from_points(rows);
  std::size_t prev = rows.size() + 1;
  for (double psi = 0.0; psi <= 1.0; psi += 0.05) {
    b.psi = psi;
    const std::size_t n = score_exam(b, e).n_pseudo_positives;
    EXPECT_LE(n, prev);
    prev = n;
  }
}

TEST(ScoreExamTest, ParallelScoringMatchesSequential) {
  std::mt19937_64 rng(5);
  ModelBundle b = make_bundle(Vec(kL, 0.2), testing::random_spd(kL, rng));
  std::vector<Exam> exams;
  for (int k = 0; k < 17; ++k) {
    const Matrix pts = gaussian_rows(20, Vec(kL, 0.5), SymMatrix::Identity(kL), rng);
    std::vector<Vec> rows;
    for (std::size_t i = 0; i < pts.rows(); ++i) rows.emplace_back(pts.row(i).begin(), pts.row(i).end());
    exams.push_back(exam_from_points(rows));
    exams.back().exam_id = "p-" + std::to_string(k);
  }
  const auto seq = score_exams(b, exams, 1);
  const auto par = score_exams(b, exams, 4);
  ASSERT_EQ(seq.size(), par.size());
  for (std::size_t i = 0; i < seq.size(); ++i) {
    EXPECT_EQ(seq[i].exam_id, par[i].exam_id);
    EXPECT_EQ(seq[i].distances, par[i].distances);
    EXPECT_EQ(seq[i].status, par[i].status);
  }
}

TEST(AssessTest, PermutationDoesNotChangeStatus) {
  std::mt19937_64 rng(6);
  const ForcedDist f = ForcedDist::FromMoments(Vec(kL, 0.0), SymMatrix::Identity(kL), 0.0, 10);
  Matrix z = gaussian_rows(15, Vec(kL, 1.2), SymMatrix::Identity(kL), rng);
  const GenReport a = assess_latents(f, z, 0.95);
  std::vector<std::size_t> order(15);
  for (std::size_t i = 0; i < 15; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  Matrix zp(15, kL);
  for (std::size_t i = 0; i < 15; ++i) {
    std::copy(z.row(order[i]).begin(), z.row(order[i]).end(), zp.row(i).begin());
  }
  const GenReport b = assess_latents(f, zp, 0.95);
  EXPECT_EQ(a.median_d, b.median_d);
  EXPECT_EQ(a.status, b.status);
}

TEST(AssessTest, InvariantUnderInvertibleLinearMaps) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec mu{0.3, -1.0, 2.0, 0.0};
    const SymMatrix sigma = testing::random_spd(kL, rng);
    const ForcedDist f = ForcedDist::FromMoments(mu, sigma, 0.0, 50);
    const Matrix z = gaussian_rows(11, Vec{0.5, -0.5, 2.5, 1.0}, sigma, rng);

    const Matrix a = testing::random_matrix(kL, kL, rng);
    // Random matrices are invertible almost surely; nudge the diagonal anyway.
    Matrix m = a;
    for (std::size_t i = 0; i < kL; ++i) m(i, i) += 2.0;
    const Vec mu2 = m * std::span<const double>(mu);
    const SymMatrix sigma2(m * sigma.matrix() * m.transpose());
    const ForcedDist f2 = ForcedDist::FromMoments(mu2, sigma2, 0.0, 50);
    const Matrix z2 = z * m.transpose();

    const GenReport r1 = assess_latents(f, z, 0.95);
    const GenReport r2 = assess_latents(f2, z2, 0.95);
    ASSERT_EQ(r1.distances.size(), r2.distances.size());
    for (std::size_t i = 0; i < r1.distances.size(); ++i) {
      EXPECT_NEAR(r1.distances[i], r2.distances[i], 1e-8 * std::max(1.0, r1.distances[i]));
    }
    EXPECT_NEAR(r1.median_d, r2.median_d, 1e-8 * std::max(1.0, r1.median_d));
    EXPECT_EQ(r1.status, r2.status);
  }
}

TEST(AssessTest, NullExamsRarelyFlagged) {
  std::mt19937_64 rng(8);
  const Vec mu{1.0, 2.0, 3.0, 4.0};
  const SymMatrix sigma = testing::random_spd(kL, rng);
  const ForcedDist f = ForcedDist::FromMoments(mu, sigma, 0.0, 1000);
  int low = 0;
  for (int k = 0; k < 1000; ++k) {
    const GenReport r = assess_latents(f, gaussian_rows(9, mu, sigma, rng), 0.95);
    low += r.status == GenStatus::kLow;
  }
  EXPECT_LT(low, 50);
}

TEST(DiagnosticsTest, ZeroNetCollapsesToOrigin) {
  ModelBundle b = make_bundle(Vec(kL, 0.0), SymMatrix::Identity(kL));
  for (auto t : b.network.params().tensors()) std::fill(t.begin(), t.end(), 0.0);
  const std::vector<std::vector<double>> pos(5, std::vector<double>{1, 2, 3, 4});
  const LsmDiagnostics d = dataset_lsm_diagnostics(b, pos);
  EXPECT_EQ(d.n, 5u);
  EXPECT_EQ(d.mean_l2, 0.0);
  EXPECT_EQ(d.median_dist_origin, 0.0);
  EXPECT_NEAR(d.fnl_value, 4.0 - 2.0 * 4.0 * std::sqrt(1e-6), 1e-12);
  EXPECT_THROW(dataset_lsm_diagnostics(b, {}), DomainError);
}

TEST(DiagnosticsTest, StandardNormalLatents) {
  std::mt19937_64 rng(9);
  const Matrix z = gaussian_rows(10000, Vec(kL, 0.0), SymMatrix::Identity(kL), rng);
  const LsmDiagnostics d = latent_diagnostics(z, FnlConfig{});
  // E|z| for a chi distribution with 4 degrees of freedom: 3 sqrt(pi/2) / 2.
  const double chi_mean = 1.5 * std::sqrt(std::acos(-1.0) / 2.0);
  EXPECT_NEAR(d.mean_l2, chi_mean, 0.02);
  EXPECT_LT(d.fnl_value, 0.05);
}

TEST(DiagnosticsTest, SingleLatent) {
  const LsmDiagnostics d = latent_diagnostics(Matrix(1, kL, std::vector<double>{1, 0, 0, 0}),
                                              FnlConfig{});
  EXPECT_EQ(d.mean_l2, 1.0);
  EXPECT_EQ(d.median_dist_origin, 1.0);
}

TEST(SurfaceTest, SinglePointMatchesHead) {
  ModelBundle b = make_bundle(Vec{0.1, 0.2, 0.3, 0.4}, SymMatrix::Identity(kL));
  b.network = pass_through_net({0.5, -1.0, 2.0, 0.25}, -0.2);
  SurfaceGrid g;
  g.dim_a = 2;
  g.dim_b = 0;
  g.a_min = g.a_max = 1.5;
  g.b_min = g.b_max = -0.5;
  g.a_steps = g.b_steps = 1;
  const auto pts = export_decision_surface(b, g);
  ASSERT_EQ(pts.size(), 1u);
  const double expected = b.network.forward(std::vector<double>{-0.5, 0.2, 1.5, 0.4}).y_hat;
  EXPECT_NEAR(pts[0].probability, expected, 1e-15);
}

TEST(SurfaceTest, MonotoneHeadGivesMonotoneRows) {
  ModelBundle b = make_bundle(Vec(kL, 0.0), SymMatrix::Identity(kL));
  b.network = pass_through_net({1.5, 0.3, 0.0, 0.0}, 0.0);
  SurfaceGrid g;
  g.a_steps = 21;
  g.b_steps = 7;
  const auto pts = export_decision_surface(b, g);
  ASSERT_EQ(pts.size(), 21u * 7u);
  for (std::size_t j = 0; j < 7; ++j) {
    for (std::size_t i = 1; i < 21; ++i) {
      EXPECT_GT(pts[j * 21 + i].probability, pts[j * 21 + i - 1].probability);
    }
  }
  // The 0.5 iso-line passes through the origin of this head.
  g.a_min = g.a_max = 0.0;
  g.b_min = g.b_max = 0.0;
  g.a_steps = g.b_steps = 1;
  EXPECT_EQ(export_decision_surface(b, g)[0].probability, 0.5);
  g.dim_b = kL;
  EXPECT_THROW(export_decision_surface(b, g), DomainError);
}

TEST(ReportIoTest, TextAndCsv) {
  const ModelBundle b = make_bundle(Vec(kL, 0.0), SymMatrix::Identity(kL));
  std::vector<GenReport> reports{
      score_exam(b, exam_from_points({{1, 0, 0, 0}, {2, 1, 0, 0}})),
      score_exam(b, exam_from_points({{-1, 0, 0, 0}}))};
  reports[1].exam_id = "t-001";
  reports[1].site = SiteTag::kShifted;
  const auto back = reports_from_text(reports_to_text(reports));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].distances, reports[0].distances);
  EXPECT_EQ(back[0].status, reports[0].status);
  EXPECT_TRUE(std::isnan(back[1].median_d));
  EXPECT_EQ(back[1].site, SiteTag::kShifted);

  const std::string csv = reports_to_csv(reports);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "exam_id,site_tag,n_pseudo_positives,median_d,threshold,status,warning_text");
  EXPECT_NE(csv.find("t-001,shifted,0,NA,"), std::string::npos);
  EXPECT_NE(csv.find("Indeterminate,no findings above threshold"), std::string::npos);

  const StatusCounts counts = count_statuses(reports);
  EXPECT_EQ(counts.high, 1u);
  EXPECT_EQ(counts.indeterminate, 1u);
  EXPECT_EQ(counts.total(), 2u);
}

}  // namespace
}  // namespace fnlgen
