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

#include "fnlgen/synth.h"

#include <cmath>
#include <filesystem>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "fnlgen/errors.h"
#include "oracles.h"

namespace fnlgen {
namespace {

CohortSpec basic_spec(std::size_t dim, std::uint64_t seed) {
  CohortSpec s;
  s.name = "unit";
  s.id_prefix = "u";
  s.n_exams = 4;
  s.candidates_per_exam = 50;
  s.positives_per_exam = {1.0, 1.0, 1.0};
  s.feature_dim = dim;
  s.positive.mean = Vec(dim, 1.0);
  s.positive.cov = SymMatrix::Diagonal(Vec(dim, 0.25));
  s.negative = {{0.7, {Vec(dim, -1.0), SymMatrix::Identity(dim)}},
                {0.3, {Vec(dim, 0.5), SymMatrix::Diagonal(Vec(dim, 0.5))}}};
  s.seed = seed;
  return s;
}

Matrix to_matrix(const std::vector<LabeledSample>& samples) {
  Matrix m(samples.size(), samples.front().features.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    std::copy(samples[i].features.begin(), samples[i].features.end(), m.row(i).begin());
  }
  return m;
}

// Frechet distance between two Gaussians, computed independently of the fnl
// kernel via the symmetric form tr((A^1/2 B A^1/2)^1/2).
double gaussian_frechet(const MeanCov& a, const MeanCov& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.mean.size(); ++i) {
    d += (a.mean[i] - b.mean[i]) * (a.mean[i] - b.mean[i]);
  }
  const SymMatrix ra = spd_sqrt(a.cov, 0.0);
  const SymMatrix inner(ra.matrix() * b.cov.matrix() * ra.matrix());
  return d + a.cov.trace() + b.cov.trace() - 2.0 * spd_sqrt(inner, 0.0).trace();
}

TEST(SynthTest, PositiveMeanFollowsLawOfLargeNumbers) {
  CohortSpec s = basic_spec(5, 1);
  s.n_exams = 10000;
  s.candidates_per_exam = 2;
  s.positives_per_exam = {1.0};
  const Cohort c = generate_cohort(s);
  const auto pos = pool_samples(c.exams, true);
  ASSERT_EQ(pos.size(), 10000u);
  const MeanCov mc = batch_mean_cov(to_matrix(pos));
  const double tol = 5.0 * 0.5 / std::sqrt(10000.0);
  for (double m : mc.mean) EXPECT_NEAR(m, 1.0, tol);
}

TEST(SynthTest, SinglePositiveExam) {
  CohortSpec s = basic_spec(3, 2);
  s.n_exams = 1;
  s.candidates_per_exam = 5;
  s.positives_per_exam = {1.0};
  const Cohort c = generate_cohort(s);
  ASSERT_EQ(c.exams.size(), 1u);
  const Exam& e = c.exams[0];
  EXPECT_EQ(e.candidates.size(), 5u);
  EXPECT_EQ(e.positive_count(), 1u);
  std::set<std::uint32_t> ids;
  for (const auto& cand : e.candidates) ids.insert(cand.id);
  EXPECT_EQ(ids.size(), 5u);
  EXPECT_EQ(e.site, SiteTag::kInternal);
}

TEST(SynthTest, SameSeedSameCohort) {
  const CohortSpec s = basic_spec(4, 3);
  const Cohort a = generate_cohort(s);
  const Cohort b = generate_cohort(s);
  EXPECT_EQ(a.exams, b.exams);
  EXPECT_EQ(fingerprint(a.exams), fingerprint(b.exams));
  const Cohort c = generate_cohort(basic_spec(4, 4));
  EXPECT_NE(fingerprint(a.exams), fingerprint(c.exams));
}

TEST(SynthTest, ExamsAreSelfContained) {
  // Adding exams leaves the earlier ones untouched.
  CohortSpec s = basic_spec(4, 5);
  const Cohort small = generate_cohort(s);
  s.n_exams = 9;
  const Cohort big = generate_cohort(s);
  for (std::size_t i = 0; i < small.exams.size(); ++i) EXPECT_EQ(small.exams[i], big.exams[i]);
}

TEST(ShiftTest, IdentityIsBitExact) {
  std::mt19937_64 rng(1);
  const ShiftPlane plane = draw_shift_plane(4, rng);
  const std::vector<double> x{0.1, -3.2, 1e-300, 7.5};
  const std::vector<double> mu{1.0, 1.0, 1.0, 1.0};
  const ShiftSpec id;
  EXPECT_TRUE(id.is_identity());
  EXPECT_EQ(apply_shift(x, id, plane, mu, rng), x);
}

TEST(ShiftTest, MeanShiftOnly) {
  std::mt19937_64 rng(2);
  const ShiftPlane plane = draw_shift_plane(3, rng);
  ShiftSpec s;
  s.mean_shift = {2.5, 0.0, 0.0};
  const std::vector<double> x{0.3, -1.0, 4.0};
  const std::vector<double> mu{0.5, 0.5, 0.5};
  const auto y = apply_shift(x, s, plane, mu, rng);
  EXPECT_NEAR(y[0] - x[0], 2.5, 1e-14);
  EXPECT_NEAR(y[1] - x[1], 0.0, 1e-14);
  EXPECT_NEAR(y[2] - x[2], 0.0, 1e-14);
}

TEST(ShiftTest, CovScaleMultipliesCovariance) {
  std::mt19937_64 rng(3);
  const std::size_t dim = 3;
  const ShiftPlane plane = draw_shift_plane(dim, rng);
  ShiftSpec s;
  s.cov_scale = 4.0;
  const SymMatrix cov = testing::random_spd(dim, rng, 0.5);
  const Matrix chol = testing::cholesky(cov);
  std::normal_distribution<double> g(0.0, 1.0);
  const std::size_t n = 10000;
  Matrix in(n, dim), out(n, dim);
  const std::vector<double> zero(dim, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> e(dim);
    for (double& v : e) v = g(rng);
    const Vec x = chol * std::span<const double>(e);
    std::copy(x.begin(), x.end(), in.row(i).begin());
    const auto y = apply_shift(x, s, plane, zero, rng);
    std::copy(y.begin(), y.end(), out.row(i).begin());
  }
  const SymMatrix ci = batch_mean_cov(in).cov;
  const SymMatrix co = batch_mean_cov(out).cov;
  for (std::size_t r = 0; r < dim; ++r) {
    EXPECT_NEAR(co(r, r) / ci(r, r), 4.0, 0.4);
  }
}

TEST(ShiftTest, RotationPreservesDistanceFromShiftedMean) {
  std::mt19937_64 rng(4);
  const ShiftPlane plane = draw_shift_plane(5, rng);
  ShiftSpec s;
  s.rotation_angle = 0.7;
  const std::vector<double> mu(5, 0.0);
  const std::vector<double> x{1.0, 2.0, -0.5, 0.25, 3.0};
  const auto y = apply_shift(x, s, plane, mu, rng);
  double nx = 0.0, ny = 0.0;
  for (std::size_t i = 0; i < 5; ++i) {
    nx += x[i] * x[i];
    ny += y[i] * y[i];
  }
  EXPECT_NEAR(nx, ny, 1e-12);
  EXPECT_NE(x, y);
}

TEST(SynthTest, ShiftedPositivesAreFartherFromInternalGaussian) {
  const std::size_t dim = 4;
  CohortSpec s = basic_spec(dim, 6);
  s.n_exams = 1500;
  s.candidates_per_exam = 5;
  s.positives_per_exam = {0.0, 1.0};
  const MeanCov internal = batch_mean_cov(to_matrix(pool_samples(generate_cohort(s).exams, true)));

  CohortSpec same = s;
  same.seed = 99;
  const MeanCov again =
      batch_mean_cov(to_matrix(pool_samples(generate_cohort(same).exams, true)));
  const double base = gaussian_frechet(internal, again);
  EXPECT_LT(base, 0.05);

  std::vector<ShiftSpec> shifts(3);
  shifts[0].mean_shift = {0.5, 0.0, 0.0, 0.0};
  shifts[1].cov_scale = 1.3;
  shifts[2].cov_scale = 0.75;
  for (const ShiftSpec& shift : shifts) {
    CohortSpec shifted = same;
    shifted.site = SiteTag::kShifted;
    shifted.shift = shift;
    const MeanCov mc =
        batch_mean_cov(to_matrix(pool_samples(generate_cohort(shifted).exams, true)));
    EXPECT_GT(gaussian_frechet(internal, mc), base);
  }
}

TEST(SynthTest, InvalidSpecs) {
  CohortSpec s = basic_spec(3, 1);
  s.positive.cov = SymMatrix::Diagonal(Vec{1.0, -1.0, 1.0});
  EXPECT_THROW(generate_cohort(s), ConfigError);
  s = basic_spec(3, 1);
  s.shift.cov_scale = 0.0;
  EXPECT_THROW(generate_cohort(s), ConfigError);
  s = basic_spec(3, 1);
  s.positives_per_exam.clear();
  EXPECT_THROW(generate_cohort(s), ConfigError);
}

TEST(CohortIoTest, JsonAndCsvRoundTrip) {
  CohortSpec s = basic_spec(3, 8);
  s.site = SiteTag::kShifted;
  s.shift.mean_shift = {0.5, 0.0, -0.5};
  s.shift.rotation_angle = 0.2;
  const Cohort c = generate_cohort(s);
  const Cohort back = cohort_from_text(cohort_to_text(c));
  EXPECT_EQ(back.exams, c.exams);
  EXPECT_EQ(back.spec.shift, c.spec.shift);
  EXPECT_EQ(exams_from_csv(cohort_to_csv(c)), c.exams);

  const auto path = std::filesystem::temp_directory_path() / "fnlgen_synth_cohort.json";
  save_cohort(c, path);
  EXPECT_EQ(load_cohort(path).exams, c.exams);
  std::filesystem::remove(path);
  EXPECT_THROW(cohort_from_text("{\"format\": \"x\""), FormatError);
  EXPECT_THROW(exams_from_csv("bad,header\n"), FormatError);
}

}  // namespace
}  // namespace fnlgen
