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

// Synthetic cohorts of exams. Each exam is a set of candidate feature vectors
// with binary labels; positives come from one Gaussian, negatives from a
// Gaussian mixture, and a shifted site applies an affine transform plus noise
// to the positive features to emulate a domain shift.

#ifndef FNLGEN_SYNTH_H_
#define FNLGEN_SYNTH_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fnlgen/numstat.h"
#include "fnlgen/rng.h"
#include "fnlgen/types.h"

namespace fnlgen {

enum class SiteTag { kInternal, kShifted };

std::string_view to_string(SiteTag tag);
SiteTag parse_site_tag(std::string_view name);

struct Candidate {
  std::uint32_t id = 0;
  std::vector<double> features;
  int label = 0;

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

struct Exam {
  std::string exam_id;
  SiteTag site = SiteTag::kInternal;
  std::vector<Candidate> candidates;

  std::size_t positive_count() const;
  friend bool operator==(const Exam&, const Exam&) = default;
};

struct GaussianParams {
  Vec mean;
  SymMatrix cov;

  friend bool operator==(const GaussianParams&, const GaussianParams&) = default;
};

struct MixtureComponent {
  double weight = 1.0;
  GaussianParams dist;

  friend bool operator==(const MixtureComponent&, const MixtureComponent&) = default;
};

struct ShiftSpec {
  Vec mean_shift;  // empty means zero
  double cov_scale = 1.0;
  double rotation_angle = 0.0;  // radians, in a random 2D subspace
  double noise_sigma = 0.0;

  bool is_identity() const;
  friend bool operator==(const ShiftSpec&, const ShiftSpec&) = default;
};

// Orthonormal pair spanning the rotation plane.
struct ShiftPlane {
  Vec u;
  Vec v;
};

ShiftPlane draw_shift_plane(std::size_t dim, Rng& rng);

// x' = R (mean_shift + (x - pos_mean) sqrt(cov_scale) + pos_mean) + eta,
// eta ~ N(0, noise_sigma^2 I). The identity spec returns x unchanged.
std::vector<double> apply_shift(std::span<const double> x, const ShiftSpec& shift,
                                const ShiftPlane& plane,
                                std::span<const double> pos_mean, Rng& rng);

struct CohortSpec {
  std::string name = "cohort";
  std::string id_prefix = "ex";
  SiteTag site = SiteTag::kInternal;
  std::size_t n_exams = 1;
  std::size_t candidates_per_exam = 600;
  // Entry k is the relative weight of an exam holding k + 1 positives.
  std::vector<double> positives_per_exam;
  std::size_t feature_dim = 0;
  GaussianParams positive;
  std::vector<MixtureComponent> negative;
  ShiftSpec shift;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Cohort {
  CohortSpec spec;
  std::vector<Exam> exams;
};

// Deterministic given spec.seed; each exam draws from its own stream derived
// from (seed, exam index), so exams are independent of each other.
Cohort generate_cohort(const CohortSpec& spec);

// Candidates with label 1 (or all candidates when `positives_only` is false)
// pooled across exams as labeled samples.
std::vector<LabeledSample> pool_samples(std::span<const Exam> exams,
                                        bool positives_only = false);

std::uint64_t fingerprint(std::span<const Exam> exams);

// Cohort files: a versioned JSON document echoing the generating spec,
// followed by the exams. The flat CSV export has one row per candidate:
// exam_id,candidate_id,label,site_tag,f_0,...,f_{F-1}.
inline constexpr int kCohortFormatVersion = 1;

std::string cohort_to_text(const Cohort& cohort);
Cohort cohort_from_text(const std::string& text);
void save_cohort(const Cohort& cohort, const std::filesystem::path& path);
Cohort load_cohort(const std::filesystem::path& path);

std::string cohort_to_csv(const Cohort& cohort);
// Reads the flat CSV export back; consecutive rows sharing an exam_id form
// one exam.
std::vector<Exam> exams_from_csv(const std::string& text);

}  // namespace fnlgen

#endif  // FNLGEN_SYNTH_H_
