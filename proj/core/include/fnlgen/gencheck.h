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

// Inference-time generalizability check. For each exam, the latents of the
// pseudo-positives (candidates scored strictly above psi) are compared with
// the forced distribution by squared Mahalanobis distance; the exam is
// flagged Low when the median distance exceeds the chi-square quantile with
// dim(mu_f) degrees of freedom.

#ifndef FNLGEN_GENCHECK_H_
#define FNLGEN_GENCHECK_H_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fnlgen/bundle.h"
#include "fnlgen/forced_dist.h"
#include "fnlgen/numstat.h"
#include "fnlgen/synth.h"

namespace fnlgen {

enum class GenStatus { kHigh, kLow, kIndeterminate };

std::string_view to_string(GenStatus s);
GenStatus parse_gen_status(std::string_view name);

inline constexpr std::string_view kWarnHigh = "model generalizes";
inline constexpr std::string_view kWarnLow = "low model generalizability";
inline constexpr std::string_view kWarnIndeterminate = "no findings above threshold";

struct GenReport {
  std::string exam_id;
  SiteTag site = SiteTag::kInternal;
  std::vector<double> distances;  // squared Mahalanobis, candidate order
  double median_d = 0.0;          // NaN when there are no pseudo-positives
  double threshold = 0.0;
  GenStatus status = GenStatus::kIndeterminate;
  std::size_t n_pseudo_positives = 0;
  std::string warning_text;
};

// Fit on all training-positive latents (one per row).
ForcedDist fit_forced_dist(const Matrix& latents, double ridge = kDefaultRidge);

// The decision rule applied to an already-selected set of pseudo-positive
// latents (one per row; zero rows is allowed and yields Indeterminate).
GenReport assess_latents(const ForcedDist& forced, const Matrix& latents,
                         double quantile);

GenReport score_exam(const ModelBundle& bundle, const Exam& exam);

// Scores exams on up to `workers` threads; output order follows `exams`.
std::vector<GenReport> score_exams(const ModelBundle& bundle,
                                   std::span<const Exam> exams,
                                   std::size_t workers = 1);

struct LsmDiagnostics {
  std::size_t n = 0;
  double mean_l2 = 0.0;
  double median_dist_origin = 0.0;
  double fnl_value = 0.0;
};

LsmDiagnostics dataset_lsm_diagnostics(const ModelBundle& bundle,
                                       std::span<const std::vector<double>> positives);

// Same statistics for latents already computed (one per row).
LsmDiagnostics latent_diagnostics(const Matrix& latents, const FnlConfig& fnl);

struct SurfaceGrid {
  std::size_t dim_a = 0;
  std::size_t dim_b = 1;
  double a_min = -3.0, a_max = 3.0;
  double b_min = -3.0, b_max = 3.0;
  std::size_t a_steps = 61;
  std::size_t b_steps = 61;
};

struct SurfacePoint {
  double z_a = 0.0;
  double z_b = 0.0;
  double probability = 0.0;
};

// Evaluates the classification head over a grid in two latent coordinates,
// holding the others at mu_f. Row-major: b outer, a inner.
std::vector<SurfacePoint> export_decision_surface(const ModelBundle& bundle,
                                                  const SurfaceGrid& grid);
std::string surface_to_csv(std::span<const SurfacePoint> points);

// Report files. CSV columns:
// exam_id,site_tag,n_pseudo_positives,median_d,threshold,status,warning_text
std::string reports_to_csv(std::span<const GenReport> reports);
std::string reports_to_text(std::span<const GenReport> reports);
std::vector<GenReport> reports_from_text(const std::string& text);

struct StatusCounts {
  std::size_t high = 0;
  std::size_t low = 0;
  std::size_t indeterminate = 0;
  std::size_t total() const { return high + low + indeterminate; }
};

StatusCounts count_statuses(std::span<const GenReport> reports);

}  // namespace fnlgen

#endif  // FNLGEN_GENCHECK_H_
