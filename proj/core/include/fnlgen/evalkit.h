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

// Threshold calibration and free-response evaluation: sensitivity pooled over
// all positives, AFP (average false positives per exam), and AFP-vs-
// sensitivity curves stratified by the predicted generalizability group.
// A candidate counts as detected iff its score is strictly above psi.

#ifndef FNLGEN_EVALKIT_H_
#define FNLGEN_EVALKIT_H_

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fnlgen/gencheck.h"
#include "fnlgen/net.h"
#include "fnlgen/synth.h"

namespace fnlgen {

struct ScoredExam {
  std::string exam_id;
  std::vector<double> scores;
  std::vector<int> labels;
};

ScoredExam score_candidates(const Network& net, const Exam& exam);
std::vector<ScoredExam> score_candidates(const Network& net,
                                         std::span<const Exam> exams,
                                         std::size_t workers = 1);

struct ThresholdCalibration {
  double psi = 0.0;
  double achieved_sensitivity = 0.0;
  std::size_t n_positives = 0;
  std::size_t n_detected = 0;
};

// With positive scores sorted ascending s_(1) <= ... <= s_(n), takes
// k = floor((1 - target) * n) + 1 and places psi halfway between s_(k) and
// the next distinct lower score (or halfway to 0 when there is none).
ThresholdCalibration calibrate_from_scores(std::span<const double> positive_scores,
                                           double target);
ThresholdCalibration calibrate_threshold(const Network& net,
                                         std::span<const Exam> exams,
                                         double target = 0.90);

struct DetectionCounts {
  std::size_t tp = 0;
  std::size_t fn = 0;
  std::size_t fp = 0;
};

// Decides whether the positive candidate at `index` was detected given every
// candidate score in the exam. The default matches by candidate identity.
using DetectionMatcher = std::function<bool(
    const Exam& exam, std::size_t index, std::span<const double> scores, double psi)>;

bool identity_match(const Exam& exam, std::size_t index,
                    std::span<const double> scores, double psi);

DetectionCounts evaluate_exam(const Network& net, const Exam& exam, double psi,
                              const DetectionMatcher& matcher = identity_match);

struct CurvePoint {
  double threshold = 0.0;
  double sensitivity = 0.0;
  double afp = 0.0;
};

struct SensCurve {
  std::vector<CurvePoint> points;  // descending threshold
  std::size_t n_exams = 0;
  std::size_t n_positives = 0;
};

// Sweeps every observed score as a threshold, then 0 (everything detected).
// Throws DomainError when the exams contain no positive.
SensCurve afp_sensitivity_curve(std::span<const ScoredExam> exams);

DetectionCounts pooled_counts(std::span<const ScoredExam> exams, double psi);
double afp_at_threshold(std::span<const ScoredExam> exams, double psi);

// AFP of the highest-threshold point reaching `sensitivity`; nullopt if none.
std::optional<double> afp_at_sensitivity(const SensCurve& curve, double sensitivity);

inline constexpr std::array<double, 6> kSensitivityGrid = {0.70, 0.75, 0.80,
                                                           0.85, 0.875, 0.90};

struct EvalStratum {
  std::string name;  // all, high_gen, low_gen, indeterminate
  std::vector<std::string> exam_ids;
  std::optional<SensCurve> curve;  // absent when the stratum has no positive
  std::array<std::optional<double>, kSensitivityGrid.size()> afp{};
};

struct StratifiedReport {
  std::vector<EvalStratum> strata;
  const EvalStratum& stratum(std::string_view name) const;
};

// Throws ConfigError if any exam lacks a report.
StratifiedReport stratified_report(std::span<const ScoredExam> exams,
                                   std::span<const GenReport> reports);

// Rows are strata, columns the sensitivity grid; unreachable cells are "NA".
std::string table_to_csv(const StratifiedReport& report);
std::string curve_to_csv(const SensCurve& curve);

}  // namespace fnlgen

#endif  // FNLGEN_EVALKIT_H_
