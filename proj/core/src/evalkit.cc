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

#include "fnlgen/evalkit.h"

#include <algorithm>
#include <cmath>
#include <exception>
#include <iomanip>
#include <map>
#include <sstream>
#include <thread>

#include "fnlgen/errors.h"

namespace fnlgen {
namespace {

constexpr double kSensitivityTolerance = 1e-12;

std::string format_cell(const std::optional<double>& v) {
  if (!v) return "NA";
  std::ostringstream os;
  os << std::setprecision(10) << *v;
  return os.str();
}

}  // namespace

ScoredExam score_candidates(const Network& net, const Exam& exam) {
  ScoredExam s{exam.exam_id, {}, {}};
  s.scores.reserve(exam.candidates.size());
  s.labels.reserve(exam.candidates.size());
  for (const Candidate& c : exam.candidates) {
    s.scores.push_back(net.forward(c.features).y_hat);
    s.labels.push_back(c.label);
  }
  return s;
}

std::vector<ScoredExam> score_candidates(const Network& net,
                                         std::span<const Exam> exams,
                                         std::size_t workers) {
  std::vector<ScoredExam> out(exams.size());
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(exams.size(), 1));
  std::vector<std::exception_ptr> errors(workers);
  auto run = [&](std::size_t w) {
    try {
      for (std::size_t i = w; i < exams.size(); i += workers) {
        out[i] = score_candidates(net, exams[i]);
      }
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(run, w);
    for (std::thread& t : threads) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

ThresholdCalibration calibrate_from_scores(std::span<const double> positive_scores,
                                           double target) {
  if (!(target > 0.0 && target <= 1.0)) {
    throw DomainError("target sensitivity must lie in (0, 1]");
  }
  if (positive_scores.empty()) {
    throw DomainError("threshold calibration needs at least one positive");
  }
  std::vector<double> s(positive_scores.begin(), positive_scores.end());
  std::sort(s.begin(), s.end());
  const std::size_t n = s.size();
  // The small offset absorbs round-off such as (1 - 0.9) * 10 = 0.99999...
  const auto misses = static_cast<std::size_t>(
      std::floor((1.0 - target) * static_cast<double>(n) + 1e-9));
  const std::size_t k = std::min(misses, n - 1);  // zero-based index of s_(k)
  const double anchor = s[k];
  const auto lower = std::find_if(s.rbegin(), s.rend(),
                                  [&](double v) { return v < anchor; });
  const double below = lower == s.rend() ? 0.0 : *lower;

  ThresholdCalibration c;
  c.psi = anchor - 0.5 * (anchor - below);
  c.n_positives = n;
  c.n_detected = static_cast<std::size_t>(
      std::count_if(s.begin(), s.end(), [&](double v) { return v > c.psi; }));
  c.achieved_sensitivity = static_cast<double>(c.n_detected) / static_cast<double>(n);
  return c;
}

ThresholdCalibration calibrate_threshold(const Network& net,
                                         std::span<const Exam> exams,
                                         double target) {
  std::vector<double> scores;
  for (const Exam& e : exams) {
    for (const Candidate& c : e.candidates) {
      if (c.label == 1) scores.push_back(net.forward(c.features).y_hat);
    }
  }
  return calibrate_from_scores(scores, target);
}

bool identity_match(const Exam& /*exam*/, std::size_t index,
                    std::span<const double> scores, double psi) {
  return scores[index] > psi;
}

DetectionCounts evaluate_exam(const Network& net, const Exam& exam, double psi,
                              const DetectionMatcher& matcher) {
  const ScoredExam scored = score_candidates(net, exam);
  DetectionCounts c;
  for (std::size_t i = 0; i < exam.candidates.size(); ++i) {
    if (exam.candidates[i].label == 1) {
      (matcher(exam, i, scored.scores, psi) ? c.tp : c.fn)++;
    } else if (scored.scores[i] > psi) {
      ++c.fp;
    }
  }
  return c;
}

DetectionCounts pooled_counts(std::span<const ScoredExam> exams, double psi) {
  DetectionCounts c;
  for (const ScoredExam& e : exams) {
    for (std::size_t i = 0; i < e.scores.size(); ++i) {
      const bool hit = e.scores[i] > psi;
      if (e.labels[i] == 1) {
        (hit ? c.tp : c.fn)++;
      } else if (hit) {
        ++c.fp;
      }
    }
  }
  return c;
}

double afp_at_threshold(std::span<const ScoredExam> exams, double psi) {
  if (exams.empty()) throw DomainError("AFP needs at least one exam");
  return static_cast<double>(pooled_counts(exams, psi).fp) /
         static_cast<double>(exams.size());
}

SensCurve afp_sensitivity_curve(std::span<const ScoredExam> exams) {
  std::vector<std::pair<double, int>> items;
  std::size_t n_pos = 0;
  for (const ScoredExam& e : exams) {
    for (std::size_t i = 0; i < e.scores.size(); ++i) {
      items.emplace_back(e.scores[i], e.labels[i]);
      n_pos += e.labels[i] == 1;
    }
  }
  if (n_pos == 0) throw DomainError("AFP/sensitivity curve needs at least one positive");
  std::sort(items.begin(), items.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });

  SensCurve curve;
  curve.n_exams = exams.size();
  curve.n_positives = n_pos;
  const double n_exams = static_cast<double>(exams.size());
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t i = 0;
  while (i < items.size()) {
    const double t = items[i].first;
    curve.points.push_back({t, static_cast<double>(tp) / static_cast<double>(n_pos),
                            static_cast<double>(fp) / n_exams});
    for (; i < items.size() && items[i].first == t; ++i) {
      (items[i].second == 1 ? tp : fp)++;
    }
  }
  curve.points.push_back({0.0, static_cast<double>(tp) / static_cast<double>(n_pos),
                          static_cast<double>(fp) / n_exams});
  return curve;
}

std::optional<double> afp_at_sensitivity(const SensCurve& curve, double sensitivity) {
  for (const CurvePoint& p : curve.points) {
    if (p.sensitivity >= sensitivity - kSensitivityTolerance) return p.afp;
  }
  return std::nullopt;
}

const EvalStratum& StratifiedReport::stratum(std::string_view name) const {
  for (const EvalStratum& s : strata) {
    if (s.name == name) return s;
  }
  throw DomainError("no stratum named '" + std::string(name) + "'");
}

StratifiedReport stratified_report(std::span<const ScoredExam> exams,
                                   std::span<const GenReport> reports) {
  std::map<std::string, GenStatus, std::less<>> status_of;
  for (const GenReport& r : reports) status_of[r.exam_id] = r.status;

  std::vector<ScoredExam> groups[4];
  const char* names[4] = {"all", "high_gen", "low_gen", "indeterminate"};
  for (const ScoredExam& e : exams) {
    const auto it = status_of.find(e.exam_id);
    if (it == status_of.end()) {
      throw ConfigError("no generalizability report for exam " + e.exam_id);
    }
    groups[0].push_back(e);
    const int g = it->second == GenStatus::kHigh  ? 1
                  : it->second == GenStatus::kLow ? 2
                                                  : 3;
    groups[g].push_back(e);
  }

  StratifiedReport out;
  for (int g = 0; g < 4; ++g) {
    EvalStratum s;
    s.name = names[g];
    for (const ScoredExam& e : groups[g]) s.exam_ids.push_back(e.exam_id);
    const bool has_positive = std::any_of(
        groups[g].begin(), groups[g].end(), [](const ScoredExam& e) {
          return std::find(e.labels.begin(), e.labels.end(), 1) != e.labels.end();
        });
    if (has_positive) {
      s.curve = afp_sensitivity_curve(groups[g]);
      for (std::size_t k = 0; k < kSensitivityGrid.size(); ++k) {
        s.afp[k] = afp_at_sensitivity(*s.curve, kSensitivityGrid[k]);
      }
    }
    out.strata.push_back(std::move(s));
  }
  return out;
}

std::string table_to_csv(const StratifiedReport& report) {
  std::ostringstream os;
  os << "stratum,n_exams";
  for (double s : kSensitivityGrid) os << ",afp_at_" << s * 100.0 << "%";
  os << '\n';
  for (const EvalStratum& s : report.strata) {
    os << s.name << ',' << s.exam_ids.size();
    for (const auto& cell : s.afp) os << ',' << format_cell(cell);
    os << '\n';
  }
  return os.str();
}

std::string curve_to_csv(const SensCurve& curve) {
  std::ostringstream os;
  os << "threshold,sensitivity,afp\n" << std::setprecision(17);
  for (const CurvePoint& p : curve.points) {
    os << p.threshold << ',' << p.sensitivity << ',' << p.afp << '\n';
  }
  return os.str();
}

}  // namespace fnlgen
