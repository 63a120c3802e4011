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

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>

#include "fnlgen/errors.h"
#include "json_io.h"

namespace fnlgen {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void check_gaussian(const GaussianParams& g, std::size_t dim,
                    const std::string& what) {
  if (g.mean.size() != dim || g.cov.dim() != dim) {
    throw ConfigError(what + ": mean/covariance dimension must equal feature_dim");
  }
  const SymEigen e = sym_eig(g.cov);
  if (!(e.values.back() > 0.0)) {
    throw ConfigError(what + ": covariance is not positive definite");
  }
}

// Draws mean + root * g with g ~ N(0, I).
std::vector<double> draw_gaussian(const Vec& mean, const SymMatrix& root,
                                  Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t d = mean.size();
  Vec g(d);
  for (double& v : g) v = normal(rng);
  std::vector<double> x(mean);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) x[i] += root(i, j) * g[j];
  }
  return x;
}

}  // namespace

std::string_view to_string(SiteTag tag) {
  return tag == SiteTag::kInternal ? "internal" : "shifted";
}

SiteTag parse_site_tag(std::string_view name) {
  if (name == "internal") return SiteTag::kInternal;
  if (name == "shifted") return SiteTag::kShifted;
  throw FormatError("unknown site tag '" + std::string(name) + "'");
}

std::size_t Exam::positive_count() const {
  return static_cast<std::size_t>(std::count_if(
      candidates.begin(), candidates.end(),
      [](const Candidate& c) { return c.label == 1; }));
}

bool ShiftSpec::is_identity() const {
  const bool zero_shift = std::all_of(mean_shift.begin(), mean_shift.end(),
                                      [](double v) { return v == 0.0; });
  return zero_shift && cov_scale == 1.0 && rotation_angle == 0.0 &&
         noise_sigma == 0.0;
}

ShiftPlane draw_shift_plane(std::size_t dim, Rng& rng) {
  if (dim < 2) return {Vec(dim, 0.0), Vec(dim, 0.0)};
  std::normal_distribution<double> normal(0.0, 1.0);
  ShiftPlane plane{Vec(dim), Vec(dim)};
  for (;;) {
    for (double& x : plane.u) x = normal(rng);
    for (double& x : plane.v) x = normal(rng);
    const double nu = std::sqrt(dot(plane.u, plane.u));
    if (nu < 1e-8) continue;
    for (double& x : plane.u) x /= nu;
    const double proj = dot(plane.u, plane.v);
    for (std::size_t i = 0; i < dim; ++i) plane.v[i] -= proj * plane.u[i];
    const double nv = std::sqrt(dot(plane.v, plane.v));
    if (nv < 1e-8) continue;
    for (double& x : plane.v) x /= nv;
    return plane;
  }
}

std::vector<double> apply_shift(std::span<const double> x, const ShiftSpec& shift,
                                const ShiftPlane& plane,
                                std::span<const double> pos_mean, Rng& rng) {
  const std::size_t d = x.size();
  if (pos_mean.size() != d || (!shift.mean_shift.empty() && shift.mean_shift.size() != d)) {
    throw DimensionError("apply_shift: dimension mismatch");
  }
  std::vector<double> y(x.begin(), x.end());
  if (shift.is_identity()) return y;

  if (shift.cov_scale != 1.0) {
    const double s = std::sqrt(shift.cov_scale);
    for (std::size_t i = 0; i < d; ++i) y[i] = pos_mean[i] + (x[i] - pos_mean[i]) * s;
  }
  if (!shift.mean_shift.empty()) {
    for (std::size_t i = 0; i < d; ++i) y[i] += shift.mean_shift[i];
  }
  if (shift.rotation_angle != 0.0) {
    if (plane.u.size() != d || plane.v.size() != d) {
      throw DimensionError("apply_shift: rotation plane dimension mismatch");
    }
    const double c = std::cos(shift.rotation_angle);
    const double s = std::sin(shift.rotation_angle);
    const double pu = dot(plane.u, y);
    const double pv = dot(plane.v, y);
    for (std::size_t i = 0; i < d; ++i) {
      y[i] += (c - 1.0) * (pu * plane.u[i] + pv * plane.v[i]) +
              s * (pu * plane.v[i] - pv * plane.u[i]);
    }
  }
  if (shift.noise_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, shift.noise_sigma);
    for (double& v : y) v += noise(rng);
  }
  return y;
}

void CohortSpec::validate() const {
  if (n_exams == 0) throw ConfigError(name + ": n_exams must be >= 1");
  if (candidates_per_exam == 0) {
    throw ConfigError(name + ": candidates_per_exam must be >= 1");
  }
  if (feature_dim == 0) throw ConfigError(name + ": feature_dim must be >= 1");
  if (positives_per_exam.empty()) {
    throw ConfigError(name + ": positives_per_exam needs at least one weight");
  }
  double total = 0.0;
  for (double w : positives_per_exam) {
    if (!(w >= 0.0)) throw ConfigError(name + ": positives_per_exam weights must be >= 0");
    total += w;
  }
  if (!(total > 0.0)) throw ConfigError(name + ": positives_per_exam weights sum to zero");
  check_gaussian(positive, feature_dim, name + ".positive");
  if (negative.empty()) throw ConfigError(name + ": negative mixture is empty");
  double neg_total = 0.0;
  for (const MixtureComponent& c : negative) {
    if (!(c.weight >= 0.0)) throw ConfigError(name + ": mixture weights must be >= 0");
    neg_total += c.weight;
    check_gaussian(c.dist, feature_dim, name + ".negative");
  }
  if (!(neg_total > 0.0)) throw ConfigError(name + ": mixture weights sum to zero");
  if (!shift.mean_shift.empty() && shift.mean_shift.size() != feature_dim) {
    throw ConfigError(name + ": shift.mean_shift dimension must equal feature_dim");
  }
  if (!(shift.cov_scale > 0.0)) throw ConfigError(name + ": shift.cov_scale must be > 0");
  if (!(shift.noise_sigma >= 0.0)) {
    throw ConfigError(name + ": shift.noise_sigma must be >= 0");
  }
  if (shift.rotation_angle != 0.0 && feature_dim < 2) {
    throw ConfigError(name + ": rotation needs feature_dim >= 2");
  }
}

Cohort generate_cohort(const CohortSpec& spec) {
  spec.validate();
  const SymMatrix pos_root = spd_sqrt(spec.positive.cov, 0.0);
  std::vector<SymMatrix> neg_roots;
  std::vector<double> neg_weights;
  for (const MixtureComponent& c : spec.negative) {
    neg_roots.push_back(spd_sqrt(c.dist.cov, 0.0));
    neg_weights.push_back(c.weight);
  }
  Rng plane_rng(derive_seed(spec.seed, "shift-plane"));
  const ShiftPlane plane = draw_shift_plane(spec.feature_dim, plane_rng);

  Cohort cohort{spec, {}};
  cohort.exams.reserve(spec.n_exams);
  const int width = static_cast<int>(std::to_string(spec.n_exams).size());
  for (std::size_t e = 0; e < spec.n_exams; ++e) {
    Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(e)));
    std::discrete_distribution<std::size_t> count_dist(
        spec.positives_per_exam.begin(), spec.positives_per_exam.end());
    std::discrete_distribution<std::size_t> comp_dist(neg_weights.begin(),
                                                      neg_weights.end());
    const std::size_t n_pos =
        std::min(count_dist(rng) + 1, spec.candidates_per_exam);

    std::vector<Candidate> cands;
    cands.reserve(spec.candidates_per_exam);
    for (std::size_t i = 0; i < spec.candidates_per_exam; ++i) {
      Candidate c;
      if (i < n_pos) {
        const auto x = draw_gaussian(spec.positive.mean, pos_root, rng);
        c.features = apply_shift(x, spec.shift, plane, spec.positive.mean, rng);
        c.label = 1;
      } else {
        const std::size_t k = comp_dist(rng);
        c.features = draw_gaussian(spec.negative[k].dist.mean, neg_roots[k], rng);
        c.label = 0;
      }
      cands.push_back(std::move(c));
    }
    std::shuffle(cands.begin(), cands.end(), rng);
    for (std::size_t i = 0; i < cands.size(); ++i) {
      cands[i].id = static_cast<std::uint32_t>(i);
    }

    std::ostringstream id;
    id << spec.id_prefix << '-' << std::setw(width) << std::setfill('0') << e;
    cohort.exams.push_back({id.str(), spec.site, std::move(cands)});
  }
  return cohort;
}

std::vector<LabeledSample> pool_samples(std::span<const Exam> exams,
                                        bool positives_only) {
  std::vector<LabeledSample> out;
  for (const Exam& e : exams) {
    for (const Candidate& c : e.candidates) {
      if (positives_only && c.label != 1) continue;
      out.push_back({c.features, c.label});
    }
  }
  return out;
}

std::uint64_t fingerprint(std::span<const Exam> exams) {
  Fnv1a h;
  for (const Exam& e : exams) {
    h.update(e.exam_id);
    for (const Candidate& c : e.candidates) {
      h.update(static_cast<std::uint64_t>(c.id));
      h.update(static_cast<std::uint64_t>(c.label));
      for (double v : c.features) h.update(v);
    }
  }
  return h.digest();
}

}  // namespace fnlgen

namespace fnlgen {
namespace {

using json_io::Json;

Json gaussian_to_json(const GaussianParams& g) {
  return {{"mean", json_io::to_json(g.mean)}, {"cov", json_io::to_json(g.cov)}};
}

GaussianParams gaussian_from_json(const Json& j, std::string_view what) {
  return {json_io::vec_from_json(json_io::require(j, "mean", what), what),
          json_io::sym_from_json(json_io::require(j, "cov", what), what)};
}

Json spec_to_json(const CohortSpec& s) {
  Json neg = Json::array();
  for (const MixtureComponent& c : s.negative) {
    Json jc = gaussian_to_json(c.dist);
    jc["weight"] = c.weight;
    neg.push_back(jc);
  }
  return {{"name", s.name},
          {"id_prefix", s.id_prefix},
          {"site_tag", std::string(to_string(s.site))},
          {"n_exams", s.n_exams},
          {"candidates_per_exam", s.candidates_per_exam},
          {"positives_per_exam", json_io::to_json(s.positives_per_exam)},
          {"feature_dim", s.feature_dim},
          {"positive", gaussian_to_json(s.positive)},
          {"negative", neg},
          {"shift",
           {{"mean_shift", json_io::to_json(s.shift.mean_shift)},
            {"cov_scale", s.shift.cov_scale},
            {"rotation_angle", s.shift.rotation_angle},
            {"noise_sigma", s.shift.noise_sigma}}},
          {"seed", s.seed}};
}

CohortSpec spec_from_json(const Json& j) {
  constexpr std::string_view what = "cohort spec";
  CohortSpec s;
  s.name = json_io::get_string(j, "name", what);
  s.id_prefix = json_io::get_string(j, "id_prefix", what);
  s.site = parse_site_tag(json_io::get_string(j, "site_tag", what));
  s.n_exams = json_io::get_u64(j, "n_exams", what);
  s.candidates_per_exam = json_io::get_u64(j, "candidates_per_exam", what);
  s.positives_per_exam =
      json_io::vec_from_json(json_io::require(j, "positives_per_exam", what), what);
  s.feature_dim = json_io::get_u64(j, "feature_dim", what);
  s.positive = gaussian_from_json(json_io::require(j, "positive", what), "positive");
  const Json& neg = json_io::require(j, "negative", what);
  if (!neg.is_array()) throw FormatError("cohort spec: negative must be an array");
  for (const Json& jc : neg) {
    s.negative.push_back({json_io::get_double(jc, "weight", "negative"),
                          gaussian_from_json(jc, "negative")});
  }
  const Json& sh = json_io::require(j, "shift", what);
  s.shift.mean_shift = json_io::vec_from_json(json_io::require(sh, "mean_shift", "shift"), "shift");
  s.shift.cov_scale = json_io::get_double(sh, "cov_scale", "shift");
  s.shift.rotation_angle = json_io::get_double(sh, "rotation_angle", "shift");
  s.shift.noise_sigma = json_io::get_double(sh, "noise_sigma", "shift");
  s.seed = json_io::get_u64(j, "seed", what);
  return s;
}

}  // namespace

std::string cohort_to_text(const Cohort& cohort) {
  Json doc;
  doc["format"] = "fnlgen-cohort";
  doc["format_version"] = kCohortFormatVersion;
  doc["spec"] = spec_to_json(cohort.spec);
  Json exams = Json::array();
  for (const Exam& e : cohort.exams) {
    Json ids = Json::array();
    Json labels = Json::array();
    Json feats = Json::array();
    for (const Candidate& c : e.candidates) {
      ids.push_back(c.id);
      labels.push_back(c.label);
      feats.push_back(json_io::to_json(c.features));
    }
    exams.push_back({{"exam_id", e.exam_id},
                     {"site_tag", std::string(to_string(e.site))},
                     {"candidate_ids", ids},
                     {"labels", labels},
                     {"features", feats}});
  }
  doc["exams"] = exams;
  return doc.dump() + "\n";
}

Cohort cohort_from_text(const std::string& text) {
  const Json doc = json_io::parse(text, "cohort");
  const Json& version = json_io::require(doc, "format_version", "cohort");
  if (!version.is_number_integer() || version.get<int>() != kCohortFormatVersion) {
    throw VersionError("cohort: unsupported format_version " + version.dump());
  }
  Cohort cohort;
  cohort.spec = spec_from_json(json_io::require(doc, "spec", "cohort"));
  const Json& exams = json_io::require(doc, "exams", "cohort");
  if (!exams.is_array()) throw FormatError("cohort: exams must be an array");
  for (const Json& je : exams) {
    Exam e;
    e.exam_id = json_io::get_string(je, "exam_id", "exam");
    e.site = parse_site_tag(json_io::get_string(je, "site_tag", "exam"));
    const Json& ids = json_io::require(je, "candidate_ids", "exam");
    const Json& labels = json_io::require(je, "labels", "exam");
    const Json& feats = json_io::require(je, "features", "exam");
    if (!ids.is_array() || !labels.is_array() || !feats.is_array() ||
        ids.size() != labels.size() || ids.size() != feats.size() || ids.empty()) {
      throw ShapeError("exam " + e.exam_id + ": candidate arrays disagree in length");
    }
    for (std::size_t i = 0; i < ids.size(); ++i) {
      Candidate c;
      if (!ids[i].is_number_unsigned() || !labels[i].is_number_integer()) {
        throw FormatError("exam " + e.exam_id + ": bad candidate id or label");
      }
      c.id = ids[i].get<std::uint32_t>();
      c.label = labels[i].get<int>();
      if (c.label != 0 && c.label != 1) {
        throw FormatError("exam " + e.exam_id + ": labels must be 0 or 1");
      }
      c.features = json_io::vec_from_json(feats[i], "candidate features");
      if (c.features.size() != cohort.spec.feature_dim) {
        throw ShapeError("exam " + e.exam_id + ": feature vector has wrong length");
      }
      e.candidates.push_back(std::move(c));
    }
    cohort.exams.push_back(std::move(e));
  }
  return cohort;
}

void save_cohort(const Cohort& cohort, const std::filesystem::path& path) {
  json_io::write_file(path, cohort_to_text(cohort));
}

Cohort load_cohort(const std::filesystem::path& path) {
  return cohort_from_text(json_io::read_file(path));
}

std::string cohort_to_csv(const Cohort& cohort) {
  std::ostringstream os;
  os << "exam_id,candidate_id,label,site_tag";
  for (std::size_t f = 0; f < cohort.spec.feature_dim; ++f) os << ",f_" << f;
  os << '\n';
  os << std::setprecision(17);
  for (const Exam& e : cohort.exams) {
    for (const Candidate& c : e.candidates) {
      os << e.exam_id << ',' << c.id << ',' << c.label << ',' << to_string(e.site);
      for (double v : c.features) os << ',' << v;
      os << '\n';
    }
  }
  return os.str();
}

std::vector<Exam> exams_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("exam_id,candidate_id,label,site_tag", 0) != 0) {
    throw FormatError("candidate CSV: missing or unexpected header");
  }
  std::vector<Exam> exams;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() < 5) {
      throw FormatError("candidate CSV line " + std::to_string(line_no) + ": too few columns");
    }
    Candidate c;
    try {
      c.id = static_cast<std::uint32_t>(std::stoul(cells[1]));
      c.label = std::stoi(cells[2]);
      for (std::size_t i = 4; i < cells.size(); ++i) c.features.push_back(std::stod(cells[i]));
    } catch (const std::logic_error&) {
      throw FormatError("candidate CSV line " + std::to_string(line_no) + ": bad number");
    }
    if (c.label != 0 && c.label != 1) {
      throw FormatError("candidate CSV line " + std::to_string(line_no) + ": label must be 0 or 1");
    }
    if (exams.empty() || exams.back().exam_id != cells[0]) {
      exams.push_back({cells[0], parse_site_tag(cells[3]), {}});
    }
    exams.back().candidates.push_back(std::move(c));
  }
  return exams;
}

}  // namespace fnlgen
