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
#include <exception>
#include <iomanip>
#include <limits>
#include <sstream>
#include <thread>

#include "fnlgen/errors.h"
#include "json_io.h"

namespace fnlgen {
namespace {

using json_io::Json;

std::string format_number(double v) {
  if (std::isnan(v)) return "NA";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

std::string_view to_string(GenStatus s) {
  switch (s) {
    case GenStatus::kHigh: return "HighGeneralizability";
    case GenStatus::kLow: return "LowGeneralizability";
    case GenStatus::kIndeterminate: return "Indeterminate";
  }
  return "Indeterminate";
}

GenStatus parse_gen_status(std::string_view name) {
  if (name == "HighGeneralizability") return GenStatus::kHigh;
  if (name == "LowGeneralizability") return GenStatus::kLow;
  if (name == "Indeterminate") return GenStatus::kIndeterminate;
  throw FormatError("unknown generalizability status '" + std::string(name) + "'");
}

ForcedDist fit_forced_dist(const Matrix& latents, double ridge) {
  return ForcedDist::Fit(latents, ridge);
}

GenReport assess_latents(const ForcedDist& forced, const Matrix& latents,
                         double quantile) {
  GenReport r;
  r.threshold = chi2_quantile(static_cast<int>(forced.dim()), quantile);
  r.n_pseudo_positives = latents.rows();
  if (latents.rows() > 0 && latents.cols() != forced.dim()) {
    throw DimensionError("assess_latents: latent dimension mismatch");
  }
  r.distances.reserve(latents.rows());
  for (std::size_t i = 0; i < latents.rows(); ++i) {
    r.distances.push_back(forced.mahalanobis_sq(latents.row(i)));
  }
  if (r.distances.empty()) {
    r.median_d = std::numeric_limits<double>::quiet_NaN();
    r.status = GenStatus::kIndeterminate;
    r.warning_text = kWarnIndeterminate;
  } else {
    r.median_d = median(r.distances);
    r.status = r.median_d <= r.threshold ? GenStatus::kHigh : GenStatus::kLow;
    r.warning_text = r.status == GenStatus::kHigh ? kWarnHigh : kWarnLow;
  }
  return r;
}

GenReport score_exam(const ModelBundle& bundle, const Exam& exam) {
  const Network& net = bundle.network;
  const std::size_t l = net.config().latent_dim;
  std::vector<double> flat;
  std::size_t n = 0;
  for (const Candidate& c : exam.candidates) {
    if (c.features.size() != net.config().input_dim) {
      throw DimensionError("exam " + exam.exam_id + ": candidate has " +
                           std::to_string(c.features.size()) +
                           " features, bundle expects " +
                           std::to_string(net.config().input_dim));
    }
    const ForwardTrace tr = net.forward(c.features);
    if (tr.y_hat > bundle.psi) {
      flat.insert(flat.end(), tr.latent.begin(), tr.latent.end());
      ++n;
    }
  }
  GenReport r = assess_latents(bundle.forced, Matrix(n, l, std::move(flat)),
                               bundle.gencheck.quantile);
  r.exam_id = exam.exam_id;
  r.site = exam.site;
  return r;
}

std::vector<GenReport> score_exams(const ModelBundle& bundle,
                                   std::span<const Exam> exams,
                                   std::size_t workers) {
  std::vector<GenReport> out(exams.size());
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(exams.size(), 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < exams.size(); ++i) out[i] = score_exam(bundle, exams[i]);
    return out;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < exams.size(); i += workers) {
          out[i] = score_exam(bundle, exams[i]);
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (std::thread& t : threads) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

LsmDiagnostics latent_diagnostics(const Matrix& latents, const FnlConfig& fnl) {
  if (latents.rows() == 0) throw DomainError("diagnostics need at least one latent");
  LsmDiagnostics d;
  d.n = latents.rows();
  std::vector<double> norms(d.n);
  for (std::size_t i = 0; i < d.n; ++i) {
    double s = 0.0;
    for (double v : latents.row(i)) s += v * v;
    norms[i] = std::sqrt(s);
    d.mean_l2 += norms[i];
  }
  d.mean_l2 /= static_cast<double>(d.n);
  d.median_dist_origin = median(norms);
  d.fnl_value = fnl_forward(LatentBatch(latents), fnl);
  return d;
}

LsmDiagnostics dataset_lsm_diagnostics(const ModelBundle& bundle,
                                       std::span<const std::vector<double>> positives) {
  if (positives.empty()) throw DomainError("diagnostics need at least one positive");
  const std::size_t l = bundle.network.config().latent_dim;
  Matrix latents(positives.size(), l);
  for (std::size_t i = 0; i < positives.size(); ++i) {
    const ForwardTrace tr = bundle.network.forward(positives[i]);
    std::copy(tr.latent.begin(), tr.latent.end(), latents.row(i).begin());
  }
  return latent_diagnostics(latents, bundle.fnl);
}

std::vector<SurfacePoint> export_decision_surface(const ModelBundle& bundle,
                                                  const SurfaceGrid& grid) {
  const std::size_t l = bundle.network.config().latent_dim;
  if (grid.dim_a >= l || grid.dim_b >= l) {
    throw DomainError("decision surface: grid dimensions must lie in [0, " +
                      std::to_string(l) + ")");
  }
  if (grid.a_steps == 0 || grid.b_steps == 0) {
    throw DomainError("decision surface: grid needs at least one step per axis");
  }
  auto axis = [](double lo, double hi, std::size_t steps, std::size_t k) {
    return steps == 1 ? lo : lo + (hi - lo) * static_cast<double>(k) /
                                      static_cast<double>(steps - 1);
  };
  std::vector<SurfacePoint> out;
  out.reserve(grid.a_steps * grid.b_steps);
  Vec z = bundle.forced.mu();
  for (std::size_t j = 0; j < grid.b_steps; ++j) {
    for (std::size_t i = 0; i < grid.a_steps; ++i) {
      const double za = axis(grid.a_min, grid.a_max, grid.a_steps, i);
      const double zb = axis(grid.b_min, grid.b_max, grid.b_steps, j);
      z[grid.dim_a] = za;
      z[grid.dim_b] = zb;
      out.push_back({za, zb, bundle.network.head_probability(z)});
    }
  }
  return out;
}

std::string surface_to_csv(std::span<const SurfacePoint> points) {
  std::ostringstream os;
  os << "z_a,z_b,probability\n" << std::setprecision(17);
  for (const SurfacePoint& p : points) {
    os << p.z_a << ',' << p.z_b << ',' << p.probability << '\n';
  }
  return os.str();
}

std::string reports_to_csv(std::span<const GenReport> reports) {
  std::ostringstream os;
  os << "exam_id,site_tag,n_pseudo_positives,median_d,threshold,status,warning_text\n";
  for (const GenReport& r : reports) {
    os << r.exam_id << ',' << to_string(r.site) << ',' << r.n_pseudo_positives
       << ',' << format_number(r.median_d) << ',' << format_number(r.threshold)
       << ',' << to_string(r.status) << ',' << r.warning_text << '\n';
  }
  return os.str();
}

std::string reports_to_text(std::span<const GenReport> reports) {
  Json doc;
  doc["format"] = "fnlgen-gen-reports";
  doc["format_version"] = 1;
  Json arr = Json::array();
  for (const GenReport& r : reports) {
    Json jr;
    jr["exam_id"] = r.exam_id;
    jr["site_tag"] = std::string(to_string(r.site));
    jr["n_pseudo_positives"] = r.n_pseudo_positives;
    jr["distances"] = json_io::to_json(r.distances);
    jr["median_d"] = std::isnan(r.median_d) ? Json(nullptr) : Json(r.median_d);
    jr["threshold"] = r.threshold;
    jr["status"] = std::string(to_string(r.status));
    jr["warning_text"] = r.warning_text;
    arr.push_back(std::move(jr));
  }
  doc["reports"] = std::move(arr);
  return doc.dump(1) + "\n";
}

std::vector<GenReport> reports_from_text(const std::string& text) {
  const Json doc = json_io::parse(text, "generalizability reports");
  const Json& version = json_io::require(doc, "format_version", "reports");
  if (!version.is_number_integer() || version.get<int>() != 1) {
    throw VersionError("reports: unsupported format_version " + version.dump());
  }
  const Json& arr = json_io::require(doc, "reports", "reports");
  if (!arr.is_array()) throw FormatError("reports: 'reports' must be an array");
  std::vector<GenReport> out;
  for (const Json& jr : arr) {
    GenReport r;
    r.exam_id = json_io::get_string(jr, "exam_id", "report");
    r.site = parse_site_tag(json_io::get_string(jr, "site_tag", "report"));
    r.n_pseudo_positives = json_io::get_u64(jr, "n_pseudo_positives", "report");
    r.distances = json_io::vec_from_json(json_io::require(jr, "distances", "report"), "distances");
    const Json& md = json_io::require(jr, "median_d", "report");
    r.median_d = md.is_null() ? std::numeric_limits<double>::quiet_NaN()
                              : json_io::as_double(md, "median_d");
    r.threshold = json_io::get_double(jr, "threshold", "report");
    r.status = parse_gen_status(json_io::get_string(jr, "status", "report"));
    r.warning_text = json_io::get_string(jr, "warning_text", "report");
    out.push_back(std::move(r));
  }
  return out;
}

StatusCounts count_statuses(std::span<const GenReport> reports) {
  StatusCounts c;
  for (const GenReport& r : reports) {
    switch (r.status) {
      case GenStatus::kHigh: ++c.high; break;
      case GenStatus::kLow: ++c.low; break;
      case GenStatus::kIndeterminate: ++c.indeterminate; break;
    }
  }
  return c;
}

}  // namespace fnlgen
