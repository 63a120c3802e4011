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

#include "run_config.h"

#include <cmath>
#include <fstream>
#include <iterator>
#include <set>
#include <string_view>

#include "fnlgen/errors.h"
#include "fnlgen/rng.h"
#include "json.hpp"

namespace fnlgen::cli {
namespace {

using Json = nlohmann::ordered_json;

constexpr std::string_view kDefaultConfig = R"({
  "seed": 20260101,
  "cohort": {
    "feature_dim": 4,
    "candidates_per_exam": 600,
    "positives_per_exam": {"max": 40, "decay": 13.0},
    "positive": {"mean": [1.5, 0.0, 0.0, 0.0], "cov": 0.0625},
    "negative": [
      {"weight": 0.99, "mean": [-1.5, 0.0, 0.0, 0.0], "cov": [0.5, 0.0625, 0.0625, 0.0625]},
      {"weight": 0.01, "mean": [0.9, 0.0, 0.0, 0.0], "cov": 0.0625}
    ],
    "shift": {
      "mean_shift": [0.2, 1.98997487421324, 0.0, 0.0],
      "cov_scale": 2.0,
      "rotation_angle": 0.0,
      "noise_sigma": 0.2
    },
    "train_exams": 175,
    "internal_exams": 42,
    "shifted_exams": 72
  },
  "net": {"hidden_dims": [32, 16], "latent_dim": 4, "activation": "relu"},
  "loss": {"w_bce": 0.9, "w_fnl": 0.1},
  "optimizer": {"learning_rate": 0.001, "beta1": 0.9, "beta2": 0.999, "adam_eps": 1e-08},
  "fnl": {"eps": 1e-06},
  "sampler": {"batch_size": 128, "jitter_sigma": 0.0, "scale_lo": 1.0, "scale_hi": 1.0},
  "train": {
    "max_steps": 12000,
    "plateau_window": 0,
    "plateau_tol": 1e-05,
    "target_sensitivity": 0.9
  },
  "gencheck": {"quantile": 0.95, "ridge": 1e-08},
  "score": {"alarm_low_rate": 0.15},
  "diagnose": {"fnl_alarm": 1.0}
}
)";

[[noreturn]] void bad(const std::string& key, const std::string& why) {
  throw ConfigError("config key '" + key + "': " + why);
}

Json parse_document(std::string_view text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(what + " is not valid JSON: " + e.what());
  }
}

void merge_into(Json& base, const Json& over, const std::string& prefix) {
  if (!over.is_object()) bad(prefix.empty() ? "<root>" : prefix, "expected an object");
  for (const auto& [key, value] : over.items()) {
    const std::string full = prefix.empty() ? key : prefix + "." + key;
    if (!base.contains(key)) bad(full, "unknown key");
    Json& slot = base[key];
    if (slot.is_object() && value.is_object()) {
      merge_into(slot, value, full);
    } else {
      slot = value;
    }
  }
}

void apply_set(Json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("--set expects section.key=value, got '" + assignment + "'");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  Json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot - start);
    if (!node->is_object() || !node->contains(key)) bad(path, "unknown key");
    node = &(*node)[key];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  Json value = Json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  *node = std::move(value);
}

double num(const Json& j, const std::string& key) {
  if (!j.is_number()) bad(key, "expected a number");
  return j.get<double>();
}

std::uint64_t count(const Json& j, const std::string& key) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return j.get<std::uint64_t>();
  bad(key, "expected a non-negative integer");
}

std::string str(const Json& j, const std::string& key) {
  if (!j.is_string()) bad(key, "expected a string");
  return j.get<std::string>();
}

Vec vec(const Json& j, const std::string& key) {
  if (!j.is_array()) bad(key, "expected an array of numbers");
  Vec out;
  for (const Json& v : j) out.push_back(num(v, key));
  return out;
}

void check_keys(const Json& j, std::initializer_list<std::string_view> allowed,
                const std::string& key) {
  if (!j.is_object()) bad(key, "expected an object");
  const std::set<std::string_view> ok(allowed);
  for (const auto& [k, v] : j.items()) {
    if (!ok.contains(k)) bad(key + "." + k, "unknown key");
  }
}

// A covariance given as a scalar (isotropic), a vector (diagonal) or a
// full matrix.
SymMatrix covariance(const Json& j, std::size_t dim, const std::string& key) {
  if (j.is_number()) return SymMatrix::Diagonal(Vec(dim, j.get<double>()));
  if (!j.is_array() || j.empty()) bad(key, "expected a number, vector or matrix");
  if (j.front().is_number()) {
    const Vec d = vec(j, key);
    if (d.size() != dim) bad(key, "diagonal length must equal feature_dim");
    return SymMatrix::Diagonal(d);
  }
  if (j.size() != dim) bad(key, "matrix must be feature_dim x feature_dim");
  Matrix m(dim, dim);
  for (std::size_t r = 0; r < dim; ++r) {
    const Vec row = vec(j[r], key);
    if (row.size() != dim) bad(key, "matrix must be feature_dim x feature_dim");
    for (std::size_t c = 0; c < dim; ++c) m(r, c) = row[c];
  }
  for (std::size_t r = 0; r < dim; ++r) {
    for (std::size_t c = 0; c < r; ++c) {
      if (m(r, c) != m(c, r)) bad(key, "matrix must be symmetric");
    }
  }
  return SymMatrix(m);
}

GaussianParams gaussian(const Json& j, std::size_t dim, const std::string& key) {
  GaussianParams g;
  g.mean = vec(j.at("mean"), key + ".mean");
  g.cov = covariance(j.at("cov"), dim, key + ".cov");
  return g;
}

std::vector<double> positives_weights(const Json& j, const std::string& key) {
  if (j.is_array()) return vec(j, key);
  check_keys(j, {"max", "decay"}, key);
  if (!j.contains("max") || !j.contains("decay")) bad(key, "needs both max and decay");
  const std::uint64_t max = count(j["max"], key + ".max");
  const double decay = num(j["decay"], key + ".decay");
  if (max == 0) bad(key + ".max", "must be >= 1");
  if (!(decay > 0.0)) bad(key + ".decay", "must be > 0");
  std::vector<double> w(max);
  for (std::size_t k = 0; k < max; ++k) w[k] = std::exp(-static_cast<double>(k) / decay);
  return w;
}

GenerateConfig cohorts(const Json& c, std::uint64_t seed) {
  CohortSpec base;
  base.feature_dim = count(c["feature_dim"], "cohort.feature_dim");
  base.candidates_per_exam = count(c["candidates_per_exam"], "cohort.candidates_per_exam");
  base.positives_per_exam = positives_weights(c["positives_per_exam"], "cohort.positives_per_exam");
  check_keys(c["positive"], {"mean", "cov"}, "cohort.positive");
  base.positive = gaussian(c["positive"], base.feature_dim, "cohort.positive");
  const Json& neg = c["negative"];
  if (!neg.is_array()) bad("cohort.negative", "expected an array of components");
  for (std::size_t i = 0; i < neg.size(); ++i) {
    const std::string key = "cohort.negative[" + std::to_string(i) + "]";
    check_keys(neg[i], {"weight", "mean", "cov"}, key);
    base.negative.push_back({num(neg[i].value("weight", Json(1.0)), key + ".weight"),
                             gaussian(neg[i], base.feature_dim, key)});
  }

  GenerateConfig g;
  g.train = base;
  g.train.name = "train";
  g.train.id_prefix = "train";
  g.train.n_exams = count(c["train_exams"], "cohort.train_exams");
  g.train.seed = derive_seed(seed, "cohort/train");

  g.test_internal = base;
  g.test_internal.name = "test_internal";
  g.test_internal.id_prefix = "internal";
  g.test_internal.n_exams = count(c["internal_exams"], "cohort.internal_exams");
  g.test_internal.seed = derive_seed(seed, "cohort/test_internal");

  const Json& s = c["shift"];
  check_keys(s, {"mean_shift", "cov_scale", "rotation_angle", "noise_sigma"}, "cohort.shift");
  g.test_shifted = base;
  g.test_shifted.name = "test_shifted";
  g.test_shifted.id_prefix = "shifted";
  g.test_shifted.site = SiteTag::kShifted;
  g.test_shifted.n_exams = count(c["shifted_exams"], "cohort.shifted_exams");
  g.test_shifted.shift.mean_shift = vec(s["mean_shift"], "cohort.shift.mean_shift");
  g.test_shifted.shift.cov_scale = num(s["cov_scale"], "cohort.shift.cov_scale");
  g.test_shifted.shift.rotation_angle = num(s["rotation_angle"], "cohort.shift.rotation_angle");
  g.test_shifted.shift.noise_sigma = num(s["noise_sigma"], "cohort.shift.noise_sigma");
  g.test_shifted.seed = derive_seed(seed, "cohort/test_shifted");
  return g;
}

TrainConfig training(const Json& doc, std::uint64_t seed) {
  TrainConfig t;
  const Json& net = doc["net"];
  if (!net["hidden_dims"].is_array()) bad("net.hidden_dims", "expected an array");
  for (const Json& h : net["hidden_dims"]) t.net.hidden_dims.push_back(count(h, "net.hidden_dims"));
  t.net.latent_dim = count(net["latent_dim"], "net.latent_dim");
  t.net.activation = parse_activation(str(net["activation"], "net.activation"));

  t.weights.w_bce = num(doc["loss"]["w_bce"], "loss.w_bce");
  t.weights.w_fnl = num(doc["loss"]["w_fnl"], "loss.w_fnl");

  const Json& o = doc["optimizer"];
  t.optim.learning_rate = num(o["learning_rate"], "optimizer.learning_rate");
  t.optim.beta1 = num(o["beta1"], "optimizer.beta1");
  t.optim.beta2 = num(o["beta2"], "optimizer.beta2");
  t.optim.adam_eps = num(o["adam_eps"], "optimizer.adam_eps");

  t.fnl.eps = num(doc["fnl"]["eps"], "fnl.eps");

  const Json& s = doc["sampler"];
  t.batch.batch_size = count(s["batch_size"], "sampler.batch_size");
  t.batch.augment.jitter_sigma = num(s["jitter_sigma"], "sampler.jitter_sigma");
  t.batch.augment.scale_lo = num(s["scale_lo"], "sampler.scale_lo");
  t.batch.augment.scale_hi = num(s["scale_hi"], "sampler.scale_hi");

  const Json& tr = doc["train"];
  t.max_steps = count(tr["max_steps"], "train.max_steps");
  t.plateau_window = count(tr["plateau_window"], "train.plateau_window");
  t.plateau_tol = num(tr["plateau_tol"], "train.plateau_tol");
  t.target_sensitivity = num(tr["target_sensitivity"], "train.target_sensitivity");

  t.gencheck.quantile = num(doc["gencheck"]["quantile"], "gencheck.quantile");
  t.gencheck.ridge = num(doc["gencheck"]["ridge"], "gencheck.ridge");
  t.seed = seed;
  return t;
}

}  // namespace

const std::string& default_config_text() {
  static const std::string text(kDefaultConfig);
  return text;
}

RunConfig load_run_config(const ConfigSources& sources) {
  Json doc = parse_document(kDefaultConfig, "built-in defaults");
  if (sources.file) {
    std::string text;
    try {
      std::ifstream in(*sources.file, std::ios::binary);
      if (!in) throw IoError("cannot open config file " + sources.file->string());
      text.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    } catch (const std::ios_base::failure&) {
      throw IoError("cannot read config file " + sources.file->string());
    }
    merge_into(doc, parse_document(text, "config file " + sources.file->string()), "");
  }
  for (const std::string& s : sources.sets) apply_set(doc, s);
  if (sources.seed) doc["seed"] = *sources.seed;

  RunConfig rc;
  rc.seed = count(doc["seed"], "seed");
  rc.generate = cohorts(doc["cohort"], rc.seed);
  rc.train = training(doc, rc.seed);
  rc.alarm_low_rate = num(doc["score"]["alarm_low_rate"], "score.alarm_low_rate");
  rc.fnl_alarm = num(doc["diagnose"]["fnl_alarm"], "diagnose.fnl_alarm");

  rc.generate.train.validate();
  rc.generate.test_internal.validate();
  rc.generate.test_shifted.validate();
  NetConfig shape = rc.train.net;
  shape.input_dim = rc.generate.train.feature_dim;
  shape.validate();
  rc.train.validate();
  if (!(rc.alarm_low_rate >= 0.0 && rc.alarm_low_rate <= 1.0)) {
    bad("score.alarm_low_rate", "must lie in [0, 1]");
  }
  if (!(rc.fnl_alarm >= 0.0)) bad("diagnose.fnl_alarm", "must be >= 0");

  rc.effective_text = doc.dump(2) + "\n";
  return rc;
}

}  // namespace fnlgen::cli
