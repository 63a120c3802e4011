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

#include "fnlgen/bundle.h"

#include "fnlgen/errors.h"
#include "json_io.h"

namespace fnlgen {

using json_io::Json;

bool bundles_equal(const ModelBundle& a, const ModelBundle& b) {
  return a.network.config() == b.network.config() &&
         a.network.params() == b.network.params() &&
         a.forced.mu() == b.forced.mu() && a.forced.sigma() == b.forced.sigma() &&
         a.forced.ridge() == b.forced.ridge() &&
         a.forced.n_fit() == b.forced.n_fit() && a.psi == b.psi &&
         a.loss_weights == b.loss_weights && a.optim == b.optim &&
         a.fnl == b.fnl && a.gencheck == b.gencheck && a.meta == b.meta;
}

std::string bundle_to_text(const ModelBundle& bundle) {
  const NetConfig& nc = bundle.network.config();
  Json doc;
  doc["format"] = "fnlgen-model-bundle";
  doc["format_version"] = kBundleFormatVersion;

  Json hidden = Json::array();
  for (std::size_t h : nc.hidden_dims) hidden.push_back(h);
  doc["net_config"] = {{"input_dim", nc.input_dim},
                       {"hidden_dims", hidden},
                       {"latent_dim", nc.latent_dim},
                       {"activation", std::string(to_string(nc.activation))},
                       {"seed", nc.seed}};

  Json layers = Json::array();
  for (const DenseLayer& l : bundle.network.params().layers) {
    layers.push_back({{"weights", json_io::to_json(l.weights)},
                      {"bias", json_io::to_json(l.bias)}});
  }
  doc["weights"] = layers;

  doc["mu_f"] = json_io::to_json(bundle.forced.mu());
  doc["sigma_f"] = json_io::to_json(bundle.forced.sigma());
  doc["n_fit"] = bundle.forced.n_fit();
  doc["psi"] = bundle.psi;
  doc["loss_weights"] = {{"w_bce", bundle.loss_weights.w_bce},
                         {"w_fnl", bundle.loss_weights.w_fnl}};
  doc["optimizer"] = {{"learning_rate", bundle.optim.learning_rate},
                      {"beta1", bundle.optim.beta1},
                      {"beta2", bundle.optim.beta2},
                      {"adam_eps", bundle.optim.adam_eps}};
  doc["fnl"] = {{"eps", bundle.fnl.eps}};
  doc["gencheck"] = {{"quantile", bundle.gencheck.quantile},
                     {"ridge", bundle.gencheck.ridge}};
  doc["training"] = {{"seed", bundle.meta.seed},
                     {"data_fingerprint", json_io::hex64(bundle.meta.data_fingerprint)},
                     {"steps", bundle.meta.steps},
                     {"baseline", bundle.meta.baseline},
                     {"achieved_sensitivity", bundle.meta.achieved_sensitivity}};
  return doc.dump(1) + "\n";
}

ModelBundle bundle_from_text(const std::string& text) {
  const Json doc = json_io::parse(text, "model bundle");
  if (!doc.is_object()) throw FormatError("model bundle: expected an object");
  const Json& version = json_io::require(doc, "format_version", "model bundle");
  if (!version.is_number_integer() || version.get<int>() != kBundleFormatVersion) {
    throw VersionError("model bundle: unsupported format_version " + version.dump() +
                       " (expected " + std::to_string(kBundleFormatVersion) + ")");
  }

  const Json& jc = json_io::require(doc, "net_config", "model bundle");
  NetConfig nc;
  nc.input_dim = json_io::get_u64(jc, "input_dim", "net_config");
  nc.latent_dim = json_io::get_u64(jc, "latent_dim", "net_config");
  nc.seed = json_io::get_u64(jc, "seed", "net_config");
  const Json& hidden = json_io::require(jc, "hidden_dims", "net_config");
  if (!hidden.is_array()) throw FormatError("net_config.hidden_dims must be an array");
  for (const Json& h : hidden) {
    if (!h.is_number_unsigned()) throw FormatError("net_config.hidden_dims entries must be integers");
    nc.hidden_dims.push_back(h.get<std::size_t>());
  }
  try {
    nc.activation = parse_activation(json_io::get_string(jc, "activation", "net_config"));
    nc.validate();
  } catch (const ConfigError& e) {
    throw FormatError(std::string("model bundle: ") + e.what());
  }

  const Json& jw = json_io::require(doc, "weights", "model bundle");
  if (!jw.is_array()) throw FormatError("model bundle: weights must be an array");
  NetParams params;
  for (const Json& jl : jw) {
    DenseLayer layer{json_io::matrix_from_json(json_io::require(jl, "weights", "layer"), "layer.weights"),
                     json_io::vec_from_json(json_io::require(jl, "bias", "layer"), "layer.bias")};
    params.layers.push_back(std::move(layer));
  }
  params.check_shapes(nc);

  ModelBundle b;
  b.network = Network(nc, std::move(params));

  Vec mu = json_io::vec_from_json(json_io::require(doc, "mu_f", "model bundle"), "mu_f");
  SymMatrix sigma = json_io::sym_from_json(json_io::require(doc, "sigma_f", "model bundle"), "sigma_f");
  if (mu.size() != nc.latent_dim || sigma.dim() != nc.latent_dim) {
    throw ShapeError("model bundle: forced distribution dimension does not match latent_dim");
  }
  const Json& jg = json_io::require(doc, "gencheck", "model bundle");
  b.gencheck.quantile = json_io::get_double(jg, "quantile", "gencheck");
  b.gencheck.ridge = json_io::get_double(jg, "ridge", "gencheck");
  b.forced = ForcedDist::FromMoments(std::move(mu), std::move(sigma), b.gencheck.ridge,
                                     json_io::get_u64(doc, "n_fit", "model bundle"));

  b.psi = json_io::get_double(doc, "psi", "model bundle");
  const Json& jl = json_io::require(doc, "loss_weights", "model bundle");
  b.loss_weights.w_bce = json_io::get_double(jl, "w_bce", "loss_weights");
  b.loss_weights.w_fnl = json_io::get_double(jl, "w_fnl", "loss_weights");
  const Json& jo = json_io::require(doc, "optimizer", "model bundle");
  b.optim.learning_rate = json_io::get_double(jo, "learning_rate", "optimizer");
  b.optim.beta1 = json_io::get_double(jo, "beta1", "optimizer");
  b.optim.beta2 = json_io::get_double(jo, "beta2", "optimizer");
  b.optim.adam_eps = json_io::get_double(jo, "adam_eps", "optimizer");
  b.fnl.eps = json_io::get_double(json_io::require(doc, "fnl", "model bundle"), "eps", "fnl");

  const Json& jt = json_io::require(doc, "training", "model bundle");
  b.meta.seed = json_io::get_u64(jt, "seed", "training");
  b.meta.data_fingerprint =
      json_io::parse_hex64(json_io::get_string(jt, "data_fingerprint", "training"),
                           "training.data_fingerprint");
  b.meta.steps = json_io::get_u64(jt, "steps", "training");
  b.meta.baseline = json_io::get_bool(jt, "baseline", "training");
  b.meta.achieved_sensitivity = json_io::get_double(jt, "achieved_sensitivity", "training");
  return b;
}

void save_bundle(const ModelBundle& bundle, const std::filesystem::path& path) {
  json_io::write_file(path, bundle_to_text(bundle));
}

ModelBundle load_bundle(const std::filesystem::path& path) {
  return bundle_from_text(json_io::read_file(path));
}

}  // namespace fnlgen
