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

#include "fnlgen/net.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "fnlgen/errors.h"
#include "fnlgen/rng.h"

namespace fnlgen {
namespace {

double activate(Activation a, double x) {
  return a == Activation::kRelu ? std::max(x, 0.0) : std::tanh(x);
}

// Derivative expressed through the activated output.
double activate_grad(Activation a, double out) {
  return a == Activation::kRelu ? (out > 0.0 ? 1.0 : 0.0) : 1.0 - out * out;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void affine(const DenseLayer& layer, std::span<const double> in, Vec& out) {
  const std::size_t rows = layer.weights.rows();
  out.assign(rows, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto w = layer.weights.row(r);
    double s = layer.bias[r];
    for (std::size_t c = 0; c < in.size(); ++c) s += w[c] * in[c];
    out[r] = s;
  }
}

// Accumulates dW += delta * in^T, db += delta, and returns W^T delta.
Vec backprop_layer(const DenseLayer& layer, DenseLayer& grad,
                   std::span<const double> in, std::span<const double> delta) {
  Vec d_in(in.size(), 0.0);
  for (std::size_t r = 0; r < delta.size(); ++r) {
    const double d = delta[r];
    if (d == 0.0) continue;
    grad.bias[r] += d;
    auto gw = grad.weights.row(r);
    const auto w = layer.weights.row(r);
    for (std::size_t c = 0; c < in.size(); ++c) {
      gw[c] += d * in[c];
      d_in[c] += w[c] * d;
    }
  }
  return d_in;
}

std::vector<std::pair<std::size_t, std::size_t>> layer_shapes(
    const NetConfig& config) {
  std::vector<std::pair<std::size_t, std::size_t>> shapes;
  std::size_t in = config.input_dim;
  for (std::size_t h : config.hidden_dims) {
    shapes.emplace_back(h, in);
    in = h;
  }
  shapes.emplace_back(config.latent_dim, in);
  shapes.emplace_back(1, config.latent_dim);
  return shapes;
}

}  // namespace

std::string_view to_string(Activation a) {
  return a == Activation::kRelu ? "relu" : "tanh";
}

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  throw ConfigError("unknown activation '" + std::string(name) +
                    "' (expected relu or tanh)");
}

void NetConfig::validate() const {
  if (input_dim == 0) throw ConfigError("net.input_dim must be >= 1");
  if (hidden_dims.empty()) {
    throw ConfigError("net.hidden_dims needs at least one hidden layer");
  }
  for (std::size_t h : hidden_dims) {
    if (h == 0) throw ConfigError("net.hidden_dims entries must be >= 1");
  }
  if (latent_dim == 0) throw ConfigError("net.latent_dim must be >= 1");
}

NetParams NetParams::ZerosLike(const NetParams& other) {
  NetParams z;
  z.layers.reserve(other.layers.size());
  for (const DenseLayer& l : other.layers) {
    z.layers.push_back({Matrix(l.weights.rows(), l.weights.cols()),
                        Vec(l.bias.size(), 0.0)});
  }
  return z;
}

std::vector<std::span<double>> NetParams::tensors() {
  std::vector<std::span<double>> out;
  for (DenseLayer& l : layers) {
    out.push_back(l.weights.data());
    out.emplace_back(l.bias);
  }
  return out;
}

std::vector<std::span<const double>> NetParams::tensors() const {
  std::vector<std::span<const double>> out;
  for (const DenseLayer& l : layers) {
    out.push_back(l.weights.data());
    out.emplace_back(l.bias);
  }
  return out;
}

std::size_t NetParams::parameter_count() const {
  std::size_t n = 0;
  for (auto t : tensors()) n += t.size();
  return n;
}

void NetParams::check_shapes(const NetConfig& config) const {
  const auto shapes = layer_shapes(config);
  if (layers.size() != shapes.size()) {
    throw ShapeError("network has " + std::to_string(layers.size()) +
                     " layers, config implies " + std::to_string(shapes.size()));
  }
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    const auto [out, in] = shapes[i];
    if (layers[i].weights.rows() != out || layers[i].weights.cols() != in ||
        layers[i].bias.size() != out) {
      throw ShapeError("layer " + std::to_string(i) + " expected " +
                       std::to_string(out) + "x" + std::to_string(in));
    }
  }
}

Network::Network(NetConfig config) : config_(std::move(config)) {
  config_.validate();
  Rng rng(config_.seed);
  for (const auto& [out, in] : layer_shapes(config_)) {
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    DenseLayer layer{Matrix(out, in), Vec(out, 0.0)};
    for (double& w : layer.weights.data()) w = dist(rng);
    params_.layers.push_back(std::move(layer));
  }
}

Network::Network(NetConfig config, NetParams params)
    : config_(std::move(config)), params_(std::move(params)) {
  config_.validate();
  params_.check_shapes(config_);
}

ForwardTrace Network::forward(std::span<const double> x) const {
  if (x.size() != config_.input_dim) {
    throw DimensionError("forward: input has " + std::to_string(x.size()) +
                         " features, network expects " +
                         std::to_string(config_.input_dim));
  }
  ForwardTrace trace;
  const std::size_t n_hidden = config_.hidden_dims.size();
  trace.hidden.resize(n_hidden);
  std::span<const double> in = x;
  for (std::size_t i = 0; i < n_hidden; ++i) {
    Vec& out = trace.hidden[i];
    affine(params_.layers[i], in, out);
    for (double& v : out) v = activate(config_.activation, v);
    in = out;
  }
  affine(params_.layers[n_hidden], in, trace.latent);

  Vec logit;
  affine(params_.layers[n_hidden + 1], trace.latent, logit);
  if (!std::isfinite(logit[0])) {
    throw NumericalError("forward: non-finite activation");
  }
  trace.logit = std::clamp(logit[0], -kLogitClamp, kLogitClamp);
  trace.y_hat = sigmoid(trace.logit);
  return trace;
}

double Network::head_probability(std::span<const double> latent) const {
  if (latent.size() != config_.latent_dim) {
    throw DimensionError("head_probability: latent dimension mismatch");
  }
  Vec logit;
  affine(params_.layers.back(), latent, logit);
  return sigmoid(std::clamp(logit[0], -kLogitClamp, kLogitClamp));
}

double bce_loss(double y_hat, int y) {
  const double p = std::clamp(y_hat, 1e-12, 1.0 - 1e-12);
  return y == 1 ? -std::log(p) : -std::log(1.0 - p);
}

void LossWeights::validate() const {
  if (!(w_bce >= 0.0) || !(w_fnl >= 0.0) || !(w_bce + w_fnl > 0.0)) {
    throw ConfigError("loss weights must be >= 0 with a positive sum");
  }
}

LossAndGrads combined_loss_and_grads(const Network& net,
                                     std::span<const LabeledSample> batch,
                                     const LossWeights& weights,
                                     const FnlConfig& fnl_cfg) {
  if (batch.empty()) throw DimensionError("combined loss: empty batch");
  const NetConfig& cfg = net.config();
  const NetParams& params = net.params();
  const std::size_t n = batch.size();
  const std::size_t l = cfg.latent_dim;
  const std::size_t n_hidden = cfg.hidden_dims.size();

  std::vector<ForwardTrace> traces;
  traces.reserve(n);
  std::vector<std::size_t> positives;
  LossAndGrads out{{}, NetParams::ZerosLike(params)};
  for (std::size_t i = 0; i < n; ++i) {
    traces.push_back(net.forward(batch[i].features));
    out.loss.bce += bce_loss(traces.back().y_hat, batch[i].label);
    if (batch[i].label == 1) positives.push_back(i);
  }
  out.loss.bce /= static_cast<double>(n);
  out.loss.n_positive = positives.size();

  // Row k of fnl_grad belongs to batch item positives[k].
  Matrix fnl_grad;
  if (!positives.empty()) {
    Matrix latents(positives.size(), l);
    for (std::size_t k = 0; k < positives.size(); ++k) {
      std::copy(traces[positives[k]].latent.begin(),
                traces[positives[k]].latent.end(), latents.row(k).begin());
    }
    const LatentBatch lb(std::move(latents));
    out.loss.fnl = fnl_forward(lb, fnl_cfg);
    if (weights.w_fnl != 0.0) fnl_grad = fnl_backward(lb, fnl_cfg);
  }
  out.loss.total = weights.w_bce * out.loss.bce;
  if (weights.w_fnl != 0.0) out.loss.total += weights.w_fnl * out.loss.fnl;

  const DenseLayer& head = params.layers[n_hidden + 1];
  const DenseLayer& latent_layer = params.layers[n_hidden];
  std::size_t next_positive = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const ForwardTrace& tr = traces[i];
    const bool clamped = std::abs(tr.logit) >= kLogitClamp;
    const double d_logit =
        clamped ? 0.0
                : weights.w_bce * (tr.y_hat - batch[i].label) /
                      static_cast<double>(n);

    const double delta_head[1] = {d_logit};
    Vec d_latent = backprop_layer(head, out.grads.layers[n_hidden + 1],
                                  tr.latent, delta_head);
    if (!fnl_grad.empty() && next_positive < positives.size() &&
        positives[next_positive] == i) {
      const auto g = fnl_grad.row(next_positive);
      for (std::size_t j = 0; j < l; ++j) d_latent[j] += weights.w_fnl * g[j];
      ++next_positive;
    }

    std::span<const double> latent_in =
        tr.hidden[n_hidden - 1];
    Vec d_hidden = backprop_layer(latent_layer, out.grads.layers[n_hidden],
                                  latent_in, d_latent);
    for (std::size_t k = n_hidden; k-- > 0;) {
      for (std::size_t j = 0; j < d_hidden.size(); ++j) {
        d_hidden[j] *= activate_grad(cfg.activation, tr.hidden[k][j]);
      }
      std::span<const double> in =
          k == 0 ? std::span<const double>(batch[i].features)
                 : std::span<const double>(tr.hidden[k - 1]);
      d_hidden = backprop_layer(params.layers[k], out.grads.layers[k], in,
                                d_hidden);
    }
  }
  return out;
}

void OptimConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (!(beta1 > 0.0 && beta1 < 1.0)) throw ConfigError("beta1 must lie in (0, 1)");
  if (!(beta2 > 0.0 && beta2 < 1.0)) throw ConfigError("beta2 must lie in (0, 1)");
  if (!(adam_eps > 0.0)) throw ConfigError("adam_eps must be > 0");
}

AdamState AdamState::ZerosLike(const NetParams& params) {
  return {NetParams::ZerosLike(params), NetParams::ZerosLike(params)};
}

void adam_step(NetParams& params, const NetParams& grads, AdamState& state,
               const OptimConfig& cfg, std::uint64_t t) {
  if (t < 1) throw DomainError("adam_step: t must be >= 1");
  auto p = params.tensors();
  const auto g = grads.tensors();
  auto m = state.m.tensors();
  auto v = state.v.tensors();
  if (g.size() != p.size() || m.size() != p.size() || v.size() != p.size()) {
    throw DimensionError("adam_step: tensor count mismatch");
  }
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (g[k].size() != p[k].size() || m[k].size() != p[k].size() ||
        v[k].size() != p[k].size()) {
      throw DimensionError("adam_step: tensor shape mismatch");
    }
    for (std::size_t i = 0; i < p[k].size(); ++i) {
      const double gi = g[k][i];
      m[k][i] = cfg.beta1 * m[k][i] + (1.0 - cfg.beta1) * gi;
      v[k][i] = cfg.beta2 * v[k][i] + (1.0 - cfg.beta2) * gi * gi;
      const double m_hat = m[k][i] / bc1;
      const double v_hat = v[k][i] / bc2;
      p[k][i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.adam_eps);
    }
  }
}

}  // namespace fnlgen
