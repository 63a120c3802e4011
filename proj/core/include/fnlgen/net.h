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

// Feedforward classifier with a dual head: a sigmoid class probability and an
// exposed linear latent layer (the latent space mapping). Trained end to end
// on a weighted sum of binary cross-entropy and the Frechet Normal Loss of
// the positive-class latents.

#ifndef FNLGEN_NET_H_
#define FNLGEN_NET_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "fnlgen/fnl.h"
#include "fnlgen/numstat.h"
#include "fnlgen/types.h"

namespace fnlgen {

enum class Activation { kRelu, kTanh };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view name);

struct NetConfig {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden_dims;
  std::size_t latent_dim = 4;
  Activation activation = Activation::kRelu;
  std::uint64_t seed = 0;

  void validate() const;
  friend bool operator==(const NetConfig&, const NetConfig&) = default;
};

// y = W x + b, W is out x in.
struct DenseLayer {
  Matrix weights;
  Vec bias;

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

// Layers in evaluation order: the activated hidden layers, the linear latent
// layer, and the single-unit classification head reading the latent layer.
struct NetParams {
  std::vector<DenseLayer> layers;

  static NetParams ZerosLike(const NetParams& other);

  // Every weight and bias buffer, in a fixed order.
  std::vector<std::span<double>> tensors();
  std::vector<std::span<const double>> tensors() const;
  std::size_t parameter_count() const;

  // Throws ShapeError unless `config` describes exactly these layer shapes.
  void check_shapes(const NetConfig& config) const;

  friend bool operator==(const NetParams&, const NetParams&) = default;
};

struct ForwardTrace {
  std::vector<Vec> hidden;  // activated outputs of each hidden layer
  Vec latent;
  double logit = 0.0;       // after clamping
  double y_hat = 0.5;
};

inline constexpr double kLogitClamp = 30.0;

class Network {
 public:
  Network() = default;
  // Glorot-uniform weights seeded from config.seed, zero biases.
  explicit Network(NetConfig config);
  Network(NetConfig config, NetParams params);

  const NetConfig& config() const { return config_; }
  const NetParams& params() const { return params_; }
  NetParams& params() { return params_; }

  ForwardTrace forward(std::span<const double> x) const;

  // Evaluates only the classification head on a latent vector.
  double head_probability(std::span<const double> latent) const;

 private:
  NetConfig config_;
  NetParams params_;
};

// Binary cross-entropy; y_hat is clamped to [1e-12, 1 - 1e-12].
double bce_loss(double y_hat, int y);

struct LossWeights {
  double w_bce = 0.9;
  double w_fnl = 0.1;

  void validate() const;
  friend bool operator==(const LossWeights&, const LossWeights&) = default;
};

struct LossBreakdown {
  double total = 0.0;
  double bce = 0.0;  // mean BCE over the batch
  double fnl = 0.0;  // FNL of the positive latents, 0 when there are none
  std::size_t n_positive = 0;
};

struct LossAndGrads {
  LossBreakdown loss;
  NetParams grads;
};

// total = w_bce * mean(BCE) + w_fnl * FNL(latents of positive items).
LossAndGrads combined_loss_and_grads(const Network& net,
                                     std::span<const LabeledSample> batch,
                                     const LossWeights& weights,
                                     const FnlConfig& fnl_cfg);

struct OptimConfig {
  double learning_rate = 5e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;

  void validate() const;
  friend bool operator==(const OptimConfig&, const OptimConfig&) = default;
};

struct AdamState {
  NetParams m;
  NetParams v;

  static AdamState ZerosLike(const NetParams& params);
};

// One bias-corrected Adam update at step t >= 1, in place.
void adam_step(NetParams& params, const NetParams& grads, AdamState& state,
               const OptimConfig& cfg, std::uint64_t t);

}  // namespace fnlgen

#endif  // FNLGEN_NET_H_
