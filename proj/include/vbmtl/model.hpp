/*
 * Copyright 2026 The vbmtl Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef VBMTL_MODEL_HPP_
#define VBMTL_MODEL_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vbmtl/layers.hpp"
#include "vbmtl/matrix.hpp"
#include "vbmtl/rng.hpp"

namespace vbmtl {

inline constexpr std::size_t kNumEmotions = 10;
inline constexpr std::size_t kNumCountries = 4;

enum class HeadVariant {
  kTwoLayerAge,   // age head 64 -> 32 -> 16 -> 1
  kOneHiddenAll,  // every head has one hidden layer; age head 64 -> 32 -> 1
};

enum class EmotionActivation { kSigmoid, kLinear };

struct ModelConfig {
  std::size_t input_dim = 1024;
  std::vector<std::size_t> shared_dims{128, 64};
  std::vector<std::size_t> age_head_dims{32, 16};
  std::size_t emotion_hidden = 32;
  std::size_t country_hidden = 32;
  std::size_t emotion_out = kNumEmotions;
  std::size_t country_out = kNumCountries;
  double leaky_slope = 0.01;
  double ln_eps = 1e-5;
  // Head hidden layers use linear -> layer norm -> LeakyReLU like the trunk.
  // When false they are linear -> LeakyReLU.
  bool head_layer_norm = true;
  HeadVariant head_variant = HeadVariant::kTwoLayerAge;
  EmotionActivation emotion_activation = EmotionActivation::kSigmoid;

  // Throws ConfigError on zero widths or out-of-range hyperparameters.
  void Validate() const;
  // Age-head hidden widths after applying head_variant.
  std::vector<std::size_t> AgeHiddenDims() const;
  std::size_t SharedOutputDim() const { return shared_dims.back(); }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

const char* ToString(HeadVariant v);
const char* ToString(EmotionActivation a);
HeadVariant ParseHeadVariant(const std::string& s);
EmotionActivation ParseEmotionActivation(const std::string& s);

// Linear map followed by optional layer norm and LeakyReLU.
struct HiddenLayer {
  Matrix weight;  // d_in x d_out
  Matrix bias;    // 1 x d_out
  Matrix gamma;   // 1 x d_out, empty when the layer has no normalization
  Matrix beta;
  bool normalized() const { return !gamma.empty(); }
  friend bool operator==(const HiddenLayer&, const HiddenLayer&) = default;
};

struct OutputLayer {
  Matrix weight;
  Matrix bias;
  friend bool operator==(const OutputLayer&, const OutputLayer&) = default;
};

struct Head {
  std::vector<HiddenLayer> hidden;
  OutputLayer output;
  friend bool operator==(const Head&, const Head&) = default;
};

// All trainable tensors. Gradients and optimizer moments reuse this type.
struct ModelParams {
  std::vector<HiddenLayer> shared;
  Head emotion;
  Head country;
  Head age;

  // Visits every tensor in canonical order with its dotted name, e.g.
  // "shared.0.weight", "age.hidden.1.gamma", "country.output.bias".
  template <typename Fn>
  void ForEach(Fn&& fn) {
    ForEachImpl(*this, fn);
  }
  template <typename Fn>
  void ForEach(Fn&& fn) const {
    ForEachImpl(*this, fn);
  }

  std::size_t ParameterCount() const;
  ModelParams ZerosLike() const;
  std::vector<double> Flatten() const;
  void Unflatten(std::span<const double> flat);

  friend bool operator==(const ModelParams&, const ModelParams&) = default;

 private:
  template <typename Self, typename Fn>
  static void ForEachImpl(Self& self, Fn& fn) {
    auto hidden = [&fn](const std::string& prefix, auto& layers) {
      for (std::size_t i = 0; i < layers.size(); ++i) {
        const std::string p = prefix + std::to_string(i) + ".";
        fn(p + "weight", layers[i].weight);
        fn(p + "bias", layers[i].bias);
        if (layers[i].normalized()) {
          fn(p + "gamma", layers[i].gamma);
          fn(p + "beta", layers[i].beta);
        }
      }
    };
    auto head = [&](const std::string& name, auto& h) {
      hidden(name + ".hidden.", h.hidden);
      fn(name + ".output.weight", h.output.weight);
      fn(name + ".output.bias", h.output.bias);
    };
    hidden("shared.", self.shared);
    head("emotion", self.emotion);
    head("country", self.country);
    head("age", self.age);
  }
};

struct ModelOutputs {
  Matrix emotion;         // n x 10
  Matrix age_scaled;      // n x 1, standardized age
  Matrix country_logits;  // n x 4
};

// Gradients of a scalar loss with respect to each ModelOutputs field.
struct OutputGrads {
  Matrix emotion;
  Matrix age_scaled;
  Matrix country_logits;
};

struct HiddenCache {
  LinearCache linear;
  std::optional<LayerNormCache> norm;
  LeakyReluCache activation;
};

struct HeadCache {
  std::vector<HiddenCache> hidden;
  LinearCache output;
};

struct ForwardCache {
  std::vector<HiddenCache> shared;
  HeadCache emotion;
  HeadCache country;
  HeadCache age;
  Matrix emotion_output;  // post-activation emotion, for the sigmoid backward
  std::size_t batch_size = 0;
};

// Weights ~ U(-s, s) with s = sqrt(1 / fan_in); biases 0; gamma 1; beta 0.
ModelParams InitParams(const ModelConfig& config, RngStream& rng);

std::pair<ModelOutputs, ForwardCache> Forward(const ModelParams& params,
                                              const ModelConfig& config,
                                              const Matrix& x);

// Gradients for every tensor. The shared trunk receives the sum of the
// three heads' input gradients.
ModelParams Backward(const ModelParams& params, const ModelConfig& config,
                     const ForwardCache& cache, const OutputGrads& d_outputs);

struct AgeScaler {
  double mean = 0.0;
  double std = 1.0;
  double Scale(double years) const { return (years - mean) / std; }
  double Unscale(double scaled) const { return scaled * std + mean; }
  friend bool operator==(const AgeScaler&, const AgeScaler&) = default;
};

struct PredictionSet {
  Matrix emotion;                 // n x 10
  std::vector<double> age_years;  // de-standardized
  std::vector<int> country;       // argmax of logits, ties to lowest index
};

// Index of the largest entry; the first one wins ties.
int ArgMax(std::span<const double> values);

PredictionSet Predict(const ModelParams& params, const ModelConfig& config,
                      const Matrix& x, const AgeScaler& age_scaler);

}  // namespace vbmtl

#endif  // VBMTL_MODEL_HPP_
