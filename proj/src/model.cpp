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

#include "vbmtl/model.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>
#include <sstream>

#include "vbmtl/error.hpp"

namespace vbmtl {

void ModelConfig::Validate() const {
  auto positive = [](std::size_t v, const char* what) {
    if (v == 0) throw ConfigError(std::string("model: ") + what + " must be >= 1");
  };
  positive(input_dim, "input_dim");
  if (shared_dims.empty()) throw ConfigError("model: shared_dims is empty");
  for (auto d : shared_dims) positive(d, "shared width");
  if (age_head_dims.empty()) throw ConfigError("model: age_head_dims is empty");
  for (auto d : age_head_dims) positive(d, "age head width");
  positive(emotion_hidden, "emotion_hidden");
  positive(country_hidden, "country_hidden");
  positive(emotion_out, "emotion_out");
  positive(country_out, "country_out");
  if (!(leaky_slope > 0.0 && leaky_slope < 1.0))
    throw ConfigError("model: leaky_slope must lie in (0, 1)");
  if (!(ln_eps > 0.0)) throw ConfigError("model: ln_eps must be positive");
}

std::vector<std::size_t> ModelConfig::AgeHiddenDims() const {
  if (head_variant == HeadVariant::kOneHiddenAll) return {age_head_dims.front()};
  return age_head_dims;
}

const char* ToString(HeadVariant v) {
  return v == HeadVariant::kTwoLayerAge ? "two-layer-age" : "one-hidden-all";
}

const char* ToString(EmotionActivation a) {
  return a == EmotionActivation::kSigmoid ? "sigmoid" : "linear";
}

HeadVariant ParseHeadVariant(const std::string& s) {
  if (s == "two-layer-age") return HeadVariant::kTwoLayerAge;
  if (s == "one-hidden-all") return HeadVariant::kOneHiddenAll;
  throw ConfigError("unknown head_variant '" + s + "'");
}

EmotionActivation ParseEmotionActivation(const std::string& s) {
  if (s == "sigmoid") return EmotionActivation::kSigmoid;
  if (s == "linear") return EmotionActivation::kLinear;
  throw ConfigError("unknown emotion_activation '" + s + "'");
}

std::size_t ModelParams::ParameterCount() const {
  std::size_t n = 0;
  ForEach([&n](const std::string&, const Matrix& m) { n += m.size(); });
  return n;
}

ModelParams ModelParams::ZerosLike() const {
  ModelParams z = *this;
  z.ForEach([](const std::string&, Matrix& m) { m.Fill(0.0); });
  return z;
}

std::vector<double> ModelParams::Flatten() const {
  std::vector<double> flat;
  flat.reserve(ParameterCount());
  ForEach([&flat](const std::string&, const Matrix& m) {
    flat.insert(flat.end(), m.values().begin(), m.values().end());
  });
  return flat;
}

void ModelParams::Unflatten(std::span<const double> flat) {
  if (flat.size() != ParameterCount())
    throw ShapeError("unflatten: expected " + std::to_string(ParameterCount()) +
                     " values, got " + std::to_string(flat.size()));
  std::size_t offset = 0;
  ForEach([&](const std::string&, Matrix& m) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(offset), m.size(),
                m.values().begin());
    offset += m.size();
  });
}

namespace {

HiddenLayer MakeHidden(std::size_t d_in, std::size_t d_out, bool normalized) {
  HiddenLayer layer{Matrix(d_in, d_out), Matrix(1, d_out), {}, {}};
  if (normalized) {
    layer.gamma = Matrix(1, d_out, 1.0);
    layer.beta = Matrix(1, d_out, 0.0);
  }
  return layer;
}

Head MakeHead(std::size_t d_in, const std::vector<std::size_t>& widths,
              std::size_t d_out, bool normalized) {
  Head head;
  for (auto w : widths) {
    head.hidden.push_back(MakeHidden(d_in, w, normalized));
    d_in = w;
  }
  head.output = {Matrix(d_in, d_out), Matrix(1, d_out)};
  return head;
}

struct HiddenResult {
  Matrix output;
  HiddenCache cache;
};

HiddenResult HiddenForward(const HiddenLayer& layer, const ModelConfig& config,
                           const Matrix& x) {
  auto lin = LinearForward(x, layer.weight, layer.bias);
  HiddenCache cache{std::move(lin.cache), std::nullopt, {}};
  Matrix pre = std::move(lin.output);
  if (layer.normalized()) {
    auto ln = LayerNormForward(pre, layer.gamma, layer.beta, config.ln_eps);
    cache.norm = std::move(ln.cache);
    pre = std::move(ln.output);
  }
  auto act = LeakyRelu(pre, config.leaky_slope);
  cache.activation = std::move(act.cache);
  return {std::move(act.output), std::move(cache)};
}

// Returns d_input; writes parameter gradients into `grads`.
Matrix HiddenBackward(const HiddenLayer& layer, const HiddenCache& cache,
                      const Matrix& d_output, HiddenLayer& grads) {
  Matrix d = LeakyReluBackward(cache.activation, d_output);
  if (layer.normalized()) {
    auto g = LayerNormBackward(*cache.norm, layer.gamma, d);
    grads.gamma = std::move(g.d_gamma);
    grads.beta = std::move(g.d_beta);
    d = std::move(g.d_input);
  }
  auto g = LinearBackward(cache.linear, layer.weight, d);
  grads.weight = std::move(g.d_weight);
  grads.bias = std::move(g.d_bias);
  return std::move(g.d_input);
}

std::pair<Matrix, HeadCache> HeadForward(const Head& head,
                                         const ModelConfig& config,
                                         const Matrix& x) {
  HeadCache cache;
  Matrix h = x;
  for (const auto& layer : head.hidden) {
    auto r = HiddenForward(layer, config, h);
    cache.hidden.push_back(std::move(r.cache));
    h = std::move(r.output);
  }
  auto out = LinearForward(h, head.output.weight, head.output.bias);
  cache.output = std::move(out.cache);
  return {std::move(out.output), std::move(cache)};
}

Matrix HeadBackward(const Head& head, const HeadCache& cache,
                    const Matrix& d_output, Head& grads) {
  auto g = LinearBackward(cache.output, head.output.weight, d_output);
  grads.output.weight = std::move(g.d_weight);
  grads.output.bias = std::move(g.d_bias);
  Matrix d = std::move(g.d_input);
  for (std::size_t i = head.hidden.size(); i-- > 0;)
    d = HiddenBackward(head.hidden[i], cache.hidden[i], d, grads.hidden[i]);
  return d;
}

void RequireRows(const Matrix& m, std::size_t rows, std::size_t cols,
                 const char* what) {
  if (m.rows() != rows || m.cols() != cols) {
    std::ostringstream os;
    os << "backward: " << what << " gradient is " << m.ShapeString()
       << ", expected " << rows << "x" << cols;
    throw ShapeError(os.str());
  }
}

}  // namespace

ModelParams InitParams(const ModelConfig& config, RngStream& rng) {
  config.Validate();
  ModelParams params;
  std::size_t d_in = config.input_dim;
  for (auto w : config.shared_dims) {
    params.shared.push_back(MakeHidden(d_in, w, true));
    d_in = w;
  }
  params.emotion = MakeHead(d_in, {config.emotion_hidden}, config.emotion_out,
                            config.head_layer_norm);
  params.country = MakeHead(d_in, {config.country_hidden}, config.country_out,
                            config.head_layer_norm);
  params.age = MakeHead(d_in, config.AgeHiddenDims(), 1, config.head_layer_norm);

  params.ForEach([&rng](const std::string& name, Matrix& m) {
    if (!name.ends_with("weight")) return;
    const double s = std::sqrt(1.0 / static_cast<double>(m.rows()));
    for (double& v : m.values()) v = rng.Uniform(-s, s);
  });
  return params;
}

std::pair<ModelOutputs, ForwardCache> Forward(const ModelParams& params,
                                              const ModelConfig& config,
                                              const Matrix& x) {
  if (x.cols() != config.input_dim) {
    throw ShapeError("forward: input has " + std::to_string(x.cols()) +
                     " features, model expects " +
                     std::to_string(config.input_dim));
  }
  ForwardCache cache;
  cache.batch_size = x.rows();
  Matrix h = x;
  for (const auto& layer : params.shared) {
    auto r = HiddenForward(layer, config, h);
    cache.shared.push_back(std::move(r.cache));
    h = std::move(r.output);
  }

  ModelOutputs out;
  std::tie(out.emotion, cache.emotion) = HeadForward(params.emotion, config, h);
  if (config.emotion_activation == EmotionActivation::kSigmoid) {
    out.emotion = Sigmoid(out.emotion);
    cache.emotion_output = out.emotion;
  }
  std::tie(out.country_logits, cache.country) = HeadForward(params.country, config, h);
  std::tie(out.age_scaled, cache.age) = HeadForward(params.age, config, h);
  return {std::move(out), std::move(cache)};
}

ModelParams Backward(const ModelParams& params, const ModelConfig& config,
                     const ForwardCache& cache, const OutputGrads& d_outputs) {
  const std::size_t n = cache.batch_size;
  RequireRows(d_outputs.emotion, n, config.emotion_out, "emotion");
  RequireRows(d_outputs.country_logits, n, config.country_out, "country");
  RequireRows(d_outputs.age_scaled, n, 1, "age");

  ModelParams grads = params;
  Matrix d_emotion = d_outputs.emotion;
  if (config.emotion_activation == EmotionActivation::kSigmoid)
    d_emotion = SigmoidBackward(cache.emotion_output, d_emotion);

  Matrix d_shared = HeadBackward(params.emotion, cache.emotion, d_emotion, grads.emotion);
  d_shared += HeadBackward(params.country, cache.country, d_outputs.country_logits,
                           grads.country);
  d_shared += HeadBackward(params.age, cache.age, d_outputs.age_scaled, grads.age);

  for (std::size_t i = params.shared.size(); i-- > 0;)
    d_shared = HiddenBackward(params.shared[i], cache.shared[i], d_shared,
                              grads.shared[i]);
  return grads;
}

int ArgMax(std::span<const double> values) {
  int best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  return best;
}

PredictionSet Predict(const ModelParams& params, const ModelConfig& config,
                      const Matrix& x, const AgeScaler& age_scaler) {
  auto [out, cache] = Forward(params, config, x);
  PredictionSet p;
  p.emotion = std::move(out.emotion);
  p.age_years.reserve(x.rows());
  p.country.reserve(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    p.age_years.push_back(age_scaler.Unscale(out.age_scaled(i, 0)));
    p.country.push_back(ArgMax(out.country_logits.row(i)));
  }
  return p;
}

}  // namespace vbmtl
