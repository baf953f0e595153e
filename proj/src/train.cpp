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

#include "vbmtl/train.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "vbmtl/error.hpp"
#include "vbmtl/rng.hpp"

namespace vbmtl {

void TrainConfig::Validate() const {
  model.Validate();
  if (batch_size == 0) throw ConfigError("train: batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("train: learning_rate must be positive");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0))
    throw ConfigError("train: adam betas must lie in [0, 1)");
  if (!(adam_eps > 0.0)) throw ConfigError("train: adam_eps must be positive");
  if (max_epochs == 0) throw ConfigError("train: max_epochs must be >= 1");
  if (patience > max_epochs) throw ConfigError("train: patience must not exceed max_epochs");
  if (grad_clip_norm < 0.0) throw ConfigError("train: grad_clip_norm must be >= 0");
  for (double a : {loss.alpha_emotion, loss.alpha_country, loss.alpha_age})
    if (!std::isfinite(a)) throw ConfigError("train: loss alphas must be finite");
}

void AdamUpdate(std::span<double> param, std::span<const double> grad,
                std::span<double> m, std::span<double> v, std::uint64_t step,
                const AdamHyper& hyper) {
  const double t = static_cast<double>(step);
  const double correction1 = 1.0 - std::pow(hyper.beta1, t);
  const double correction2 = 1.0 - std::pow(hyper.beta2, t);
  for (std::size_t i = 0; i < param.size(); ++i) {
    m[i] = hyper.beta1 * m[i] + (1.0 - hyper.beta1) * grad[i];
    v[i] = hyper.beta2 * v[i] + (1.0 - hyper.beta2) * grad[i] * grad[i];
    const double m_hat = m[i] / correction1;
    const double v_hat = v[i] / correction2;
    param[i] -= hyper.learning_rate * m_hat / (std::sqrt(v_hat) + hyper.eps);
  }
}

AdamState AdamState::For(const ModelParams& params) {
  return {params.ZerosLike(), params.ZerosLike(), 0};
}

void AdamStep(ModelParams& params, const ModelParams& grads, AdamState& state,
              const AdamHyper& hyper) {
  grads.ForEach([](const std::string& name, const Matrix& g) {
    if (!g.AllFinite()) throw NumericalError("adam: non-finite gradient in " + name);
  });
  const std::uint64_t step = ++state.step;
  std::vector<std::span<const double>> g;
  std::vector<std::span<double>> m, v;
  grads.ForEach([&g](const std::string&, const Matrix& t) { g.push_back(t.values()); });
  state.m.ForEach([&m](const std::string&, Matrix& t) { m.push_back(t.values()); });
  state.v.ForEach([&v](const std::string&, Matrix& t) { v.push_back(t.values()); });
  std::size_t i = 0;
  params.ForEach([&](const std::string& name, Matrix& p) {
    if (i >= g.size() || g[i].size() != p.size())
      throw ShapeError("adam: gradient layout does not match params at " + name);
    AdamUpdate(p.values(), g[i], m[i], v[i], step, hyper);
    ++i;
  });
}

BatchGradients ComputeBatchGradients(const ModelParams& params,
                                     const ModelConfig& model,
                                     const LossConfig& loss, const Matrix& x,
                                     const BatchTargets& targets) {
  auto [outputs, cache] = Forward(params, model, x);
  auto combined = ComputeMultiTaskLoss(outputs, targets, loss);
  return {combined.breakdown, Backward(params, model, cache, combined.grads)};
}

bool RunHistory::SameNumbers(const RunHistory& other) const {
  if (run_seed != other.run_seed || !(initial_val == other.initial_val) ||
      best_epoch != other.best_epoch || best_val_s_mtl != other.best_val_s_mtl ||
      epochs.size() != other.epochs.size())
    return false;
  for (std::size_t i = 0; i < epochs.size(); ++i) {
    const auto& a = epochs[i];
    const auto& b = other.epochs[i];
    if (a.epoch != b.epoch || !(a.train_loss == b.train_loss) || !(a.val == b.val))
      return false;
  }
  return true;
}

namespace {

void ClipGlobalNorm(ModelParams& grads, double max_norm) {
  double sq = 0.0;
  grads.ForEach([&sq](const std::string&, const Matrix& g) {
    for (double v : g.values()) sq += v * v;
  });
  const double norm = std::sqrt(sq);
  if (norm <= max_norm) return;
  const double s = max_norm / norm;
  grads.ForEach([s](const std::string&, Matrix& g) { g *= s; });
}

}  // namespace

TrainResult TrainRun(const TrainConfig& config, const SplitDataset& data,
                     const EpochObserver& observer) {
  config.Validate();
  if (!data.train.labeled || !data.val.labeled)
    throw DataError("training needs labeled train and val splits");
  if (data.train.size() == 0 || data.val.size() == 0)
    throw DataError("training needs non-empty train and val splits");
  if (data.train.features.cols() != config.model.input_dim)
    throw ConfigError("model input_dim " + std::to_string(config.model.input_dim) +
                      " does not match feature dim " +
                      std::to_string(data.train.features.cols()));

  const std::uint64_t run_seed = DeriveSeed(config.seed, config.run_index);
  RngStream init_rng(DeriveSeed(run_seed, 0));
  RngStream shuffle_rng(DeriveSeed(run_seed, 1));

  TrainResult result;
  ModelParams params = InitParams(config.model, init_rng);
  AdamState adam = AdamState::For(params);
  const AdamHyper hyper{config.learning_rate, config.adam_beta1, config.adam_beta2,
                        config.adam_eps};

  RunHistory& history = result.history;
  history.run_seed = run_seed;
  history.initial_val = Evaluate(params, config.model, data.val, data.age_scaler);
  result.best_params = params;
  double best = -std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    const auto batches = Batches(data.train.size(), config.batch_size, shuffle_rng);
    EpochRecord record;
    record.epoch = epoch;
    for (std::size_t b = 0; b < batches.size(); ++b) {
      const Matrix x = data.train.features.GatherRows(batches[b]);
      const BatchTargets targets = data.train.Targets(batches[b], data.age_scaler);
      auto step = ComputeBatchGradients(params, config.model, config.loss, x, targets);
      if (!std::isfinite(step.loss.total))
        throw NumericalError("non-finite loss at epoch " + std::to_string(epoch) +
                             ", batch " + std::to_string(b + 1));
      if (config.grad_clip_norm > 0.0) ClipGlobalNorm(step.grads, config.grad_clip_norm);
      AdamStep(params, step.grads, adam, hyper);
      record.train_loss.emotion += step.loss.emotion;
      record.train_loss.country += step.loss.country;
      record.train_loss.age += step.loss.age;
      record.train_loss.total += step.loss.total;
    }
    const double inv = 1.0 / static_cast<double>(batches.size());
    record.train_loss.emotion *= inv;
    record.train_loss.country *= inv;
    record.train_loss.age *= inv;
    record.train_loss.total *= inv;

    record.val = Evaluate(params, config.model, data.val, data.age_scaler);
    record.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    history.epochs.push_back(record);
    if (observer) observer(record);

    if (record.val.s_mtl > best) {
      best = record.val.s_mtl;
      history.best_epoch = epoch;
      history.best_val_s_mtl = best;
      result.best_params = params;
      since_best = 0;
    } else {
      ++since_best;
    }
    if (since_best >= config.patience) break;
  }
  return result;
}

PredictionSet PredictPartition(const ModelParams& params, const ModelConfig& config,
                               const Partition& split, const AgeScaler& age_scaler) {
  return Predict(params, config, split.features, age_scaler);
}

MetricsBundle Evaluate(const ModelParams& params, const ModelConfig& config,
                       const Partition& split, const AgeScaler& age_scaler) {
  if (!split.labeled) throw DataError("evaluate: split has no labels");
  const auto p = PredictPartition(params, config, split, age_scaler);
  return ComputeMetrics(p.emotion, split.emotion, p.age_years, split.age_years,
                        p.country, split.country,
                        static_cast<int>(config.country_out));
}

}  // namespace vbmtl
