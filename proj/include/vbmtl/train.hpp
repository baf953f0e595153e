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

#ifndef VBMTL_TRAIN_HPP_
#define VBMTL_TRAIN_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "vbmtl/data.hpp"
#include "vbmtl/loss.hpp"
#include "vbmtl/metrics.hpp"
#include "vbmtl/model.hpp"

namespace vbmtl {

struct TrainConfig {
  std::uint64_t seed = 42;
  // Index of the repeated run for this seed; the effective seed is
  // DeriveSeed(seed, run_index).
  std::uint64_t run_index = 0;
  std::size_t batch_size = 8;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::size_t max_epochs = 100;
  std::size_t patience = 15;
  // Global gradient-norm clip; 0 disables clipping.
  double grad_clip_norm = 0.0;
  LossConfig loss;
  ModelConfig model;

  void Validate() const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct AdamHyper {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam update of one flat tensor. `step` is the 1-based
// index of this update.
void AdamUpdate(std::span<double> param, std::span<const double> grad,
                std::span<double> m, std::span<double> v, std::uint64_t step,
                const AdamHyper& hyper);

struct AdamState {
  ModelParams m;
  ModelParams v;
  std::uint64_t step = 0;
  static AdamState For(const ModelParams& params);
};

// Applies one Adam step to every tensor. Throws NumericalError naming the
// first tensor with a non-finite gradient; params are left untouched then.
void AdamStep(ModelParams& params, const ModelParams& grads, AdamState& state,
              const AdamHyper& hyper);

struct BatchGradients {
  LossBreakdown loss;
  ModelParams grads;
};

// Forward, combined loss, and backward on one batch.
BatchGradients ComputeBatchGradients(const ModelParams& params,
                                     const ModelConfig& model,
                                     const LossConfig& loss, const Matrix& x,
                                     const BatchTargets& targets);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  LossBreakdown train_loss;  // mean over the epoch's batches
  MetricsBundle val;
  double seconds = 0.0;
};

struct RunHistory {
  std::uint64_t run_seed = 0;
  MetricsBundle initial_val;  // untrained params
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  double best_val_s_mtl = 0.0;

  // Equality of every recorded number except wall-clock times.
  bool SameNumbers(const RunHistory& other) const;
};

struct TrainResult {
  ModelParams best_params;
  RunHistory history;
};

using EpochObserver = std::function<void(const EpochRecord&)>;

// One deterministic training run. The run seed drives initialization and
// minibatch shuffling only. After every epoch the val split is scored and
// the params with the highest val S_MTL are kept (ties: earliest epoch).
// Training stops after `patience` consecutive epochs without improvement
// or at max_epochs.
TrainResult TrainRun(const TrainConfig& config, const SplitDataset& data,
                     const EpochObserver& observer = {});

PredictionSet PredictPartition(const ModelParams& params, const ModelConfig& config,
                               const Partition& split, const AgeScaler& age_scaler);

MetricsBundle Evaluate(const ModelParams& params, const ModelConfig& config,
                       const Partition& split, const AgeScaler& age_scaler);

}  // namespace vbmtl

#endif  // VBMTL_TRAIN_HPP_
