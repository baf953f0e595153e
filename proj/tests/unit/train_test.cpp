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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "oracles.hpp"
#include "ridge_oracle.hpp"
#include "vbmtl/checkpoint.hpp"
#include "vbmtl/error.hpp"
#include "vbmtl/synth.hpp"
#include "vbmtl/train.hpp"

namespace vbmtl {
namespace {

using testing::RandomMatrix;

SynthSpec SmallSynth(std::size_t n_train = 200, std::size_t n_val = 80, std::size_t dim = 16) {
  SynthSpec s;
  s.n_train = n_train;
  s.n_val = n_val;
  s.dim = dim;
  s.rank = 4;
  s.seed = 5;
  return s;
}

TrainConfig ConfigFor(const SplitDataset& ds, std::size_t max_epochs) {
  TrainConfig cfg;
  cfg.model.input_dim = ds.train.features.cols();
  cfg.max_epochs = max_epochs;
  cfg.patience = max_epochs;
  return cfg;
}

// ---------------------------------------------------------------- adam

TEST(Adam, ZeroGradLeavesParamsAndCountsStep) {
  ModelConfig mc;
  mc.input_dim = 4;
  RngStream rng(1);
  auto params = InitParams(mc, rng);
  const auto before = params;
  auto state = AdamState::For(params);
  AdamStep(params, params.ZerosLike(), state, AdamHyper{});
  EXPECT_EQ(params, before);
  EXPECT_EQ(state.step, 1u);
}

TEST(Adam, ConvergesOnScalarQuadratic) {
  std::vector<double> w{0.0}, m{0.0}, v{0.0};
  AdamHyper hyper;
  hyper.learning_rate = 0.01;
  std::uint64_t steps = 0;
  for (std::uint64_t t = 1; t <= 2000; ++t) {
    const std::vector<double> g{2.0 * (w[0] - 3.0)};
    AdamUpdate(w, g, m, v, t, hyper);
    steps = t;
    if (std::abs(w[0] - 3.0) < 1e-3) break;
  }
  EXPECT_LT(std::abs(w[0] - 3.0), 1e-3);
  EXPECT_LE(steps, 2000u);
}

TEST(Adam, FirstStepMagnitudeIsLearningRate) {
  AdamHyper hyper;
  hyper.learning_rate = 1e-3;
  for (double scale : {1e-3, 1.0, 1e3}) {
    std::vector<double> w{1.0, -2.0}, m{0, 0}, v{0, 0};
    const std::vector<double> g{scale, -0.5 * scale};
    AdamUpdate(w, g, m, v, 1, hyper);
    EXPECT_NEAR(w[0] - 1.0, -1e-3, 1e-7) << scale;
    EXPECT_NEAR(w[1] + 2.0, 1e-3, 1e-7) << scale;
  }
}

TEST(Adam, NonFiniteGradientNamesTensorAndLeavesParams) {
  ModelConfig mc;
  mc.input_dim = 4;
  RngStream rng(2);
  auto params = InitParams(mc, rng);
  const auto before = params;
  auto grads = params.ZerosLike();
  grads.country.output.bias(0, 2) = std::numeric_limits<double>::quiet_NaN();
  auto state = AdamState::For(params);
  try {
    AdamStep(params, grads, state, AdamHyper{});
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("country.output.bias"), std::string::npos) << e.what();
  }
  EXPECT_EQ(params, before);
}

// ---------------------------------------------------------------- config

TEST(TrainConfig, ValidationRejectsBadValues) {
  TrainConfig cfg;
  EXPECT_NO_THROW(cfg.Validate());
  cfg.batch_size = 0;
  EXPECT_THROW(cfg.Validate(), ConfigError);
  cfg = TrainConfig{};
  cfg.learning_rate = 0;
  EXPECT_THROW(cfg.Validate(), ConfigError);
  cfg = TrainConfig{};
  cfg.patience = cfg.max_epochs + 1;
  EXPECT_THROW(cfg.Validate(), ConfigError);
  cfg = TrainConfig{};
  cfg.loss.alpha_age = std::numeric_limits<double>::infinity();
  EXPECT_THROW(cfg.Validate(), ConfigError);
}

TEST(TrainRun, InputDimMismatchIsConfigError) {
  const auto ds = SynthDataset(SmallSynth());
  auto cfg = ConfigFor(ds, 1);
  cfg.model.input_dim = 17;
  EXPECT_THROW(TrainRun(cfg, ds), ConfigError);
}

// ---------------------------------------------------------------- gradients

TEST(BatchGradients, TinyGradientStepDecreasesLoss) {
  const auto ds = SynthDataset(SmallSynth());
  const auto cfg = ConfigFor(ds, 1);
  RngStream rng(3);
  auto params = InitParams(cfg.model, rng);
  std::vector<std::size_t> rows(16);
  std::iota(rows.begin(), rows.end(), 0);
  const Matrix x = ds.train.features.GatherRows(rows);
  const auto targets = ds.train.Targets(rows, ds.age_scaler);
  const auto before = ComputeBatchGradients(params, cfg.model, cfg.loss, x, targets);
  auto flat = params.Flatten();
  const auto g = before.grads.Flatten();
  for (std::size_t i = 0; i < flat.size(); ++i) flat[i] -= 1e-6 * g[i];
  params.Unflatten(flat);
  const auto after = ComputeBatchGradients(params, cfg.model, cfg.loss, x, targets);
  EXPECT_LT(after.loss.total, before.loss.total);
}

// Task contribution to the shared-trunk gradient, isolated by sending the
// task's weight to zero (alpha -> large).
std::vector<double> SharedGrad(const ModelParams& params, const ModelConfig& mc,
                               const LossConfig& loss, const Matrix& x,
                               const BatchTargets& t) {
  const auto g = ComputeBatchGradients(params, mc, loss, x, t).grads;
  std::vector<double> out;
  for (const auto& layer : g.shared)
    for (const Matrix* m : {&layer.weight, &layer.bias, &layer.gamma, &layer.beta})
      out.insert(out.end(), m->values().begin(), m->values().end());
  return out;
}

TEST(BatchGradients, DoublingExpAlphaHalvesTaskContribution) {
  const auto ds = SynthDataset(SmallSynth());
  const auto cfg = ConfigFor(ds, 1);
  RngStream rng(4);
  const auto params = InitParams(cfg.model, rng);
  std::vector<std::size_t> rows(12);
  std::iota(rows.begin(), rows.end(), 20);
  const Matrix x = ds.train.features.GatherRows(rows);
  const auto t = ds.train.Targets(rows, ds.age_scaler);

  for (int task = 0; task < 3; ++task) {
    auto with_alpha = [&](double a) {
      LossConfig l;
      (task == 0 ? l.alpha_emotion : task == 1 ? l.alpha_country : l.alpha_age) = a;
      return l;
    };
    const double alpha = task == 0 ? 0.34 : 0.33;
    const auto off = SharedGrad(params, cfg.model, with_alpha(1000.0), x, t);
    const auto base = SharedGrad(params, cfg.model, with_alpha(alpha), x, t);
    const auto doubled = SharedGrad(params, cfg.model, with_alpha(alpha + std::log(2.0)), x, t);
    double scale = 0.0, worst = 0.0;
    for (std::size_t i = 0; i < base.size(); ++i) {
      const double c1 = base[i] - off[i], c2 = doubled[i] - off[i];
      scale = std::max(scale, std::abs(c1));
      worst = std::max(worst, std::abs(c2 - 0.5 * c1));
    }
    ASSERT_GT(scale, 0.0);
    EXPECT_LE(worst, 1e-10 * scale) << "task " << task;
  }
}

// ---------------------------------------------------------------- train run

TEST(TrainRun, DeterministicHistoryAndParams) {
  const auto ds = SynthDataset(SmallSynth());
  const auto cfg = ConfigFor(ds, 4);
  const auto a = TrainRun(cfg, ds);
  const auto b = TrainRun(cfg, ds);
  EXPECT_TRUE(a.history.SameNumbers(b.history));
  EXPECT_EQ(a.best_params, b.best_params);
}

TEST(TrainRun, RunIndexChangesTheRun) {
  const auto ds = SynthDataset(SmallSynth());
  auto cfg = ConfigFor(ds, 1);
  const auto a = TrainRun(cfg, ds);
  cfg.run_index = 1;
  const auto b = TrainRun(cfg, ds);
  EXPECT_NE(a.history.run_seed, b.history.run_seed);
  EXPECT_NE(a.best_params, b.best_params);
}

TEST(TrainRun, PatienceZeroRunsOneEpoch) {
  const auto ds = SynthDataset(SmallSynth());
  auto cfg = ConfigFor(ds, 10);
  cfg.patience = 0;
  const auto r = TrainRun(cfg, ds);
  EXPECT_EQ(r.history.epochs.size(), 1u);
  EXPECT_EQ(r.history.best_epoch, 1u);
}

TEST(TrainRun, BestEpochHasMaximumValidationScore) {
  const auto ds = SynthDataset(SmallSynth());
  auto cfg = ConfigFor(ds, 8);
  cfg.patience = 2;
  std::size_t observed = 0;
  const auto r = TrainRun(cfg, ds, [&observed](const EpochRecord&) { ++observed; });
  EXPECT_EQ(observed, r.history.epochs.size());
  double best = -1;
  std::size_t best_epoch = 0;
  for (const auto& e : r.history.epochs)
    if (e.val.s_mtl > best) {
      best = e.val.s_mtl;
      best_epoch = e.epoch;
    }
  EXPECT_EQ(r.history.best_epoch, best_epoch);
  EXPECT_EQ(r.history.best_val_s_mtl, best);
  if (r.history.epochs.size() < cfg.max_epochs)
    EXPECT_EQ(r.history.epochs.size(), best_epoch + cfg.patience);
}

TEST(TrainRun, LearnsSyntheticTasks) {
  const auto ds = SynthDataset(SmallSynth(600, 200, 32));
  auto cfg = ConfigFor(ds, 30);
  cfg.patience = 10;
  const auto r = TrainRun(cfg, ds);
  EXPECT_GT(r.history.best_val_s_mtl, r.history.initial_val.s_mtl);
  EXPECT_GT(r.history.best_val_s_mtl, 0.5);
}

TEST(TrainRun, TrainLossDecreasesForEveryBatchSize) {
  const auto ds = SynthDataset(SmallSynth(160, 60, 16));
  for (std::size_t bs : {2, 4, 8, 16, 32}) {
    auto cfg = ConfigFor(ds, 10);
    cfg.batch_size = bs;
    const auto r = TrainRun(cfg, ds);
    ASSERT_EQ(r.history.epochs.size(), 10u);
    std::vector<double> last;
    for (std::size_t e = 5; e < 10; ++e) last.push_back(r.history.epochs[e].train_loss.total);
    std::nth_element(last.begin(), last.begin() + 2, last.end());
    EXPECT_LT(last[2], r.history.epochs.front().train_loss.total) << "batch " << bs;
  }
}

TEST(TrainRun, ReloadedCheckpointReproducesBestScore) {
  auto ds = Standardize(SynthDataset(SmallSynth()), Standardization::kZScore);
  const auto cfg = ConfigFor(ds, 6);
  const auto r = TrainRun(cfg, ds);
  Checkpoint ckpt{cfg.model, ds.age_scaler, ds.standardizer, r.best_params};
  const auto back = DeserializeCheckpoint(SerializeCheckpoint(ckpt), "memory");
  const auto m = Evaluate(back.params, back.config, ds.val, back.age_scaler);
  EXPECT_EQ(m.s_mtl, r.history.best_val_s_mtl);
  EXPECT_EQ(m, r.history.epochs[r.history.best_epoch - 1].val);
}

TEST(TrainRun, UnlabeledValRejected) {
  auto ds = SynthDataset(SmallSynth());
  ds.val.labeled = false;
  EXPECT_THROW(TrainRun(ConfigFor(ds, 1), ds), DataError);
}

TEST(TrainRun, GradientClippingKeepsRunFinite) {
  const auto ds = SynthDataset(SmallSynth());
  auto cfg = ConfigFor(ds, 2);
  cfg.grad_clip_norm = 0.1;
  cfg.learning_rate = 0.05;
  const auto r = TrainRun(cfg, ds);
  for (double v : r.best_params.Flatten()) ASSERT_TRUE(std::isfinite(v));
}

// ---------------------------------------------------------------- evaluate

TEST(Evaluate, LabelsEqualToPredictionsScorePerfectly) {
  ModelConfig mc;
  mc.input_dim = 8;
  RngStream rng(6);
  auto params = InitParams(mc, rng);
  params.country.output.weight *= 20.0;
  const auto x = RandomMatrix(400, 8, rng, -3, 3);
  const AgeScaler scaler{29.5, 5.0};
  const auto p = Predict(params, mc, x, scaler);
  ASSERT_EQ(std::set<int>(p.country.begin(), p.country.end()).size(), 4u);

  Partition part;
  part.features = x;
  part.emotion = p.emotion;
  part.age_years = p.age_years;
  part.country = p.country;
  part.labeled = true;
  part.ids.resize(400);
  const auto m = Evaluate(params, mc, part, scaler);
  EXPECT_DOUBLE_EQ(m.mean_ccc, 1.0);
  EXPECT_DOUBLE_EQ(m.uar, 1.0);
  EXPECT_TRUE(m.mae_zero);
  EXPECT_EQ(Evaluate(params, mc, part, scaler), m);
}

TEST(Evaluate, UntrainedParamsScoreLowOnEmotion) {
  const auto ds = SynthDataset(SmallSynth(200, 300, 16));
  TrainConfig cfg = ConfigFor(ds, 1);
  double worst = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    RngStream rng(seed);
    const auto params = InitParams(cfg.model, rng);
    worst = std::max(worst, std::abs(Evaluate(params, cfg.model, ds.val, ds.age_scaler).mean_ccc));
  }
  RecordProperty("max_abs_untrained_ccc", std::to_string(worst));
  EXPECT_LT(worst, 1.0);
}

// ---------------------------------------------------------------- oracle

TEST(RidgeOracle, ScoresWellOnSyntheticData) {
  const auto ds = SynthDataset(SmallSynth(600, 200, 32));
  const auto m = testing::RidgeCentroidOracle(ds);
  EXPECT_GT(m.mean_ccc, 0.5);
  EXPECT_GT(m.uar, 0.4);
  EXPECT_GT(m.s_mtl, 0.3);
}

}  // namespace
}  // namespace vbmtl
