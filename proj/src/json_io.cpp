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

#include "vbmtl/json_io.hpp"

#include <string>

#include "vbmtl/error.hpp"

namespace vbmtl {

void RequireKeys(const json& j, std::initializer_list<const char*> allowed,
                 const char* context) {
  if (!j.is_object()) throw ConfigError(std::string(context) + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(std::string(context) + ": unknown key '" + key + "'");
  }
}

namespace {

template <typename T>
void Read(const json& j, const char* key, T& out, const char* context) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string(context) + "." + key + ": " + e.what());
  }
}

}  // namespace

void to_json(json& j, const ModelConfig& c) {
  j = json{{"input_dim", c.input_dim},
           {"shared_dims", c.shared_dims},
           {"age_head_dims", c.age_head_dims},
           {"emotion_hidden", c.emotion_hidden},
           {"country_hidden", c.country_hidden},
           {"emotion_out", c.emotion_out},
           {"country_out", c.country_out},
           {"leaky_slope", c.leaky_slope},
           {"ln_eps", c.ln_eps},
           {"head_layer_norm", c.head_layer_norm},
           {"head_variant", ToString(c.head_variant)},
           {"emotion_activation", ToString(c.emotion_activation)}};
}

void from_json(const json& j, ModelConfig& c) {
  constexpr const char* ctx = "model";
  RequireKeys(j,
              {"input_dim", "shared_dims", "age_head_dims", "emotion_hidden",
               "country_hidden", "emotion_out", "country_out", "leaky_slope", "ln_eps",
               "head_layer_norm", "head_variant", "emotion_activation"},
              ctx);
  Read(j, "input_dim", c.input_dim, ctx);
  Read(j, "shared_dims", c.shared_dims, ctx);
  Read(j, "age_head_dims", c.age_head_dims, ctx);
  Read(j, "emotion_hidden", c.emotion_hidden, ctx);
  Read(j, "country_hidden", c.country_hidden, ctx);
  Read(j, "emotion_out", c.emotion_out, ctx);
  Read(j, "country_out", c.country_out, ctx);
  Read(j, "leaky_slope", c.leaky_slope, ctx);
  Read(j, "ln_eps", c.ln_eps, ctx);
  Read(j, "head_layer_norm", c.head_layer_norm, ctx);
  std::string s;
  if (j.contains("head_variant")) {
    Read(j, "head_variant", s, ctx);
    c.head_variant = ParseHeadVariant(s);
  }
  if (j.contains("emotion_activation")) {
    Read(j, "emotion_activation", s, ctx);
    c.emotion_activation = ParseEmotionActivation(s);
  }
}

void to_json(json& j, const LossConfig& c) {
  j = json{{"alpha_emotion", c.alpha_emotion},
           {"alpha_country", c.alpha_country},
           {"alpha_age", c.alpha_age}};
}

void from_json(const json& j, LossConfig& c) {
  constexpr const char* ctx = "loss";
  RequireKeys(j, {"alpha_emotion", "alpha_country", "alpha_age"}, ctx);
  Read(j, "alpha_emotion", c.alpha_emotion, ctx);
  Read(j, "alpha_country", c.alpha_country, ctx);
  Read(j, "alpha_age", c.alpha_age, ctx);
}

void to_json(json& j, const TrainConfig& c) {
  j = json{{"seed", c.seed},
           {"run_index", c.run_index},
           {"batch_size", c.batch_size},
           {"learning_rate", c.learning_rate},
           {"adam_beta1", c.adam_beta1},
           {"adam_beta2", c.adam_beta2},
           {"adam_eps", c.adam_eps},
           {"max_epochs", c.max_epochs},
           {"patience", c.patience},
           {"grad_clip_norm", c.grad_clip_norm},
           {"loss", c.loss},
           {"model", c.model}};
}

void from_json(const json& j, TrainConfig& c) {
  constexpr const char* ctx = "train";
  RequireKeys(j,
              {"seed", "run_index", "batch_size", "learning_rate", "adam_beta1",
               "adam_beta2", "adam_eps", "max_epochs", "patience", "grad_clip_norm",
               "loss", "model"},
              ctx);
  Read(j, "seed", c.seed, ctx);
  Read(j, "run_index", c.run_index, ctx);
  Read(j, "batch_size", c.batch_size, ctx);
  Read(j, "learning_rate", c.learning_rate, ctx);
  Read(j, "adam_beta1", c.adam_beta1, ctx);
  Read(j, "adam_beta2", c.adam_beta2, ctx);
  Read(j, "adam_eps", c.adam_eps, ctx);
  Read(j, "max_epochs", c.max_epochs, ctx);
  Read(j, "patience", c.patience, ctx);
  Read(j, "grad_clip_norm", c.grad_clip_norm, ctx);
  if (j.contains("loss")) from_json(j.at("loss"), c.loss);
  if (j.contains("model")) from_json(j.at("model"), c.model);
}

void to_json(json& j, const SynthSpec& s) {
  j = json{{"n_train", s.n_train},
           {"n_val", s.n_val},
           {"n_test", s.n_test},
           {"dim", s.dim},
           {"rank", s.rank},
           {"feature_noise", s.feature_noise},
           {"emotion_noise", s.emotion_noise},
           {"age_noise", s.age_noise},
           {"country_noise", s.country_noise},
           {"seed", s.seed}};
}

void from_json(const json& j, SynthSpec& s) {
  constexpr const char* ctx = "synthetic";
  RequireKeys(j,
              {"n_train", "n_val", "n_test", "dim", "rank", "feature_noise",
               "emotion_noise", "age_noise", "country_noise", "seed"},
              ctx);
  Read(j, "n_train", s.n_train, ctx);
  Read(j, "n_val", s.n_val, ctx);
  Read(j, "n_test", s.n_test, ctx);
  Read(j, "dim", s.dim, ctx);
  Read(j, "rank", s.rank, ctx);
  Read(j, "feature_noise", s.feature_noise, ctx);
  Read(j, "emotion_noise", s.emotion_noise, ctx);
  Read(j, "age_noise", s.age_noise, ctx);
  Read(j, "country_noise", s.country_noise, ctx);
  Read(j, "seed", s.seed, ctx);
}

void to_json(json& j, const AgeScaler& s) { j = json{{"mean", s.mean}, {"std", s.std}}; }

void from_json(const json& j, AgeScaler& s) {
  RequireKeys(j, {"mean", "std"}, "age_scaler");
  Read(j, "mean", s.mean, "age_scaler");
  Read(j, "std", s.std, "age_scaler");
}

void to_json(json& j, const LossBreakdown& l) {
  j = json{{"emotion", l.emotion}, {"country", l.country}, {"age", l.age},
           {"total", l.total}};
}

void to_json(json& j, const MetricsBundle& m) {
  j = json{{"ccc_per_emotion", m.ccc_per_emotion},
           {"mean_ccc", m.mean_ccc},
           {"uar", m.uar},
           {"mae_years", m.mae_years},
           {"inv_mae", m.inv_mae},
           {"s_mtl", m.s_mtl},
           {"degenerate_ccc_columns", m.degenerate_ccc_columns},
           {"mae_zero", m.mae_zero},
           {"s_mtl_nonpositive", m.s_mtl_nonpositive}};
}

void from_json(const json& j, MetricsBundle& m) {
  constexpr const char* ctx = "metrics";
  Read(j, "ccc_per_emotion", m.ccc_per_emotion, ctx);
  Read(j, "mean_ccc", m.mean_ccc, ctx);
  Read(j, "uar", m.uar, ctx);
  Read(j, "mae_years", m.mae_years, ctx);
  Read(j, "inv_mae", m.inv_mae, ctx);
  Read(j, "s_mtl", m.s_mtl, ctx);
  Read(j, "degenerate_ccc_columns", m.degenerate_ccc_columns, ctx);
  Read(j, "mae_zero", m.mae_zero, ctx);
  Read(j, "s_mtl_nonpositive", m.s_mtl_nonpositive, ctx);
}

void to_json(json& j, const RunHistory& h) {
  json epochs = json::array();
  for (const auto& e : h.epochs)
    epochs.push_back({{"epoch", e.epoch},
                      {"train_loss", e.train_loss},
                      {"val", e.val}});
  j = json{{"run_seed", h.run_seed},
           {"initial_val", h.initial_val},
           {"best_epoch", h.best_epoch},
           {"best_val_s_mtl", h.best_val_s_mtl},
           {"epochs", std::move(epochs)}};
}

}  // namespace vbmtl
