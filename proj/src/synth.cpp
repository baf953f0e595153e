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

#include "vbmtl/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "vbmtl/error.hpp"
#include "vbmtl/layers.hpp"

namespace vbmtl {

void SynthSpec::Validate() const {
  if (dim == 0 || rank == 0) throw ConfigError("synth: dim and rank must be >= 1");
  if (rank > dim) throw ConfigError("synth: rank must not exceed dim");
  if (n_train == 0) throw ConfigError("synth: n_train must be >= 1");
  if (feature_noise < 0 || emotion_noise < 0 || age_noise < 0 || country_noise < 0)
    throw ConfigError("synth: noise levels must be non-negative");
}

namespace {

Matrix GaussianMatrix(std::size_t rows, std::size_t cols, double scale, RngStream& rng) {
  Matrix m(rows, cols);
  for (double& v : m.values()) v = scale * rng.Normal();
  return m;
}

struct Generator {
  Matrix mixing;       // rank x dim
  Matrix emotion_map;  // rank x 10
  Matrix age_dir;      // rank x 1, unit norm
  Matrix country_map;  // rank x 4
};

Generator MakeGenerator(const SynthSpec& spec) {
  RngStream rng(DeriveSeed(spec.seed, 0));
  const double inv_sqrt_rank = 1.0 / std::sqrt(static_cast<double>(spec.rank));
  Generator g;
  g.mixing = GaussianMatrix(spec.rank, spec.dim, inv_sqrt_rank, rng);
  g.emotion_map = GaussianMatrix(spec.rank, kNumEmotions, 1.5 * inv_sqrt_rank, rng);
  g.age_dir = GaussianMatrix(spec.rank, 1, 1.0, rng);
  double norm = 0.0;
  for (double v : g.age_dir.values()) norm += v * v;
  g.age_dir *= 1.0 / std::sqrt(norm);
  g.country_map = GaussianMatrix(spec.rank, kNumCountries, inv_sqrt_rank, rng);
  return g;
}

void AppendSplit(const SynthSpec& spec, const Generator& g, const char* prefix,
                 std::size_t n, RngStream& rng, FeatureTable& features,
                 std::vector<std::string>& label_ids, std::vector<double>& emotion,
                 std::vector<int>& age, std::vector<int>& country) {
  const Matrix z = GaussianMatrix(n, spec.rank, 1.0, rng);
  Matrix x = MatMul(z, g.mixing);
  for (double& v : x.values()) v += spec.feature_noise * rng.Normal();

  Matrix e = MatMul(z, g.emotion_map);
  for (double& v : e.values()) v += -0.5 + spec.emotion_noise * rng.Normal();
  e = Sigmoid(e);

  const Matrix a = MatMul(z, g.age_dir);
  Matrix c = MatMul(z, g.country_map);
  for (double& v : c.values()) v += spec.country_noise * rng.Normal();

  features.features = std::move(x);
  features.ids.clear();
  for (std::size_t i = 0; i < n; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "%s_%06zu", prefix, i);
    features.ids.emplace_back(id);
    label_ids.emplace_back(id);
    for (double v : e.row(i)) emotion.push_back(v);
    const double years =
        std::clamp(29.5 + 4.0 * a(i, 0) + spec.age_noise * rng.Normal(), 20.0, 39.0);
    age.push_back(static_cast<int>(std::lround(years)));
    country.push_back(ArgMax(c.row(i)));
  }
}

}  // namespace

SynthTables MakeSynthTables(const SynthSpec& spec) {
  spec.Validate();
  const Generator g = MakeGenerator(spec);
  RngStream rng(DeriveSeed(spec.seed, 1));
  SynthTables t;
  std::vector<double> emotion;
  AppendSplit(spec, g, "train", spec.n_train, rng, t.train, t.labels.ids, emotion,
              t.labels.age, t.labels.country);
  AppendSplit(spec, g, "val", spec.n_val, rng, t.val, t.labels.ids, emotion,
              t.labels.age, t.labels.country);
  AppendSplit(spec, g, "test", spec.n_test, rng, t.test, t.labels.ids, emotion,
              t.labels.age, t.labels.country);
  t.labels.emotion = Matrix(t.labels.ids.size(), kNumEmotions, std::move(emotion));
  return t;
}

SplitDataset SynthDataset(const SynthSpec& spec) {
  auto t = MakeSynthTables(spec);
  std::optional<FeatureTable> test;
  if (spec.n_test > 0) test = std::move(t.test);
  return JoinSplits(t.train, t.val, test, t.labels);
}

}  // namespace vbmtl
