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

#ifndef VBMTL_SYNTH_HPP_
#define VBMTL_SYNTH_HPP_

#include <cstddef>
#include <cstdint>

#include "vbmtl/data.hpp"

namespace vbmtl {

// Planted-structure dataset: a shared latent z ~ N(0, I_rank) drives the
// features and all three targets, so every task is learnable from features.
//   features = z A + feature_noise * e
//   emotion  = sigmoid(z W_e - 0.5 + emotion_noise * e)        in [0, 1]^10
//   age      = round(clamp(29.5 + 4 z.w_a + age_noise * e, 20, 39))
//   country  = argmax(z W_c + country_noise * e)
// Generator matrices come from DeriveSeed(seed, 0), samples from
// DeriveSeed(seed, 1).
struct SynthSpec {
  std::size_t n_train = 2000;
  std::size_t n_val = 500;
  std::size_t n_test = 0;
  std::size_t dim = 64;
  std::size_t rank = 8;
  double feature_noise = 0.1;
  double emotion_noise = 0.05;
  double age_noise = 1.0;
  double country_noise = 0.1;
  std::uint64_t seed = 0;

  void Validate() const;
  friend bool operator==(const SynthSpec&, const SynthSpec&) = default;
};

struct SynthTables {
  FeatureTable train;
  FeatureTable val;
  FeatureTable test;
  LabelTable labels;  // covers every split, test included
};

SynthTables MakeSynthTables(const SynthSpec& spec);

// MakeSynthTables joined into a SplitDataset (test labeled when n_test > 0).
SplitDataset SynthDataset(const SynthSpec& spec);

}  // namespace vbmtl

#endif  // VBMTL_SYNTH_HPP_
