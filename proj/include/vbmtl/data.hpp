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

#ifndef VBMTL_DATA_HPP_
#define VBMTL_DATA_HPP_

#include <array>
#include <cstddef>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vbmtl/loss.hpp"
#include "vbmtl/matrix.hpp"
#include "vbmtl/model.hpp"
#include "vbmtl/rng.hpp"

namespace vbmtl {

// Column order of the emotion targets everywhere in the project.
inline constexpr std::array<std::string_view, kNumEmotions> kEmotionNames = {
    "Amusement", "Awe",    "Awkwardness", "Distress", "Excitement",
    "Fear",      "Horror", "Sadness",     "Surprise", "Triumph"};

// Country class ids 0..3 and their exact file tokens.
inline constexpr std::array<std::string_view, kNumCountries> kCountryTokens = {
    "USA", "China", "SouthAfrica", "Venezuela"};

int ParseCountry(std::string_view token);
std::string_view CountryToken(int id);

struct FeatureTable {
  std::vector<std::string> ids;
  Matrix features;  // ids.size() x dim
  std::size_t dim() const { return features.cols(); }
};

struct LabelTable {
  std::vector<std::string> ids;
  Matrix emotion;  // n x 10, entries in [0, 1]
  std::vector<int> age;
  std::vector<int> country;
};

// Feature files are either CSV (header `id,f0,...,f{d-1}`) or the binary blob
//   "PMTL" | u16 version=1 | u32 n | u32 d | n x (u32 len, UTF-8 id) |
//   n*d float64 row-major
// with every integer and float little-endian. LoadFeatures sniffs the magic.
FeatureTable LoadFeatures(const std::filesystem::path& path);
FeatureTable ParseFeaturesCsv(std::istream& in, const std::string& source);
FeatureTable ParseFeaturesBinary(std::istream& in, const std::string& source);
void SaveFeaturesCsv(const FeatureTable& table, const std::filesystem::path& path);
void SaveFeaturesBinary(const FeatureTable& table, const std::filesystem::path& path);

// Labels CSV: `id,<10 emotion names>,age,country`.
LabelTable LoadLabels(const std::filesystem::path& path);
LabelTable ParseLabelsCsv(std::istream& in, const std::string& source);
void SaveLabelsCsv(const LabelTable& table, const std::filesystem::path& path);

// Shortest decimal text that parses back to exactly `v`.
std::string FormatDouble(double v);

// One aligned split, rows in lexicographic id order.
struct Partition {
  std::vector<std::string> ids;
  Matrix features;
  Matrix emotion;                 // empty when unlabeled
  std::vector<double> age_years;  // empty when unlabeled
  std::vector<int> country;       // empty when unlabeled
  bool labeled = false;

  std::size_t size() const { return ids.size(); }
  // Targets for the given rows, with age standardized by `scaler`.
  BatchTargets Targets(std::span<const std::size_t> rows, const AgeScaler& scaler) const;
};

enum class Standardization { kNone, kZScore, kMinMax };
const char* ToString(Standardization s);
Standardization ParseStandardization(const std::string& s);

// Per-feature affine map x -> (x - offset) / scale, fit on the train split.
struct Standardizer {
  Standardization mode = Standardization::kNone;
  std::vector<double> offset;
  std::vector<double> scale;
  // Features with zero spread on train: centered only (scale 1).
  std::vector<std::size_t> constant_features;

  Matrix Apply(const Matrix& x) const;
  bool identity() const { return mode == Standardization::kNone; }
  friend bool operator==(const Standardizer&, const Standardizer&) = default;
};

struct SplitDataset {
  Partition train;
  Partition val;
  Partition test;
  Standardizer standardizer;
  AgeScaler age_scaler;  // fit on train ages
};

// Joins features with labels. Train and val ids must all be labeled (error
// lists the missing ids); the test split is labeled only if every id has a
// label, otherwise it is kept as prediction-only. Partitions must be
// disjoint and share one feature dimension.
SplitDataset JoinSplits(const FeatureTable& train, const FeatureTable& val,
                        const std::optional<FeatureTable>& test,
                        const LabelTable& labels);

// Fits `mode` on the train features and applies it to every split.
SplitDataset Standardize(SplitDataset data, Standardization mode);

// Mean/std (population) of the train ages; std 0 maps to 1.
AgeScaler FitAgeScaler(std::span<const double> ages);

// Shuffled minibatches of [0, n); the last batch may be partial. A batch
// size larger than n yields one batch holding everything.
std::vector<std::vector<std::size_t>> Batches(std::size_t n, std::size_t batch_size,
                                              RngStream& rng);

// Predictions CSV: `id,<10 emotion names>,age,country`. Age is written in
// years at full precision, country as its token.
struct PredictionTable {
  std::vector<std::string> ids;
  Matrix emotion;
  std::vector<double> age_years;
  std::vector<int> country;
};

PredictionTable MakePredictionTable(const std::vector<std::string>& ids,
                                    const PredictionSet& predictions);
void SavePredictionsCsv(const PredictionTable& table, const std::filesystem::path& path);
PredictionTable LoadPredictionsCsv(const std::filesystem::path& path);

}  // namespace vbmtl

#endif  // VBMTL_DATA_HPP_
