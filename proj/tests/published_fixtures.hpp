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

// Published per-feature-set score triples and a generator of prediction and
// label files that realize a given (CCC, UAR, 1/MAE) triple.

#ifndef VBMTL_TESTS_PUBLISHED_FIXTURES_HPP_
#define VBMTL_TESTS_PUBLISHED_FIXTURES_HPP_

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <ostream>
#include <string>

#include "vbmtl/data.hpp"

namespace vbmtl::testing {

struct PublishedRow {
  const char* name;
  double ccc, uar, inv_mae, s_mtl;
};

inline void PrintTo(const PublishedRow& row, std::ostream* os) {
  *os << row.name << " (" << row.ccc << ", " << row.uar << ", " << row.inv_mae << ") -> "
      << row.s_mtl;
}

// (CCC, UAR, 1/MAE) and the printed harmonic mean, per feature set.
inline constexpr PublishedRow kPublishedRows[] = {
    {"ComParE", 0.416, 0.506, 0.237, 0.349},
    {"eGeMAPS", 0.353, 0.423, 0.249, 0.324},
    {"BoAW125", 0.335, 0.417, 0.234, 0.311},
    {"BoAW250", 0.354, 0.423, 0.238, 0.319},
    {"BoAW500", 0.374, 0.432, 0.218, 0.314},
    {"BoAW1000", 0.384, 0.438, 0.225, 0.321},
    {"DeepSpectrum", 0.369, 0.456, 0.227, 0.322},
    {"w2v2-R-er", 0.533, 0.523, 0.252, 0.386},
    {"w2v2-R-vad", 0.534, 0.525, 0.253, 0.388},
};

struct ComponentFiles {
  std::filesystem::path predictions;
  std::filesystem::path labels;
};

// 4000 rows, 1000 per country. With x, z orthogonal +/-1 patterns:
//   truth emotion = 0.5 + 0.1 x, prediction = 0.5 + 0.1 (x + b z),
//   so CCC = 2 / (2 + b^2) and b^2 = 2 / ccc - 2;
//   round(uar * 4000) correct country predictions spread over the classes;
//   every age prediction misses by exactly 1 / inv_mae years.
inline ComponentFiles WriteComponentFiles(const PublishedRow& row,
                                          const std::filesystem::path& dir) {
  constexpr std::size_t kPerClass = 1000;
  constexpr std::size_t n = 4 * kPerClass;
  const double b = std::sqrt(2.0 / row.ccc - 2.0);
  const auto correct_total = static_cast<std::size_t>(std::llround(row.uar * n));
  std::size_t correct[4];
  for (std::size_t c = 0; c < 4; ++c)
    correct[c] = correct_total / 4 + (c < correct_total % 4 ? 1 : 0);
  const double age_error = 1.0 / row.inv_mae;

  LabelTable labels;
  PredictionTable preds;
  labels.emotion = Matrix(n, kNumEmotions);
  preds.emotion = Matrix(n, kNumEmotions);
  std::size_t seen[4] = {0, 0, 0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    char id[16];
    std::snprintf(id, sizeof(id), "r%05zu", i);
    labels.ids.push_back(id);
    preds.ids.push_back(id);
    const double x = (i % 2 == 0) ? 1.0 : -1.0;
    const double z = ((i / 2) % 2 == 0) ? 1.0 : -1.0;
    for (std::size_t j = 0; j < kNumEmotions; ++j) {
      labels.emotion(i, j) = 0.5 + 0.1 * x;
      preds.emotion(i, j) = 0.5 + 0.1 * (x + b * z);
    }
    const int age = 20 + static_cast<int>(i % 20);
    labels.age.push_back(age);
    preds.age_years.push_back(age + ((i / 3) % 2 == 0 ? age_error : -age_error));
    const int c = static_cast<int>((i / 4) % 4);
    labels.country.push_back(c);
    preds.country.push_back(seen[c]++ < correct[c] ? c : (c + 1) % 4);
  }
  std::filesystem::create_directories(dir);
  ComponentFiles files{dir / (std::string(row.name) + "_predictions.csv"),
                       dir / (std::string(row.name) + "_labels.csv")};
  SavePredictionsCsv(preds, files.predictions);
  SaveLabelsCsv(labels, files.labels);
  return files;
}

}  // namespace vbmtl::testing

#endif  // VBMTL_TESTS_PUBLISHED_FIXTURES_HPP_
