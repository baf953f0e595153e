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

#ifndef VBMTL_METRICS_HPP_
#define VBMTL_METRICS_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "vbmtl/matrix.hpp"

namespace vbmtl {

enum class Moments {
  kPopulation,  // 1/n, the default
  kSample,      // 1/(n-1), for sensitivity checks only
};

struct CccResult {
  double value = 0.0;
  bool degenerate = false;  // denominator < 1e-12; value forced to 0
};

// Concordance correlation coefficient
//   2 cov(x, y) / (var(x) + var(y) + (mean(x) - mean(y))^2).
// Throws MetricError on length mismatch or fewer than two samples.
CccResult Ccc(std::span<const double> x, std::span<const double> y,
              Moments moments = Moments::kPopulation);

struct MeanCccResult {
  double mean = 0.0;
  std::vector<double> per_column;
  std::size_t degenerate_columns = 0;
};

// Column-wise CCC averaged over columns.
MeanCccResult MeanCcc(const Matrix& pred, const Matrix& target,
                      Moments moments = Moments::kPopulation);

// Unweighted average recall: mean over classes of per-class recall. Throws
// MetricError when a class in [0, n_classes) never occurs in `truth`, or an id
// is out of range.
double Uar(std::span<const int> pred, std::span<const int> truth,
           int n_classes = 4);

double Mae(std::span<const double> pred, std::span<const double> truth);
// 1 / mae. Throws PerfectRegressionError at mae == 0.
double InvMae(double mae);

struct HarmonicResult {
  double value = 0.0;
  bool nonpositive_component = false;  // value forced to 0
};

// Harmonic mean 3 / (1/c + 1/m + 1/u) of mean CCC, UAR and inverted MAE.
HarmonicResult SMtl(double c_hat, double u_hat, double m_hat);

struct MetricsBundle {
  std::vector<double> ccc_per_emotion;
  double mean_ccc = 0.0;
  double uar = 0.0;
  double mae_years = 0.0;
  double inv_mae = 0.0;
  double s_mtl = 0.0;
  std::size_t degenerate_ccc_columns = 0;
  // MAE was exactly zero: inv_mae and s_mtl are reported as 0.
  bool mae_zero = false;
  bool s_mtl_nonpositive = false;

  friend bool operator==(const MetricsBundle&, const MetricsBundle&) = default;
};

// Full scoring of one split. Rows of every argument must be aligned.
MetricsBundle ComputeMetrics(const Matrix& emotion_pred, const Matrix& emotion_true,
                             std::span<const double> age_pred_years,
                             std::span<const double> age_true_years,
                             std::span<const int> country_pred,
                             std::span<const int> country_true,
                             int n_classes = 4);

}  // namespace vbmtl

#endif  // VBMTL_METRICS_HPP_
