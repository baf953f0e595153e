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

#include "vbmtl/metrics.hpp"

#include <cmath>
#include <string>

#include "vbmtl/error.hpp"

namespace vbmtl {

namespace {

constexpr double kDegenerateDenominator = 1e-12;

}  // namespace

CccResult Ccc(std::span<const double> x, std::span<const double> y, Moments moments) {
  if (x.size() != y.size())
    throw MetricError("ccc: length mismatch " + std::to_string(x.size()) + " vs " +
                      std::to_string(y.size()));
  if (x.size() < 2) throw MetricError("ccc: need at least two samples");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  const double norm = moments == Moments::kPopulation ? n : n - 1.0;
  sxx /= norm;
  syy /= norm;
  sxy /= norm;
  const double denom = sxx + syy + (mx - my) * (mx - my);
  if (denom < kDegenerateDenominator) return {0.0, true};
  return {2.0 * sxy / denom, false};
}

MeanCccResult MeanCcc(const Matrix& pred, const Matrix& target, Moments moments) {
  RequireSameShape(pred, target, "mean_ccc");
  if (pred.cols() == 0) throw MetricError("mean_ccc: no columns");
  MeanCccResult r;
  std::vector<double> a(pred.rows()), b(pred.rows());
  for (std::size_t j = 0; j < pred.cols(); ++j) {
    for (std::size_t i = 0; i < pred.rows(); ++i) {
      a[i] = pred(i, j);
      b[i] = target(i, j);
    }
    const auto c = Ccc(a, b, moments);
    r.per_column.push_back(c.value);
    r.degenerate_columns += c.degenerate ? 1 : 0;
    r.mean += c.value;
  }
  r.mean /= static_cast<double>(pred.cols());
  return r;
}

double Uar(std::span<const int> pred, std::span<const int> truth, int n_classes) {
  if (pred.size() != truth.size())
    throw MetricError("uar: length mismatch " + std::to_string(pred.size()) +
                      " vs " + std::to_string(truth.size()));
  if (n_classes < 1) throw MetricError("uar: n_classes must be >= 1");
  const auto k = static_cast<std::size_t>(n_classes);
  std::vector<std::size_t> support(k, 0), hits(k, 0);
  auto check = [n_classes](int c) {
    if (c < 0 || c >= n_classes)
      throw MetricError("uar: class id " + std::to_string(c) + " out of range");
  };
  for (std::size_t i = 0; i < truth.size(); ++i) {
    check(truth[i]);
    check(pred[i]);
    const auto t = static_cast<std::size_t>(truth[i]);
    ++support[t];
    if (pred[i] == truth[i]) ++hits[t];
  }
  double sum = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    if (support[c] == 0)
      throw MetricError("uar: class " + std::to_string(c) +
                        " absent from ground truth; recall undefined");
    sum += static_cast<double>(hits[c]) / static_cast<double>(support[c]);
  }
  return sum / static_cast<double>(k);
}

double Mae(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size())
    throw MetricError("mae: length mismatch " + std::to_string(pred.size()) +
                      " vs " + std::to_string(truth.size()));
  if (pred.empty()) throw MetricError("mae: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) sum += std::abs(pred[i] - truth[i]);
  return sum / static_cast<double>(pred.size());
}

double InvMae(double mae) {
  if (mae == 0.0) throw PerfectRegressionError();
  if (!(mae > 0.0)) throw MetricError("inv_mae: MAE must be positive");
  return 1.0 / mae;
}

HarmonicResult SMtl(double c_hat, double u_hat, double m_hat) {
  const bool usable = std::isfinite(c_hat) && std::isfinite(u_hat) &&
                      std::isfinite(m_hat) && c_hat > 0.0 && u_hat > 0.0 &&
                      m_hat > 0.0;
  if (!usable) return {0.0, true};
  return {3.0 / (1.0 / c_hat + 1.0 / m_hat + 1.0 / u_hat), false};
}

MetricsBundle ComputeMetrics(const Matrix& emotion_pred, const Matrix& emotion_true,
                             std::span<const double> age_pred_years,
                             std::span<const double> age_true_years,
                             std::span<const int> country_pred,
                             std::span<const int> country_true, int n_classes) {
  MetricsBundle b;
  auto c = MeanCcc(emotion_pred, emotion_true);
  b.ccc_per_emotion = std::move(c.per_column);
  b.mean_ccc = c.mean;
  b.degenerate_ccc_columns = c.degenerate_columns;
  b.uar = Uar(country_pred, country_true, n_classes);
  b.mae_years = Mae(age_pred_years, age_true_years);
  if (b.mae_years == 0.0) {
    b.mae_zero = true;
    b.inv_mae = 0.0;
    b.s_mtl = 0.0;
    b.s_mtl_nonpositive = true;
    return b;
  }
  b.inv_mae = InvMae(b.mae_years);
  const auto h = SMtl(b.mean_ccc, b.uar, b.inv_mae);
  b.s_mtl = h.value;
  b.s_mtl_nonpositive = h.nonpositive_component;
  return b;
}

}  // namespace vbmtl
