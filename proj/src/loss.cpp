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

#include "vbmtl/loss.hpp"

#include <algorithm>
#include <cmath>

#include "vbmtl/error.hpp"

namespace vbmtl {

LossValue MseLoss(const Matrix& pred, const Matrix& target) {
  RequireSameShape(pred, target, "mse_loss");
  if (pred.empty()) throw ShapeError("mse_loss: empty input");
  const double inv_count = 1.0 / static_cast<double>(pred.size());
  LossValue out{0.0, Matrix(pred.rows(), pred.cols())};
  auto p = pred.values();
  auto t = target.values();
  auto g = out.grad.values();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double diff = p[i] - t[i];
    out.loss += diff * diff;
    g[i] = 2.0 * diff * inv_count;
  }
  out.loss *= inv_count;
  return out;
}

LossValue CrossEntropyLoss(const Matrix& logits, std::span<const int> classes) {
  const std::size_t n = logits.rows(), k = logits.cols();
  if (classes.size() != n)
    throw ShapeError("cross_entropy_loss: " + std::to_string(classes.size()) +
                     " labels for " + std::to_string(n) + " rows");
  if (n == 0) throw ShapeError("cross_entropy_loss: empty input");
  const double inv_n = 1.0 / static_cast<double>(n);
  LossValue out{0.0, Matrix(n, k)};
  for (std::size_t i = 0; i < n; ++i) {
    const int c = classes[i];
    if (c < 0 || static_cast<std::size_t>(c) >= k)
      throw DataError("cross_entropy_loss: class id " + std::to_string(c) +
                      " outside [0, " + std::to_string(k) + ")");
    auto z = logits.row(i);
    double mx = z[0];
    for (double v : z) mx = std::max(mx, v);
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - mx);
    const double log_sum = std::log(sum);
    out.loss += -(z[static_cast<std::size_t>(c)] - mx - log_sum);
    auto g = out.grad.row(i);
    for (std::size_t j = 0; j < k; ++j) {
      const double softmax = std::exp(z[j] - mx - log_sum);
      g[j] = (softmax - (static_cast<int>(j) == c ? 1.0 : 0.0)) * inv_n;
    }
  }
  out.loss *= inv_n;
  return out;
}

double TaskWeight(double alpha) { return 1.0 / (2.0 * std::exp(alpha)); }

double TotalLoss(double emotion, double country, double age, const LossConfig& cfg) {
  if (!std::isfinite(emotion) || !std::isfinite(country) || !std::isfinite(age))
    throw NumericalError("total_loss: non-finite task loss");
  return emotion * TaskWeight(cfg.alpha_emotion) + cfg.alpha_emotion / 2.0 +
         country * TaskWeight(cfg.alpha_country) + cfg.alpha_country / 2.0 +
         age * TaskWeight(cfg.alpha_age) + cfg.alpha_age / 2.0;
}

MultiTaskLoss ComputeMultiTaskLoss(const ModelOutputs& outputs,
                                   const BatchTargets& targets,
                                   const LossConfig& cfg) {
  auto emotion = MseLoss(outputs.emotion, targets.emotion);
  auto country = CrossEntropyLoss(outputs.country_logits, targets.country);
  auto age = MseLoss(outputs.age_scaled, targets.age_scaled);

  MultiTaskLoss out;
  out.breakdown = {emotion.loss, country.loss, age.loss,
                   TotalLoss(emotion.loss, country.loss, age.loss, cfg)};
  out.grads.emotion = TaskWeight(cfg.alpha_emotion) * std::move(emotion.grad);
  out.grads.country_logits = TaskWeight(cfg.alpha_country) * std::move(country.grad);
  out.grads.age_scaled = TaskWeight(cfg.alpha_age) * std::move(age.grad);
  return out;
}

}  // namespace vbmtl
