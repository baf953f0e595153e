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

#ifndef VBMTL_LOSS_HPP_
#define VBMTL_LOSS_HPP_

#include <span>
#include <vector>

#include "vbmtl/matrix.hpp"
#include "vbmtl/model.hpp"

namespace vbmtl {

// Fixed per-task coefficients of the combined loss. Not trainable.
struct LossConfig {
  double alpha_emotion = 0.34;
  double alpha_country = 0.33;
  double alpha_age = 0.33;
  friend bool operator==(const LossConfig&, const LossConfig&) = default;
};

struct LossBreakdown {
  double emotion = 0.0;
  double country = 0.0;
  double age = 0.0;
  double total = 0.0;
  friend bool operator==(const LossBreakdown&, const LossBreakdown&) = default;
};

struct LossValue {
  double loss = 0.0;
  Matrix grad;
};

// Mean squared error over all n*d entries; grad = 2 (pred - target) / (n d).
LossValue MseLoss(const Matrix& pred, const Matrix& target);

// Mean softmax cross-entropy of the true class; grad = (softmax - onehot) / n.
// Throws DataError for class ids outside [0, logits.cols()).
LossValue CrossEntropyLoss(const Matrix& logits, std::span<const int> classes);

// Coefficient 1 / (2 exp(alpha)) applied to a task loss.
double TaskWeight(double alpha);

// sum_i ( L_i / (2 exp(alpha_i)) + alpha_i / 2 ). Throws NumericalError on
// non-finite components.
double TotalLoss(double emotion, double country, double age, const LossConfig& cfg);

struct BatchTargets {
  Matrix emotion;           // n x 10
  Matrix age_scaled;        // n x 1
  std::vector<int> country;
};

struct MultiTaskLoss {
  LossBreakdown breakdown;
  OutputGrads grads;  // gradient of the combined total w.r.t. each output
};

// Evaluates the three task losses, combines them, and scales each task's
// output gradient by its TaskWeight.
MultiTaskLoss ComputeMultiTaskLoss(const ModelOutputs& outputs,
                                   const BatchTargets& targets,
                                   const LossConfig& cfg);

}  // namespace vbmtl

#endif  // VBMTL_LOSS_HPP_
