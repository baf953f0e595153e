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

#ifndef VBMTL_LAYERS_HPP_
#define VBMTL_LAYERS_HPP_

#include "vbmtl/matrix.hpp"

namespace vbmtl {

// Differentiable building blocks with hand-written backward passes. Each
// forward returns the output plus the intermediates its backward needs.
// Parameters are passed to backward explicitly instead of being copied into
// the cache.

struct LinearCache {
  Matrix input;  // n x d_in
};

struct LinearForwardResult {
  Matrix output;  // n x d_out
  LinearCache cache;
};

struct LinearGrads {
  Matrix d_input;   // n x d_in
  Matrix d_weight;  // d_in x d_out
  Matrix d_bias;    // 1 x d_out
};

// y = x W + b, with b broadcast over rows.
LinearForwardResult LinearForward(const Matrix& x, const Matrix& weight,
                                  const Matrix& bias);
LinearGrads LinearBackward(const LinearCache& cache, const Matrix& weight,
                           const Matrix& d_output);

struct LayerNormCache {
  Matrix normalized;             // (x - mean) / sqrt(var + eps), n x d
  std::vector<double> inv_std;   // per row
};

struct LayerNormForwardResult {
  Matrix output;
  LayerNormCache cache;
};

struct LayerNormGrads {
  Matrix d_input;
  Matrix d_gamma;  // 1 x d
  Matrix d_beta;   // 1 x d
};

// Per-row normalization with population variance (1/d) and eps added inside
// the square root, followed by the affine map gamma * xhat + beta.
LayerNormForwardResult LayerNormForward(const Matrix& x, const Matrix& gamma,
                                        const Matrix& beta, double eps);
LayerNormGrads LayerNormBackward(const LayerNormCache& cache,
                                 const Matrix& gamma, const Matrix& d_output);

struct LeakyReluCache {
  Matrix input;
  double slope = 0.01;
};

struct LeakyReluForwardResult {
  Matrix output;
  LeakyReluCache cache;
};

// y = x for x >= 0, slope * x otherwise. slope must lie in (0, 1).
LeakyReluForwardResult LeakyRelu(const Matrix& x, double slope);
Matrix LeakyReluBackward(const LeakyReluCache& cache, const Matrix& d_output);

// Elementwise logistic function and its backward given the forward output.
Matrix Sigmoid(const Matrix& x);
Matrix SigmoidBackward(const Matrix& output, const Matrix& d_output);

}  // namespace vbmtl

#endif  // VBMTL_LAYERS_HPP_
