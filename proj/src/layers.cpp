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

#include "vbmtl/layers.hpp"

#include <cmath>
#include <sstream>

#include "vbmtl/error.hpp"

namespace vbmtl {

namespace {

void RequireRowVector(const Matrix& v, std::size_t cols, const char* what) {
  if (v.rows() != 1 || v.cols() != cols) {
    std::ostringstream os;
    os << what << ": expected 1x" << cols << ", got " << v.ShapeString();
    throw ShapeError(os.str());
  }
}

}  // namespace

LinearForwardResult LinearForward(const Matrix& x, const Matrix& weight,
                                  const Matrix& bias) {
  RequireRowVector(bias, weight.cols(), "linear bias");
  Matrix y = MatMul(x, weight);
  AddRowVector(y, bias);
  return {std::move(y), LinearCache{x}};
}

LinearGrads LinearBackward(const LinearCache& cache, const Matrix& weight,
                           const Matrix& d_output) {
  if (d_output.rows() != cache.input.rows() || d_output.cols() != weight.cols()) {
    throw ShapeError("linear backward: d_output " + d_output.ShapeString() +
                     " does not match forward output " +
                     std::to_string(cache.input.rows()) + "x" +
                     std::to_string(weight.cols()));
  }
  return {MatMulTransB(d_output, weight), MatMulTransA(cache.input, d_output),
          ColumnSums(d_output)};
}

LayerNormForwardResult LayerNormForward(const Matrix& x, const Matrix& gamma,
                                        const Matrix& beta, double eps) {
  const std::size_t n = x.rows(), d = x.cols();
  if (d == 0) throw ShapeError("layer norm over zero features");
  if (!(eps > 0.0)) throw NumericalError("layer norm eps must be positive");
  RequireRowVector(gamma, d, "layer norm gamma");
  RequireRowVector(beta, d, "layer norm beta");

  LayerNormCache cache{Matrix(n, d), std::vector<double>(n)};
  Matrix y(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    auto xr = x.row(i);
    double mean = 0.0;
    for (double v : xr) mean += v;
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (double v : xr) var += (v - mean) * (v - mean);
    var /= static_cast<double>(d);
    const double inv_std = 1.0 / std::sqrt(var + eps);
    cache.inv_std[i] = inv_std;
    auto xhat = cache.normalized.row(i);
    auto yr = y.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      xhat[j] = (xr[j] - mean) * inv_std;
      yr[j] = gamma(0, j) * xhat[j] + beta(0, j);
    }
  }
  return {std::move(y), std::move(cache)};
}

LayerNormGrads LayerNormBackward(const LayerNormCache& cache,
                                 const Matrix& gamma, const Matrix& d_output) {
  RequireSameShape(cache.normalized, d_output, "layer norm backward");
  const std::size_t n = d_output.rows(), d = d_output.cols();
  LayerNormGrads g{Matrix(n, d), Matrix(1, d), Matrix(1, d)};
  const double inv_d = 1.0 / static_cast<double>(d);
  for (std::size_t i = 0; i < n; ++i) {
    auto xhat = cache.normalized.row(i);
    auto dy = d_output.row(i);
    // dxhat = dy * gamma; dx = inv_std * (dxhat - mean(dxhat) - xhat * mean(dxhat * xhat))
    double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double dxhat = dy[j] * gamma(0, j);
      sum_dxhat += dxhat;
      sum_dxhat_xhat += dxhat * xhat[j];
      g.d_gamma(0, j) += dy[j] * xhat[j];
      g.d_beta(0, j) += dy[j];
    }
    const double mean_dxhat = sum_dxhat * inv_d;
    const double mean_dxhat_xhat = sum_dxhat_xhat * inv_d;
    auto dx = g.d_input.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      const double dxhat = dy[j] * gamma(0, j);
      dx[j] = cache.inv_std[i] * (dxhat - mean_dxhat - xhat[j] * mean_dxhat_xhat);
    }
  }
  return g;
}

LeakyReluForwardResult LeakyRelu(const Matrix& x, double slope) {
  if (!(slope > 0.0 && slope < 1.0))
    throw NumericalError("leaky relu slope must lie in (0, 1)");
  Matrix y = x;
  for (double& v : y.values())
    if (v < 0.0) v *= slope;
  return {std::move(y), LeakyReluCache{x, slope}};
}

Matrix LeakyReluBackward(const LeakyReluCache& cache, const Matrix& d_output) {
  RequireSameShape(cache.input, d_output, "leaky relu backward");
  Matrix dx = d_output;
  auto in = cache.input.values();
  auto out = dx.values();
  for (std::size_t i = 0; i < out.size(); ++i)
    if (in[i] < 0.0) out[i] *= cache.slope;
  return dx;
}

Matrix Sigmoid(const Matrix& x) {
  Matrix y = x;
  for (double& v : y.values()) {
    // Branches keep exp() from overflowing for large |v|.
    if (v >= 0.0) {
      v = 1.0 / (1.0 + std::exp(-v));
    } else {
      const double e = std::exp(v);
      v = e / (1.0 + e);
    }
  }
  return y;
}

Matrix SigmoidBackward(const Matrix& output, const Matrix& d_output) {
  RequireSameShape(output, d_output, "sigmoid backward");
  Matrix dx = d_output;
  auto s = output.values();
  auto g = dx.values();
  for (std::size_t i = 0; i < g.size(); ++i) g[i] *= s[i] * (1.0 - s[i]);
  return dx;
}

}  // namespace vbmtl
