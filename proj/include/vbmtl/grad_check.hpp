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

#ifndef VBMTL_GRAD_CHECK_HPP_
#define VBMTL_GRAD_CHECK_HPP_

#include <cstddef>
#include <functional>
#include <span>

namespace vbmtl {

// Scalar objective over a flat parameter vector. Returns the value and, when
// `grad` is non-empty, writes the analytic gradient into it.
using Objective =
    std::function<double(std::span<const double> params, std::span<double> grad)>;

struct GradCheckOptions {
  double eps = 1e-6;
  // Denominator floor: |a - n| / max(|a|, |n|, floor). Keeps entries whose
  // true gradient is ~0 from dominating through round-off.
  double floor = 1e-6;
  // Entries for which skip(index) is true are not compared (kink exclusion).
  std::function<bool(std::size_t)> skip;
};

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked = 0;
};

// Central-difference comparison over every parameter entry. Throws
// NumericalError if the objective returns a non-finite value.
GradCheckReport GradCheck(const Objective& f, std::span<const double> params,
                          const GradCheckOptions& options = {});

}  // namespace vbmtl

#endif  // VBMTL_GRAD_CHECK_HPP_
