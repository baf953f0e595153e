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

#include "vbmtl/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "vbmtl/error.hpp"

namespace vbmtl {

namespace {

double Evaluate(const Objective& f, std::span<const double> params,
                std::span<double> grad) {
  const double v = f(params, grad);
  if (!std::isfinite(v)) throw NumericalError("grad check: objective is not finite");
  return v;
}

}  // namespace

GradCheckReport GradCheck(const Objective& f, std::span<const double> params,
                          const GradCheckOptions& options) {
  std::vector<double> analytic(params.size());
  Evaluate(f, params, analytic);

  std::vector<double> probe(params.begin(), params.end());
  GradCheckReport report;
  for (std::size_t i = 0; i < probe.size(); ++i) {
    if (options.skip && options.skip(i)) continue;
    const double saved = probe[i];
    probe[i] = saved + options.eps;
    const double plus = Evaluate(f, probe, {});
    probe[i] = saved - options.eps;
    const double minus = Evaluate(f, probe, {});
    probe[i] = saved;

    const double numeric = (plus - minus) / (2.0 * options.eps);
    const double denom =
        std::max({std::abs(analytic[i]), std::abs(numeric), options.floor});
    const double rel = std::abs(analytic[i] - numeric) / denom;
    ++report.checked;
    if (rel > report.max_relative_error || report.checked == 1) {
      report.max_relative_error = rel;
      report.worst_index = i;
      report.worst_analytic = analytic[i];
      report.worst_numeric = numeric;
    }
  }
  return report;
}

}  // namespace vbmtl
