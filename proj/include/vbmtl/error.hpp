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

#ifndef VBMTL_ERROR_HPP_
#define VBMTL_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace vbmtl {

// Failure categories. The CLI maps them onto process exit codes.
enum class ErrorKind {
  kUsage = 1,      // bad flags or config
  kData = 2,       // malformed/missing/misaligned input
  kNumerical = 3,  // non-finite values, shape contract violations
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::kUsage, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::kData, what) {}
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what)
      : Error(ErrorKind::kNumerical, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what)
      : Error(ErrorKind::kNumerical, what) {}
};

// Raised by metrics whose value is undefined for the given inputs
// (e.g. a class never occurring in the ground truth).
class MetricError : public Error {
 public:
  explicit MetricError(const std::string& what) : Error(ErrorKind::kData, what) {}
};

// inv_mae(0): the age regression is exact, so 1/MAE does not exist.
class PerfectRegressionError : public MetricError {
 public:
  PerfectRegressionError()
      : MetricError("MAE is exactly zero; inverted MAE is undefined") {}
};

inline int ExitCode(ErrorKind kind) { return static_cast<int>(kind); }

}  // namespace vbmtl

#endif  // VBMTL_ERROR_HPP_
