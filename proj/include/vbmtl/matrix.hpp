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

#ifndef VBMTL_MATRIX_HPP_
#define VBMTL_MATRIX_HPP_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace vbmtl {

// Dense row-major matrix of doubles. Vectors are stored as 1 x n matrices.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix Identity(std::size_t n);
  static Matrix RowVector(std::span<const double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  const std::vector<double>& data() const { return data_; }

  void Fill(double v);
  bool AllFinite() const;
  std::string ShapeString() const;

  // Rows selected by index, in the given order.
  Matrix GatherRows(std::span<const std::size_t> indices) const;

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double s);

  friend bool operator==(const Matrix& a, const Matrix& b) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// a (m x k) * b (k x n).
Matrix MatMul(const Matrix& a, const Matrix& b);
// a^T * b, with a (k x m) and b (k x n).
Matrix MatMulTransA(const Matrix& a, const Matrix& b);
// a * b^T, with a (m x k) and b (n x k).
Matrix MatMulTransB(const Matrix& a, const Matrix& b);

Matrix Transpose(const Matrix& a);
Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(double s, Matrix a);

// Adds the 1 x cols vector `v` to every row of `a`.
void AddRowVector(Matrix& a, const Matrix& v);
// 1 x cols matrix of column sums.
Matrix ColumnSums(const Matrix& a);

// Throws ShapeError unless a and b have identical shapes.
void RequireSameShape(const Matrix& a, const Matrix& b, const char* context);

}  // namespace vbmtl

#endif  // VBMTL_MATRIX_HPP_
