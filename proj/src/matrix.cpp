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

#include "vbmtl/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "vbmtl/error.hpp"

namespace vbmtl {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    std::ostringstream os;
    os << "matrix payload of " << data_.size() << " values does not fit "
       << rows_ << "x" << cols_;
    throw ShapeError(os.str());
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ShapeError("ragged matrix initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::Identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::RowVector(std::span<const double> values) {
  return Matrix(1, values.size(), std::vector<double>(values.begin(), values.end()));
}

void Matrix::Fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Matrix::AllFinite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

std::string Matrix::ShapeString() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

Matrix Matrix::GatherRows(std::span<const std::size_t> indices) const {
  Matrix out(indices.size(), cols_);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= rows_) throw ShapeError("row index out of range");
    auto src = row(indices[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

Matrix& Matrix::operator+=(const Matrix& other) {
  RequireSameShape(*this, other, "operator+=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  RequireSameShape(*this, other, "operator-=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

namespace {

[[noreturn]] void ThrowMismatch(const char* op, const Matrix& a, const Matrix& b) {
  std::ostringstream os;
  os << op << ": incompatible shapes " << a.ShapeString() << " and "
     << b.ShapeString();
  throw ShapeError(os.str());
}

}  // namespace

void RequireSameShape(const Matrix& a, const Matrix& b, const char* context) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) ThrowMismatch(context, a, b);
}

Matrix MatMul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) ThrowMismatch("matmul", a, b);
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  Matrix c(m, n);
  // i-p-j order: contiguous access to b and c rows.
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c.row(i).data();
    const double* arow = a.row(i).data();
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = arow[p];
      const double* brow = b.row(p).data();
      for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
    }
  }
  return c;
}

Matrix MatMulTransA(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) ThrowMismatch("matmul_trans_a", a, b);
  const std::size_t k = a.rows(), m = a.cols(), n = b.cols();
  Matrix c(m, n);
  for (std::size_t p = 0; p < k; ++p) {
    const double* arow = a.row(p).data();
    const double* brow = b.row(p).data();
    for (std::size_t i = 0; i < m; ++i) {
      const double api = arow[i];
      double* crow = c.row(i).data();
      for (std::size_t j = 0; j < n; ++j) crow[j] += api * brow[j];
    }
  }
  return c;
}

Matrix MatMulTransB(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) ThrowMismatch("matmul_trans_b", a, b);
  const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
  Matrix c(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a.row(i).data();
    for (std::size_t j = 0; j < n; ++j) {
      const double* brow = b.row(j).data();
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
      c(i, j) = acc;
    }
  }
  return c;
}

Matrix Transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(double s, Matrix a) { return a *= s; }

void AddRowVector(Matrix& a, const Matrix& v) {
  if (v.rows() != 1 || v.cols() != a.cols()) ThrowMismatch("add_row_vector", a, v);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto r = a.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] += v(0, j);
  }
}

Matrix ColumnSums(const Matrix& a) {
  Matrix s(1, a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto r = a.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) s(0, j) += r[j];
  }
  return s;
}

}  // namespace vbmtl
