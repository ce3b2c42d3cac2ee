// Copyright 2026 The seedalign Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "seedalign/error.hpp"

namespace seedalign {

/// Dense row-major matrix. The element type is double for training and
/// matching; float is used for very large cost matrices.
template <typename T>
class BasicMatrix {
 public:
  using value_type = T;

  BasicMatrix() = default;
  BasicMatrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  BasicMatrix(std::size_t rows, std::size_t cols, std::vector<T> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      throw ShapeError("matrix buffer holds " + std::to_string(data_.size()) +
                       " values, expected " + std::to_string(rows_ * cols_));
    }
  }
  BasicMatrix(std::initializer_list<std::initializer_list<T>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) throw ShapeError("ragged matrix literal");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const noexcept {
    return data_[r * cols_ + c];
  }

  std::span<T> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }
  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }

  bool operator==(const BasicMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using Matrix = BasicMatrix<double>;
using MatrixF = BasicMatrix<float>;
using Vector = std::vector<double>;

namespace linalg {

/// Tuning knobs for cosine_matrix. The result does not depend on either value:
/// every output entry is one dot product evaluated in a fixed order.
struct CosineOptions {
  /// Rows/columns per cache tile.
  std::size_t block = 64;
  /// Worker threads; each owns a disjoint band of output rows.
  unsigned threads = 1;
};

/// Throws DomainError naming the first non-finite entry.
void require_finite(std::span<const double> values, const std::string& what);

/// a (n x k) times b (k x m).
Matrix matmul(const Matrix& a, const Matrix& b);

/// a (n x k) times transpose of b (m x k).
Matrix matmul_transposed(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& a);

Vector row_norms(const Matrix& a);

/// Scales every row to unit L2 norm. A zero row raises DomainError naming its index.
Matrix row_l2_normalize(const Matrix& a);

/// Entry (i, j) is the cosine between row i of a and row j of b, clamped to [-1, 1].
Matrix cosine_matrix(const Matrix& a, const Matrix& b, const CosineOptions& opts = {});

/// Single-precision result, for cost matrices too large to hold in double.
MatrixF cosine_matrix_f32(const Matrix& a, const Matrix& b, const CosineOptions& opts = {});

/// Indices of the min(k, size) largest entries, ordered by decreasing value.
/// Ties go to the lower index.
std::vector<std::size_t> topk_select(std::span<const double> values, std::size_t k);

}  // namespace linalg
}  // namespace seedalign
