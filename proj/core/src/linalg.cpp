// Copyright 2026 The seedalign Authors
// SPDX-License-Identifier: Apache-2.0

#include "seedalign/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

namespace seedalign::linalg {

namespace {

std::string shape_of(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

// Rows of `a` divided by their norms; `what` names the operand in errors.
Matrix normalized_rows(const Matrix& a, const char* what) {
  Matrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto src = a.row(i);
    double sq = 0.0;
    for (double v : src) {
      if (!std::isfinite(v)) {
        throw DomainError(std::string(what) + " row " + std::to_string(i) +
                          " has a non-finite entry");
      }
      sq += v * v;
    }
    const double norm = std::sqrt(sq);
    if (norm == 0.0) {
      throw DomainError(std::string(what) + " row " + std::to_string(i) + " has zero norm");
    }
    auto dst = out.row(i);
    for (std::size_t c = 0; c < src.size(); ++c) dst[c] = src[c] / norm;
  }
  return out;
}

template <typename T>
BasicMatrix<T> cosine_impl(const Matrix& a, const Matrix& b, const CosineOptions& opts) {
  if (a.cols() == 0 || a.cols() != b.cols()) {
    throw ShapeError("cosine_matrix needs equal nonzero widths, got " + shape_of(a) +
                     " and " + shape_of(b));
  }
  const Matrix an = normalized_rows(a, "left operand");
  const Matrix bn = normalized_rows(b, "right operand");
  const std::size_t m1 = an.rows();
  const std::size_t m2 = bn.rows();
  const std::size_t d = an.cols();
  const std::size_t block = std::max<std::size_t>(opts.block, 1);
  BasicMatrix<T> out(m1, m2);

  auto band = [&](std::size_t row_begin, std::size_t row_end) {
    for (std::size_t i0 = row_begin; i0 < row_end; i0 += block) {
      const std::size_t i1 = std::min(i0 + block, row_end);
      for (std::size_t j0 = 0; j0 < m2; j0 += block) {
        const std::size_t j1 = std::min(j0 + block, m2);
        for (std::size_t i = i0; i < i1; ++i) {
          const double* ai = an.data() + i * d;
          T* orow = out.data() + i * m2;
          for (std::size_t j = j0; j < j1; ++j) {
            const double* bj = bn.data() + j * d;
            double dot = 0.0;
            for (std::size_t c = 0; c < d; ++c) dot += ai[c] * bj[c];
            orow[j] = static_cast<T>(std::clamp(dot, -1.0, 1.0));
          }
        }
      }
    }
  };

  const unsigned threads = std::max(1u, opts.threads);
  if (threads == 1 || m1 < 2 * block) {
    band(0, m1);
    return out;
  }
  // Bands are whole tiles so the per-entry arithmetic is identical to the serial path.
  const std::size_t tiles = (m1 + block - 1) / block;
  const std::size_t per = (tiles + threads - 1) / threads;
  std::vector<std::jthread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    const std::size_t begin = std::min(t * per * block, m1);
    const std::size_t end = std::min((t + 1) * per * block, m1);
    if (begin < end) pool.emplace_back(band, begin, end);
  }
  return out;
}

}  // namespace

void require_finite(std::span<const double> values, const std::string& what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw DomainError(what + " has a non-finite entry at flat index " + std::to_string(i));
    }
  }
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul shape mismatch: " + shape_of(a) + " * " + shape_of(b));
  }
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto orow = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      const auto brow = b.row(k);
      for (std::size_t j = 0; j < brow.size(); ++j) orow[j] += aik * brow[j];
    }
  }
  return out;
}

Matrix matmul_transposed(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw ShapeError("matmul_transposed shape mismatch: " + shape_of(a) + " * " +
                     shape_of(b) + "^T");
  }
  Matrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto arow = a.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const auto brow = b.row(j);
      double dot = 0.0;
      for (std::size_t k = 0; k < arow.size(); ++k) dot += arow[k] * brow[k];
      out(i, j) = dot;
    }
  }
  return out;
}

Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

Vector row_norms(const Matrix& a) {
  Vector out(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double sq = 0.0;
    for (double v : a.row(i)) sq += v * v;
    out[i] = std::sqrt(sq);
  }
  return out;
}

Matrix row_l2_normalize(const Matrix& a) { return normalized_rows(a, "matrix"); }

Matrix cosine_matrix(const Matrix& a, const Matrix& b, const CosineOptions& opts) {
  return cosine_impl<double>(a, b, opts);
}

MatrixF cosine_matrix_f32(const Matrix& a, const Matrix& b, const CosineOptions& opts) {
  return cosine_impl<float>(a, b, opts);
}

std::vector<std::size_t> topk_select(std::span<const double> values, std::size_t k) {
  const std::size_t take = std::min(k, values.size());
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  auto before = [&](std::size_t x, std::size_t y) {
    return values[x] > values[y] || (values[x] == values[y] && x < y);
  };
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take), idx.end(),
                    before);
  idx.resize(take);
  return idx;
}

}  // namespace seedalign::linalg
