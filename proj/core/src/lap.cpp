// Copyright 2026 The seedalign Authors
// SPDX-License-Identifier: Apache-2.0

#include "seedalign/lap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <string>

namespace seedalign::lap {

namespace {

constexpr std::size_t kUnassigned = std::numeric_limits<std::size_t>::max();
constexpr double kInf = std::numeric_limits<double>::infinity();

template <typename T>
double validate_square(const BasicMatrix<T>& s) {
  if (s.rows() != s.cols()) {
    throw ShapeError("assignment needs a square matrix, got " + std::to_string(s.rows()) + "x" +
                     std::to_string(s.cols()));
  }
  double hi = -kInf;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double v = static_cast<double>(s.values()[i]);
    if (!std::isfinite(v)) {
      throw DomainError("similarity matrix has a non-finite entry at (" +
                        std::to_string(i / s.cols()) + ", " + std::to_string(i % s.cols()) + ")");
    }
    hi = std::max(hi, v);
  }
  return hi;
}

template <typename T>
Assignment finish(const BasicMatrix<T>& s, std::vector<std::size_t> perm) {
  Assignment a;
  a.per_pair.resize(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    a.per_pair[i] = static_cast<double>(s(i, perm[i]));
    a.total += a.per_pair[i];
  }
  a.perm = std::move(perm);
  return a;
}

// Frontier ordering: smaller reduced distance, then unassigned columns, then lower index.
inline bool frontier_before(double dist, bool assigned, std::size_t col, double best_dist,
                            bool best_assigned, std::size_t best_col) {
  if (dist != best_dist) return dist < best_dist;
  if (assigned != best_assigned) return !assigned;
  return col < best_col;
}

template <typename T>
Assignment solve_dense(const BasicMatrix<T>& s) {
  const double hi = validate_square(s);
  const std::size_t n = s.rows();
  if (n == 0) return {};

  std::vector<double> u(n, 0.0);  // row potentials
  std::vector<double> v(n, 0.0);  // column potentials
  std::vector<std::size_t> col4row(n, kUnassigned);
  std::vector<std::size_t> row4col(n, kUnassigned);
  std::vector<double> dist(n);
  std::vector<std::size_t> path(n);
  std::vector<char> scanned_col(n);
  std::vector<std::size_t> visited_rows;
  std::vector<std::size_t> visited_cols;
  visited_rows.reserve(n);
  visited_cols.reserve(n);

  // Column reduction: v_j = min_i cost(i, j) keeps every reduced cost nonnegative.
  for (std::size_t j = 0; j < n; ++j) v[j] = kInf;
  for (std::size_t i = 0; i < n; ++i) {
    const T* row = s.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) v[j] = std::min(v[j], hi - static_cast<double>(row[j]));
  }

  for (std::size_t start = 0; start < n; ++start) {
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(scanned_col.begin(), scanned_col.end(), 0);
    visited_rows.clear();
    visited_cols.clear();

    double reach = 0.0;  // distance of the most recently settled column
    std::size_t i = start;
    std::size_t sink = kUnassigned;
    while (sink == kUnassigned) {
      visited_rows.push_back(i);
      const T* row = s.data() + i * n;
      const double base = reach - u[i];
      double best = kInf;
      bool best_assigned = true;
      std::size_t best_col = kUnassigned;
      for (std::size_t j = 0; j < n; ++j) {
        if (scanned_col[j]) continue;
        const double r = base + (hi - static_cast<double>(row[j])) - v[j];
        if (r < dist[j]) {
          dist[j] = r;
          path[j] = i;
        }
        const bool assigned = row4col[j] != kUnassigned;
        if (best_col == kUnassigned ||
            frontier_before(dist[j], assigned, j, best, best_assigned, best_col)) {
          best = dist[j];
          best_assigned = assigned;
          best_col = j;
        }
      }
      reach = best;
      scanned_col[best_col] = 1;
      visited_cols.push_back(best_col);
      if (row4col[best_col] == kUnassigned) {
        sink = best_col;
      } else {
        i = row4col[best_col];
      }
    }

    u[start] += reach;
    for (std::size_t r : visited_rows)
      if (r != start) u[r] += reach - dist[col4row[r]];
    for (std::size_t c : visited_cols) v[c] -= reach - dist[c];

    for (std::size_t j = sink;;) {
      const std::size_t r = path[j];
      row4col[j] = r;
      std::swap(col4row[r], j);
      if (r == start) break;
    }
  }
  return finish(s, std::move(col4row));
}

template <typename T>
ArgmaxMatch argmax_impl(const BasicMatrix<T>& s) {
  ArgmaxMatch out;
  out.index.resize(s.rows());
  out.similarity.resize(s.rows());
  if (s.cols() == 0) throw ShapeError("argmax_matching needs at least one column");
  for (std::size_t i = 0; i < s.rows(); ++i) {
    const auto row = s.row(i);
    std::size_t best = 0;
    for (std::size_t j = 1; j < row.size(); ++j)
      if (row[j] > row[best]) best = j;
    out.index[i] = best;
    out.similarity[i] = static_cast<double>(row[best]);
  }
  return out;
}

}  // namespace

Assignment solve_assignment_max(const Matrix& similarity) { return solve_dense(similarity); }

Assignment solve_assignment_max(const MatrixF& similarity) { return solve_dense(similarity); }

Assignment brute_force_assignment(const Matrix& similarity) {
  validate_square(similarity);
  const std::size_t n = similarity.rows();
  if (n > 10) {
    throw DomainError("brute_force_assignment is limited to n <= 10, got " + std::to_string(n));
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::vector<std::size_t> best = perm;
  double best_total = assignment_total(similarity, perm);
  while (std::next_permutation(perm.begin(), perm.end())) {
    const double total = assignment_total(similarity, perm);
    if (total > best_total) {
      best_total = total;
      best = perm;
    }
  }
  return finish(similarity, std::move(best));
}

ArgmaxMatch argmax_matching(const Matrix& similarity) { return argmax_impl(similarity); }

ArgmaxMatch argmax_matching(const MatrixF& similarity) { return argmax_impl(similarity); }

CandidateLists top_candidates(const Matrix& similarity, std::size_t per_row) {
  CandidateLists out(similarity.rows());
  for (std::size_t i = 0; i < similarity.rows(); ++i) {
    const auto row = similarity.row(i);
    for (std::size_t j : linalg::topk_select(row, per_row)) out[i].push_back({j, row[j]});
  }
  return out;
}

Assignment solve_assignment_sparse(const CandidateLists& candidates) {
  const std::size_t n = candidates.size();
  double hi = -kInf;
  for (std::size_t i = 0; i < n; ++i) {
    if (candidates[i].empty()) {
      throw InfeasibleError("row " + std::to_string(i) + " has no candidates");
    }
    for (const auto& c : candidates[i]) {
      if (c.col >= n) {
        throw ShapeError("row " + std::to_string(i) + " names column " + std::to_string(c.col) +
                         " outside 0.." + std::to_string(n - 1));
      }
      if (!std::isfinite(c.similarity)) {
        throw DomainError("row " + std::to_string(i) + " has a non-finite candidate");
      }
      hi = std::max(hi, c.similarity);
    }
  }

  std::vector<double> u(n, 0.0);
  std::vector<double> v(n, 0.0);
  std::vector<std::size_t> col4row(n, kUnassigned);
  std::vector<std::size_t> row4col(n, kUnassigned);
  std::vector<double> dist(n, kInf);
  std::vector<std::size_t> path(n);
  std::vector<char> scanned_col(n, 0);
  std::vector<std::size_t> visited_rows;
  std::vector<std::size_t> touched_cols;

  struct Entry {
    double dist;
    bool assigned;
    std::size_t col;
  };
  auto later = [](const Entry& a, const Entry& b) {
    return frontier_before(b.dist, b.assigned, b.col, a.dist, a.assigned, a.col);
  };

  for (std::size_t start = 0; start < n; ++start) {
    for (std::size_t c : touched_cols) {
      dist[c] = kInf;
      scanned_col[c] = 0;
    }
    touched_cols.clear();
    visited_rows.clear();
    std::priority_queue<Entry, std::vector<Entry>, decltype(later)> frontier(later);

    double reach = 0.0;
    std::size_t i = start;
    std::size_t sink = kUnassigned;
    while (sink == kUnassigned) {
      visited_rows.push_back(i);
      for (const auto& c : candidates[i]) {
        const std::size_t j = c.col;
        if (scanned_col[j]) continue;
        const double r = reach + (hi - c.similarity) - u[i] - v[j];
        if (r < dist[j]) {
          if (dist[j] == kInf) touched_cols.push_back(j);
          dist[j] = r;
          path[j] = i;
          frontier.push({r, row4col[j] != kUnassigned, j});
        }
      }
      std::size_t next = kUnassigned;
      while (!frontier.empty()) {
        const Entry top = frontier.top();
        frontier.pop();
        if (!scanned_col[top.col] && top.dist == dist[top.col]) {
          next = top.col;
          break;
        }
      }
      if (next == kUnassigned) {
        throw InfeasibleError("candidate lists admit no perfect matching (row " +
                              std::to_string(start) + " cannot be augmented)");
      }
      reach = dist[next];
      scanned_col[next] = 1;
      if (row4col[next] == kUnassigned) {
        sink = next;
      } else {
        i = row4col[next];
      }
    }

    u[start] += reach;
    for (std::size_t r : visited_rows)
      if (r != start) u[r] += reach - dist[col4row[r]];
    for (std::size_t c : touched_cols)
      if (scanned_col[c]) v[c] -= reach - dist[c];

    for (std::size_t j = sink;;) {
      const std::size_t r = path[j];
      row4col[j] = r;
      std::swap(col4row[r], j);
      if (r == start) break;
    }
  }

  Assignment a;
  a.perm = std::move(col4row);
  a.per_pair.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (const auto& c : candidates[r]) {
      if (c.col == a.perm[r]) {
        a.per_pair[r] = c.similarity;
        break;
      }
    }
    a.total += a.per_pair[r];
  }
  a.approximate = true;
  return a;
}

bool is_permutation(std::span<const std::size_t> perm) {
  std::vector<bool> seen(perm.size(), false);
  for (std::size_t v : perm) {
    if (v >= perm.size() || seen[v]) return false;
    seen[v] = true;
  }
  return true;
}

double assignment_total(const Matrix& similarity, std::span<const std::size_t> perm) {
  double total = 0.0;
  for (std::size_t i = 0; i < perm.size(); ++i) total += similarity(i, perm[i]);
  return total;
}

}  // namespace seedalign::lap
