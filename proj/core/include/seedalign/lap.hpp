// Copyright 2026 The seedalign Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "seedalign/error.hpp"
#include "seedalign/linalg.hpp"

namespace seedalign::lap {

/// Bijection between two equal-size latent sets.
struct Assignment {
  /// perm[i] is the column (second-set index) matched to row i.
  std::vector<std::size_t> perm;
  /// Sum of per_pair, accumulated in row order.
  double total = 0.0;
  std::vector<double> per_pair;
  /// Set by the sparse solver: optimal only over the supplied candidates.
  bool approximate = false;
};

/// Candidate support has no perfect matching.
class InfeasibleError : public Error {
 public:
  explicit InfeasibleError(const std::string& msg) : Error(msg) {}
};

/// Exact maximum-weight perfect matching of a square similarity matrix.
///
/// Shortest augmenting paths (Jonker-Volgenant family) with row/column
/// potentials, minimizing max(S) - S. Columns are scanned in ascending order
/// and ties in the Dijkstra frontier prefer unassigned, then lower-index
/// columns, so the result is a pure function of the input.
///
/// Memory beyond the input is O(n). The float overload lets n = 2^15 fit in
/// 4 GiB; potentials are kept in double either way.
Assignment solve_assignment_max(const Matrix& similarity);
Assignment solve_assignment_max(const MatrixF& similarity);

/// Exhaustive search over all n! permutations (n <= 10). Among equal totals
/// the lexicographically smallest permutation wins.
Assignment brute_force_assignment(const Matrix& similarity);

/// Non-bijective nearest-neighbor map: row i goes to its largest column
/// (lowest index on ties).
struct ArgmaxMatch {
  std::vector<std::size_t> index;
  std::vector<double> similarity;
};

ArgmaxMatch argmax_matching(const Matrix& similarity);
ArgmaxMatch argmax_matching(const MatrixF& similarity);

struct Candidate {
  std::size_t col;
  double similarity;
};

/// Per-row candidate lists for the sparse solver.
using CandidateLists = std::vector<std::vector<Candidate>>;

/// The `per_row` largest entries of each row (lowest index on ties).
CandidateLists top_candidates(const Matrix& similarity, std::size_t per_row);

/// Maximum-weight perfect matching restricted to the candidate edges.
/// Pairs outside the lists are not allowed; InfeasibleError is thrown when
/// the lists admit no perfect matching. The result is flagged approximate.
Assignment solve_assignment_sparse(const CandidateLists& candidates);

bool is_permutation(std::span<const std::size_t> perm);

/// Sum of S[i, perm[i]] in row order.
double assignment_total(const Matrix& similarity, std::span<const std::size_t> perm);

}  // namespace seedalign::lap
