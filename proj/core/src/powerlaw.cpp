// Copyright 2026 The seedalign Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "seedalign/multiseed.hpp"

namespace seedalign::multiseed {

namespace {

constexpr int kStarts = 24;
constexpr double kMinStartB = 0.1;
constexpr double kMaxStartB = 4.0;
constexpr int kMaxIterations = 500;

struct Problem {
  std::span<const double> ks;
  std::span<const double> ys;
  bool with_offset;
  double c_max;
};

using Params = std::array<double, 3>;  // a, b, c

double residual_ss(const Problem& pr, const Params& p) {
  double ss = 0.0;
  for (std::size_t i = 0; i < pr.ks.size(); ++i) {
    const double r = p[0] * std::pow(pr.ks[i], -p[1]) + p[2] - pr.ys[i];
    ss += r * r;
  }
  return ss;
}

// Solves the n x n system in place (n <= 3) with partial pivoting. Returns false if singular.
template <std::size_t N>
bool solve_small(std::array<std::array<double, N>, N> a, std::array<double, N> rhs, int n,
                 std::array<double, N>& x) {
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (std::abs(a[piv][col]) < 1e-300) return false;
    std::swap(a[col], a[piv]);
    std::swap(rhs[col], rhs[piv]);
    for (int r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (int c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      rhs[r] -= f * rhs[col];
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    double s = rhs[r];
    for (int c = r + 1; c < n; ++c) s -= a[r][c] * x[c];
    x[r] = s / a[r][r];
  }
  return true;
}

// For fixed b the model is linear in (a, c); least squares with c clamped to its box.
Params linear_start(const Problem& pr, double b) {
  const std::size_t n = pr.ks.size();
  double sff = 0, sf = 0, sy = 0, sfy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = std::pow(pr.ks[i], -b);
    sff += f * f;
    sf += f;
    sy += pr.ys[i];
    sfy += f * pr.ys[i];
  }
  Params p{sfy / sff, b, 0.0};
  if (!pr.with_offset) return p;
  const double det = sff * static_cast<double>(n) - sf * sf;
  double c = std::abs(det) > 1e-300 ? (sff * sy - sf * sfy) / det : 0.0;
  c = std::clamp(c, 0.0, pr.c_max);
  p[0] = (sfy - c * sf) / sff;
  p[2] = c;
  return p;
}

Params levenberg_marquardt(const Problem& pr, Params p) {
  const int np = pr.with_offset ? 3 : 2;
  double cost = residual_ss(pr, p);
  double lambda = 1e-3;
  for (int iter = 0; iter < kMaxIterations && cost > 0.0; ++iter) {
    std::array<std::array<double, 3>, 3> jtj{};
    std::array<double, 3> jtr{};
    for (std::size_t i = 0; i < pr.ks.size(); ++i) {
      const double kb = std::pow(pr.ks[i], -p[1]);
      const double r = p[0] * kb + p[2] - pr.ys[i];
      const std::array<double, 3> j{kb, -p[0] * std::log(pr.ks[i]) * kb, 1.0};
      for (int u = 0; u < np; ++u) {
        jtr[u] += j[u] * r;
        for (int v = 0; v < np; ++v) jtj[u][v] += j[u] * j[v];
      }
    }
    bool improved = false;
    while (lambda < 1e16) {
      auto damped = jtj;
      std::array<double, 3> rhs{};
      for (int u = 0; u < np; ++u) {
        damped[u][u] += lambda * std::max(jtj[u][u], 1e-12);
        rhs[u] = -jtr[u];
      }
      std::array<double, 3> step{};
      if (solve_small<3>(damped, rhs, np, step)) {
        Params trial = p;
        for (int u = 0; u < np; ++u) trial[u] += step[u];
        if (pr.with_offset) trial[2] = std::clamp(trial[2], 0.0, pr.c_max);
        const double trial_cost = residual_ss(pr, trial);
        if (std::isfinite(trial_cost) && trial_cost < cost) {
          const double gain = cost - trial_cost;
          p = trial;
          cost = trial_cost;
          lambda = std::max(lambda * 0.1, 1e-15);
          improved = true;
          if (gain <= 1e-15 * cost) return p;
          break;
        }
      }
      lambda *= 10.0;
    }
    if (!improved) break;
  }
  return p;
}

PowerLawFit best_of_starts(const Problem& pr, const Params* extra_start) {
  PowerLawFit best;
  best.with_offset = pr.with_offset;
  best.residual_ss = std::numeric_limits<double>::infinity();
  auto consider = [&](const Params& start) {
    const Params p = levenberg_marquardt(pr, start);
    const double ss = residual_ss(pr, p);
    if (std::isfinite(ss) && ss < best.residual_ss) {
      best.a = p[0];
      best.b = p[1];
      best.c = p[2];
      best.residual_ss = ss;
    }
  };
  const double ratio = std::log(kMaxStartB / kMinStartB);
  for (int s = 0; s < kStarts; ++s) {
    const double b = kMinStartB * std::exp(ratio * s / (kStarts - 1));
    consider(linear_start(pr, b));
  }
  if (extra_start != nullptr) consider(*extra_start);
  return best;
}

}  // namespace

double PowerLawFit::operator()(double k) const { return a * std::pow(k, -b) + c; }

PowerLawFit fit_power_law(std::span<const double> ks, std::span<const double> ys,
                          bool with_offset) {
  if (ks.size() != ys.size()) throw ShapeError("ks and ys differ in length");
  const std::size_t need = with_offset ? 4 : 3;
  if (ks.size() < need) {
    throw DomainError("power-law fit needs at least " + std::to_string(need) + " points");
  }
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (!(ks[i] > 0.0) || !std::isfinite(ks[i]) || !std::isfinite(ys[i])) {
      throw DomainError("power-law fit needs finite data with positive k (point " +
                        std::to_string(i) + ")");
    }
  }
  if (std::all_of(ks.begin(), ks.end(), [&](double k) { return k == ks.front(); })) {
    throw DomainError("power-law fit is degenerate: all k values are equal");
  }

  const double y_min = *std::min_element(ys.begin(), ys.end());
  const Problem plain{ks, ys, false, 0.0};
  PowerLawFit no_offset = best_of_starts(plain, nullptr);
  if (!with_offset) return no_offset;

  const Problem offset{ks, ys, true, std::max(0.0, y_min)};
  const Params nested{no_offset.a, no_offset.b, 0.0};
  return best_of_starts(offset, &nested);
}

}  // namespace seedalign::multiseed
