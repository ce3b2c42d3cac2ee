// Copyright 2026 The seedalign Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "seedalign/lap.hpp"
#include "seedalign/sae.hpp"

namespace seedalign::align {

/// When a latent counts as shared between two SAEs.
struct SharedCriterion {
  double tau = 0.7;
  /// Require the encoder and decoder matchings to pick the same counterpart.
  bool require_same_counterpart = true;
};

/// Alignment verdict for one latent of the first SAE.
struct MatchRecord {
  std::size_t latent = 0;
  std::size_t enc_counterpart = 0;
  std::size_t dec_counterpart = 0;
  double cos_enc = 0.0;
  double cos_dec = 0.0;
  double max_cos_enc = 0.0;
  double max_cos_dec = 0.0;
  bool shared = false;

  bool operator==(const MatchRecord&) const = default;
};

enum class MatchMode {
  /// One matching on encoder cosines and one on decoder cosines.
  Independent,
  /// A single matching on the mean of the two cosine matrices, used for both sides.
  Combined,
};

enum class CostPrecision { F64, F32 };

struct AlignOptions {
  MatchMode mode = MatchMode::Independent;
  CostPrecision precision = CostPrecision::F64;
  linalg::CosineOptions cosine{};
};

/// Mean cosines over the latents of one group (all, agreeing, disagreeing).
struct CosineMeans {
  std::size_t count = 0;
  double enc = 0.0;
  double dec = 0.0;
  double mean = 0.0;  // average of enc and dec
};

struct AlignSummary {
  std::size_t latents = 0;
  double mean_matched_enc = 0.0;  // overall alignment score, encoder side
  double mean_matched_dec = 0.0;
  double mean_max_enc = 0.0;
  double mean_max_dec = 0.0;
  double shared_fraction = 0.0;
  /// Fraction of latents whose encoder and decoder matchings pick the same counterpart.
  double agreement_fraction = 0.0;
  CosineMeans agreeing;
  CosineMeans disagreeing;
};

struct PairAlignment {
  std::vector<MatchRecord> records;
  AlignSummary summary;
  lap::Assignment enc;
  lap::Assignment dec;
  /// Column maxima of the cosine matrices (best match of each latent of b in a).
  std::vector<double> reverse_max_enc;
  std::vector<double> reverse_max_dec;
};

bool classify_shared(std::size_t enc_counterpart, std::size_t dec_counterpart, double cos_enc,
                     double cos_dec, const SharedCriterion& crit);

/// Matches the latents of `b` to those of `a` on encoder and decoder directions.
PairAlignment align_pair(const sae::SaeParams& a, const sae::SaeParams& b,
                         const SharedCriterion& crit = {}, const AlignOptions& opts = {});

/// Recomputes summary statistics from records.
AlignSummary summarize(std::span<const MatchRecord> records);

double shared_fraction(std::span<const MatchRecord> records);

struct SweepRow {
  double tau = 0.0;
  double shared_fraction = 0.0;
};

/// Shared fraction at each threshold. taus must be ascending.
std::vector<SweepRow> threshold_sweep(std::span<const MatchRecord> records,
                                      std::span<const double> taus,
                                      bool require_same_counterpart = true);

struct MatchedVsMaxRow {
  std::size_t latent = 0;
  double enc_matched = 0.0;
  double enc_max = 0.0;
  double dec_matched = 0.0;
  double dec_max = 0.0;
};

struct MatchedVsMaxReport {
  std::vector<MatchedVsMaxRow> rows;
  /// Fraction of latents whose row maximum exceeds the matched cosine by more than 1e-6.
  double enc_exceed_fraction = 0.0;
  double dec_exceed_fraction = 0.0;
};

MatchedVsMaxReport matched_vs_max_report(std::span<const MatchRecord> records);

/// Records from the perspective of the second SAE, derived by inverting both
/// matchings. Equivalent to align_pair(b, a) whenever the optimal matchings are unique.
std::vector<MatchRecord> reverse_records(const PairAlignment& pair, const SharedCriterion& crit);

}  // namespace seedalign::align
