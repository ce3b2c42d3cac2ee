// Copyright 2026 The seedalign Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "seedalign/align.hpp"
#include "seedalign/sae.hpp"

namespace seedalign::multiseed {

/// N SAEs of identical shape plus their cached pairwise alignments.
class SeedEnsemble {
 public:
  explicit SeedEnsemble(std::vector<sae::SaeParams> saes, align::SharedCriterion crit = {});

  std::size_t size() const noexcept { return saes_.size(); }
  std::size_t latents() const noexcept { return saes_.front().latents(); }
  const sae::SaeParams& sae(std::size_t i) const { return saes_.at(i); }
  const align::SharedCriterion& criterion() const noexcept { return crit_; }

  /// Aligns every unordered pair. Pairs are distributed over `threads`
  /// workers; the result does not depend on the thread count.
  void pairwise_matchings(unsigned threads = 1, const align::AlignOptions& opts = {});

  bool populated() const noexcept { return pairs_.size() == pair_total(); }
  std::size_t pair_total() const noexcept { return saes_.size() * (saes_.size() - 1) / 2; }

  /// Cached alignment of (i, j), i < j, from the perspective of i.
  const align::PairAlignment& pair(std::size_t i, std::size_t j) const;

  /// Match records with `base` as the first SAE.
  std::vector<align::MatchRecord> records(std::size_t base, std::size_t other) const;

  /// Per-latent shared verdicts of `base` against `other`.
  std::vector<bool> shared_mask(std::size_t base, std::size_t other) const;

 private:
  void require_populated() const;

  std::vector<sae::SaeParams> saes_;
  align::SharedCriterion crit_;
  std::map<std::pair<std::size_t, std::size_t>, align::PairAlignment> pairs_;
};

struct OverlapRow {
  std::size_t k = 0;             // subset size
  std::size_t combinations = 0;  // C(N, k)
  std::size_t runs = 0;          // k * C(N, k)
  double mean_only_in_base = 0.0;
  double min_only_in_base = 0.0;
  double max_only_in_base = 0.0;
};

/// Fraction of latents found only in the base SAE, averaged over every
/// k-subset of the ensemble and every choice of base inside it, k = 2..N.
std::vector<OverlapRow> only_in_base_curve(const SeedEnsemble& ensemble);

/// Number of other seeds with which each latent of `base` is shared.
std::vector<std::size_t> shared_count_per_latent(const SeedEnsemble& ensemble, std::size_t base);

/// Mean over other seeds of the average of encoder and decoder matched cosines.
std::vector<double> mean_matched_cosine_per_latent(const SeedEnsemble& ensemble, std::size_t base);

/// Firing-count bin edges: a 1-2-5 ladder from 0 to 500 followed by steps of
/// 500 up to 4000. Bin i covers [edges[i], edges[i+1]); the last bin is open.
std::vector<double> default_frequency_edges();

struct FrequencyTable {
  std::vector<double> edges;
  /// histogram[s][b]: latents shared with exactly s other seeds whose firing count falls in bin b.
  std::vector<std::vector<std::uint64_t>> histogram;
  /// firing[s]: firing counts of the latents shared with exactly s seeds, in latent order.
  std::vector<std::vector<std::uint64_t>> firing;
};

/// Stacked-histogram source data of firing frequency against sharing count.
/// `max_shared` is N - 1 for an ensemble of N seeds.
FrequencyTable frequency_vs_sharing_table(const sae::FiringStats& stats,
                                          std::span<const std::size_t> shared_counts,
                                          std::size_t max_shared,
                                          std::span<const double> edges = {});

/// y = a * k^(-b) + c, c fixed at zero when with_offset is false.
struct PowerLawFit {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double residual_ss = 0.0;
  bool with_offset = false;

  double operator()(double k) const;
};

/// Multi-start Levenberg-Marquardt least squares. Starts are log-spaced in
/// b over [0.1, 4]; c is confined to [0, max(0, min y)]. The offset fit is
/// also started from the no-offset optimum, so its residual never exceeds it.
PowerLawFit fit_power_law(std::span<const double> ks, std::span<const double> ys,
                          bool with_offset);

/// Which number stands for the alignment of a matched pair.
enum class AlignmentMeasure { Mean, Encoder, Decoder };

struct ScoreBinOptions {
  /// Bin i covers [edges[i], edges[i+1]); the last bin also includes its upper edge.
  std::vector<double> edges{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  double tau = 0.7;
  AlignmentMeasure measure = AlignmentMeasure::Mean;
  /// Pair each latent with its decoder counterpart (true) or encoder counterpart.
  bool decoder_counterpart = true;
};

struct ScorePair {
  std::size_t latent_a = 0;
  std::size_t latent_b = 0;
  double alignment = 0.0;
  double score_a = 0.0;
  double score_b = 0.0;
};

struct ScoreBin {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<ScorePair> pairs;
  double mean_a = 0.0;
  double mean_b = 0.0;
  /// Example pair: max min(score_a, score_b) when alignment >= tau,
  /// otherwise max score_a - score_b. Lowest latent wins ties.
  std::optional<ScorePair> selected;
};

/// Bins paired explanation scores of matched latents by alignment. Latents
/// with a missing score on either side are skipped.
std::vector<ScoreBin> score_alignment_table(std::span<const std::optional<double>> scores_a,
                                            std::span<const std::optional<double>> scores_b,
                                            std::span<const align::MatchRecord> records,
                                            const ScoreBinOptions& opts = {});

}  // namespace seedalign::multiseed
