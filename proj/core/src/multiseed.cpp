// Copyright 2026 The seedalign Authors
// SPDX-License-Identifier: Apache-2.0

#include "seedalign/multiseed.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <string>
#include <thread>

namespace seedalign::multiseed {

namespace {

constexpr std::size_t kMaxEnsemble = 24;

std::size_t binomial(std::size_t n, std::size_t k) {
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Latent-wise bitmask of the other seeds each latent of `base` is shared with.
std::vector<std::uint32_t> partner_bits(const SeedEnsemble& e, std::size_t base) {
  std::vector<std::uint32_t> bits(e.latents(), 0);
  for (std::size_t other = 0; other < e.size(); ++other) {
    if (other == base) continue;
    const auto mask = e.shared_mask(base, other);
    for (std::size_t l = 0; l < mask.size(); ++l)
      if (mask[l]) bits[l] |= std::uint32_t{1} << other;
  }
  return bits;
}

std::size_t bin_of(double value, std::span<const double> edges) {
  // Last edge whose value is <= `value`.
  const auto it = std::upper_bound(edges.begin(), edges.end(), value);
  return static_cast<std::size_t>(it - edges.begin()) - 1;
}

}  // namespace

SeedEnsemble::SeedEnsemble(std::vector<sae::SaeParams> saes, align::SharedCriterion crit)
    : saes_(std::move(saes)), crit_(crit) {
  if (saes_.size() < 2) throw DomainError("an ensemble needs at least two SAEs");
  if (saes_.size() > kMaxEnsemble) {
    throw DomainError("ensembles are limited to " + std::to_string(kMaxEnsemble) + " SAEs");
  }
  const auto& first = saes_.front();
  for (std::size_t i = 0; i < saes_.size(); ++i) {
    sae::validate_shapes(saes_[i]);
    if (saes_[i].latents() != first.latents() || saes_[i].dim() != first.dim()) {
      throw ShapeError("SAE " + std::to_string(i) + " is " + std::to_string(saes_[i].latents()) +
                       "x" + std::to_string(saes_[i].dim()) + ", expected " +
                       std::to_string(first.latents()) + "x" + std::to_string(first.dim()));
    }
    if (saes_[i].arch != first.arch) {
      throw ShapeError("SAE " + std::to_string(i) + " has a different architecture");
    }
  }
}

void SeedEnsemble::pairwise_matchings(unsigned threads, const align::AlignOptions& opts) {
  std::vector<std::pair<std::size_t, std::size_t>> todo;
  for (std::size_t i = 0; i < saes_.size(); ++i)
    for (std::size_t j = i + 1; j < saes_.size(); ++j) todo.emplace_back(i, j);

  std::vector<align::PairAlignment> results(todo.size());
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(todo.size());
  auto worker = [&] {
    for (std::size_t t = next++; t < todo.size(); t = next++) {
      try {
        results[t] = align::align_pair(saes_[todo[t].first], saes_[todo[t].second], crit_, opts);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    }
  };
  const unsigned workers = std::clamp<unsigned>(threads, 1, static_cast<unsigned>(todo.size()));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  for (const auto& err : errors)
    if (err) std::rethrow_exception(err);

  pairs_.clear();
  for (std::size_t t = 0; t < todo.size(); ++t) pairs_.emplace(todo[t], std::move(results[t]));
}

void SeedEnsemble::require_populated() const {
  if (!populated()) throw DomainError("pairwise_matchings has not been run on this ensemble");
}

const align::PairAlignment& SeedEnsemble::pair(std::size_t i, std::size_t j) const {
  require_populated();
  const auto it = pairs_.find({i, j});
  if (it == pairs_.end()) {
    throw DomainError("no cached alignment for pair (" + std::to_string(i) + ", " +
                      std::to_string(j) + ")");
  }
  return it->second;
}

std::vector<align::MatchRecord> SeedEnsemble::records(std::size_t base, std::size_t other) const {
  if (base >= size() || other >= size() || base == other) {
    throw DomainError("invalid seed pair (" + std::to_string(base) + ", " +
                      std::to_string(other) + ")");
  }
  if (base < other) return pair(base, other).records;
  return align::reverse_records(pair(other, base), crit_);
}

std::vector<bool> SeedEnsemble::shared_mask(std::size_t base, std::size_t other) const {
  const auto recs = records(base, other);
  std::vector<bool> mask(recs.size());
  for (std::size_t l = 0; l < recs.size(); ++l) mask[l] = recs[l].shared;
  return mask;
}

std::vector<OverlapRow> only_in_base_curve(const SeedEnsemble& ensemble) {
  const std::size_t n = ensemble.size();
  const std::size_t m = ensemble.latents();
  std::vector<std::vector<std::uint32_t>> bits(n);
  for (std::size_t b = 0; b < n; ++b) bits[b] = partner_bits(ensemble, b);

  std::vector<OverlapRow> rows;
  for (std::size_t k = 2; k <= n; ++k) {
    OverlapRow row;
    row.k = k;
    row.combinations = binomial(n, k);
    row.min_only_in_base = 1.0;
    row.max_only_in_base = 0.0;
    double sum = 0.0;
    // Subsets in increasing bit-pattern order.
    for (std::uint32_t subset = 0; subset < (std::uint32_t{1} << n); ++subset) {
      if (static_cast<std::size_t>(std::popcount(subset)) != k) continue;
      for (std::size_t base = 0; base < n; ++base) {
        if (!(subset & (std::uint32_t{1} << base))) continue;
        const std::uint32_t others = subset & ~(std::uint32_t{1} << base);
        std::size_t alone = 0;
        for (std::size_t l = 0; l < m; ++l)
          if ((bits[base][l] & others) == 0) ++alone;
        const double frac = static_cast<double>(alone) / static_cast<double>(m);
        sum += frac;
        row.min_only_in_base = std::min(row.min_only_in_base, frac);
        row.max_only_in_base = std::max(row.max_only_in_base, frac);
        ++row.runs;
      }
    }
    row.mean_only_in_base = sum / static_cast<double>(row.runs);
    rows.push_back(row);
  }
  return rows;
}

std::vector<std::size_t> shared_count_per_latent(const SeedEnsemble& ensemble, std::size_t base) {
  if (base >= ensemble.size()) {
    throw DomainError("base index " + std::to_string(base) + " out of range for " +
                      std::to_string(ensemble.size()) + " seeds");
  }
  std::vector<std::size_t> counts(ensemble.latents(), 0);
  for (std::size_t other = 0; other < ensemble.size(); ++other) {
    if (other == base) continue;
    const auto mask = ensemble.shared_mask(base, other);
    for (std::size_t l = 0; l < mask.size(); ++l)
      if (mask[l]) ++counts[l];
  }
  return counts;
}

std::vector<double> mean_matched_cosine_per_latent(const SeedEnsemble& ensemble, std::size_t base) {
  if (base >= ensemble.size()) {
    throw DomainError("base index " + std::to_string(base) + " out of range");
  }
  std::vector<double> sums(ensemble.latents(), 0.0);
  for (std::size_t other = 0; other < ensemble.size(); ++other) {
    if (other == base) continue;
    const auto recs = ensemble.records(base, other);
    for (std::size_t l = 0; l < recs.size(); ++l)
      sums[l] += 0.5 * (recs[l].cos_enc + recs[l].cos_dec);
  }
  for (double& s : sums) s /= static_cast<double>(ensemble.size() - 1);
  return sums;
}

std::vector<double> default_frequency_edges() {
  std::vector<double> edges{0, 1, 2, 5, 10, 20, 50, 100, 200, 500};
  for (double e = 1000; e <= 4000; e += 500) edges.push_back(e);
  return edges;
}

FrequencyTable frequency_vs_sharing_table(const sae::FiringStats& stats,
                                          std::span<const std::size_t> shared_counts,
                                          std::size_t max_shared, std::span<const double> edges) {
  if (stats.counts.size() != shared_counts.size()) {
    throw ShapeError("firing counts cover " + std::to_string(stats.counts.size()) +
                     " latents but sharing counts cover " + std::to_string(shared_counts.size()));
  }
  FrequencyTable t;
  t.edges = edges.empty() ? default_frequency_edges()
                          : std::vector<double>(edges.begin(), edges.end());
  if (t.edges.empty() || !std::is_sorted(t.edges.begin(), t.edges.end()) || t.edges.front() > 0) {
    throw DomainError("frequency bin edges must be ascending and start at or below 0");
  }
  t.histogram.assign(max_shared + 1, std::vector<std::uint64_t>(t.edges.size(), 0));
  t.firing.assign(max_shared + 1, {});
  for (std::size_t l = 0; l < shared_counts.size(); ++l) {
    const std::size_t s = shared_counts[l];
    if (s > max_shared) {
      throw DomainError("latent " + std::to_string(l) + " is shared with " + std::to_string(s) +
                        " seeds, more than " + std::to_string(max_shared));
    }
    const auto fires = stats.counts[l];
    ++t.histogram[s][bin_of(static_cast<double>(fires), t.edges)];
    t.firing[s].push_back(fires);
  }
  return t;
}

std::vector<ScoreBin> score_alignment_table(std::span<const std::optional<double>> scores_a,
                                            std::span<const std::optional<double>> scores_b,
                                            std::span<const align::MatchRecord> records,
                                            const ScoreBinOptions& opts) {
  if (scores_a.size() != records.size() || scores_b.size() != records.size()) {
    throw ShapeError("score vectors must cover all " + std::to_string(records.size()) +
                     " latents");
  }
  if (opts.edges.size() < 2 || !std::is_sorted(opts.edges.begin(), opts.edges.end())) {
    throw DomainError("score bins need at least two ascending edges");
  }
  auto check = [](std::span<const std::optional<double>> s, const char* side) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] && !(*s[i] >= 0.0 && *s[i] <= 1.0)) {
        throw DomainError(std::string("score ") + side + "[" + std::to_string(i) +
                          "] is outside [0, 1]");
      }
    }
  };
  check(scores_a, "a");
  check(scores_b, "b");

  const std::size_t nbins = opts.edges.size() - 1;
  std::vector<ScoreBin> bins(nbins);
  for (std::size_t b = 0; b < nbins; ++b) {
    bins[b].lo = opts.edges[b];
    bins[b].hi = opts.edges[b + 1];
  }

  for (const auto& r : records) {
    const std::size_t partner = opts.decoder_counterpart ? r.dec_counterpart : r.enc_counterpart;
    if (r.latent >= scores_a.size() || partner >= scores_b.size()) {
      throw ShapeError("match record refers to a latent outside the score vectors");
    }
    if (!scores_a[r.latent] || !scores_b[partner]) continue;
    double alignment = 0.5 * (r.cos_enc + r.cos_dec);
    if (opts.measure == AlignmentMeasure::Encoder) alignment = r.cos_enc;
    if (opts.measure == AlignmentMeasure::Decoder) alignment = r.cos_dec;
    if (alignment < opts.edges.front() || alignment > opts.edges.back()) continue;
    std::size_t b = bin_of(alignment, opts.edges);
    if (b == nbins) b = nbins - 1;  // alignment equal to the last edge
    bins[b].pairs.push_back({r.latent, partner, alignment, *scores_a[r.latent], *scores_b[partner]});
  }

  for (auto& bin : bins) {
    if (bin.pairs.empty()) continue;
    double best = -2.0;
    for (const auto& p : bin.pairs) {
      bin.mean_a += p.score_a;
      bin.mean_b += p.score_b;
      const double merit =
          p.alignment >= opts.tau ? std::min(p.score_a, p.score_b) : p.score_a - p.score_b;
      if (merit > best || (merit == best && p.latent_a < bin.selected->latent_a)) {
        best = merit;
        bin.selected = p;
      }
    }
    bin.mean_a /= static_cast<double>(bin.pairs.size());
    bin.mean_b /= static_cast<double>(bin.pairs.size());
  }
  return bins;
}

}  // namespace seedalign::multiseed
