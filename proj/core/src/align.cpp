// Copyright 2026 The seedalign Authors
// SPDX-License-Identifier: Apache-2.0

#include "seedalign/align.hpp"

#include <algorithm>
#include <string>

namespace seedalign::align {

namespace {

struct SideResult {
  lap::Assignment assignment;
  std::vector<double> matched;  // cosine of each row with its counterpart
  std::vector<double> row_max;
  std::vector<double> col_max;
};

template <typename T>
void fill_extrema(const BasicMatrix<T>& s, SideResult& side) {
  const std::size_t m = s.rows();
  side.row_max.assign(m, -1.0);
  side.col_max.assign(s.cols(), -1.0);
  for (std::size_t i = 0; i < m; ++i) {
    const auto row = s.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      const double v = static_cast<double>(row[j]);
      side.row_max[i] = std::max(side.row_max[i], v);
      side.col_max[j] = std::max(side.col_max[j], v);
    }
  }
}

template <typename T>
std::vector<double> matched_values(const BasicMatrix<T>& s, const std::vector<std::size_t>& perm) {
  std::vector<double> out(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) out[i] = static_cast<double>(s(i, perm[i]));
  return out;
}

template <typename T>
BasicMatrix<T> cosines(const Matrix& a, const Matrix& b, const linalg::CosineOptions& opts) {
  if constexpr (std::is_same_v<T, float>) {
    return linalg::cosine_matrix_f32(a, b, opts);
  } else {
    return linalg::cosine_matrix(a, b, opts);
  }
}

template <typename T>
void align_sides(const sae::SaeParams& a, const sae::SaeParams& b, const AlignOptions& opts,
                 SideResult& enc, SideResult& dec) {
  if (opts.mode == MatchMode::Independent) {
    // One cosine matrix alive at a time.
    {
      const auto s = cosines<T>(a.w_enc, b.w_enc, opts.cosine);
      enc.assignment = lap::solve_assignment_max(s);
      enc.matched = matched_values(s, enc.assignment.perm);
      fill_extrema(s, enc);
    }
    const auto s = cosines<T>(a.w_dec, b.w_dec, opts.cosine);
    dec.assignment = lap::solve_assignment_max(s);
    dec.matched = matched_values(s, dec.assignment.perm);
    fill_extrema(s, dec);
    return;
  }
  const auto s_enc = cosines<T>(a.w_enc, b.w_enc, opts.cosine);
  const auto s_dec = cosines<T>(a.w_dec, b.w_dec, opts.cosine);
  BasicMatrix<T> combined(s_enc.rows(), s_enc.cols());
  for (std::size_t i = 0; i < combined.size(); ++i) {
    combined.values()[i] = static_cast<T>(0.5 * (static_cast<double>(s_enc.values()[i]) +
                                                 static_cast<double>(s_dec.values()[i])));
  }
  const lap::Assignment joint = lap::solve_assignment_max(combined);
  enc.assignment = joint;
  dec.assignment = joint;
  enc.matched = matched_values(s_enc, joint.perm);
  dec.matched = matched_values(s_dec, joint.perm);
  enc.assignment.per_pair = enc.matched;
  dec.assignment.per_pair = dec.matched;
  enc.assignment.total = 0.0;
  dec.assignment.total = 0.0;
  for (std::size_t i = 0; i < joint.perm.size(); ++i) {
    enc.assignment.total += enc.matched[i];
    dec.assignment.total += dec.matched[i];
  }
  fill_extrema(s_enc, enc);
  fill_extrema(s_dec, dec);
}

}  // namespace

bool classify_shared(std::size_t enc_counterpart, std::size_t dec_counterpart, double cos_enc,
                     double cos_dec, const SharedCriterion& crit) {
  if (crit.require_same_counterpart && enc_counterpart != dec_counterpart) return false;
  return cos_enc >= crit.tau && cos_dec >= crit.tau;
}

PairAlignment align_pair(const sae::SaeParams& a, const sae::SaeParams& b,
                         const SharedCriterion& crit, const AlignOptions& opts) {
  sae::validate_shapes(a);
  sae::validate_shapes(b);
  if (a.latents() != b.latents() || a.dim() != b.dim()) {
    throw ShapeError("cannot align SAEs of shape " + std::to_string(a.latents()) + "x" +
                     std::to_string(a.dim()) + " and " + std::to_string(b.latents()) + "x" +
                     std::to_string(b.dim()));
  }
  if (crit.tau < 0.0 || crit.tau > 1.0) throw DomainError("tau must lie in [0, 1]");

  SideResult enc;
  SideResult dec;
  if (opts.precision == CostPrecision::F32) {
    align_sides<float>(a, b, opts, enc, dec);
  } else {
    align_sides<double>(a, b, opts, enc, dec);
  }

  PairAlignment out;
  const std::size_t m = a.latents();
  out.records.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    MatchRecord& r = out.records[i];
    r.latent = i;
    r.enc_counterpart = enc.assignment.perm[i];
    r.dec_counterpart = dec.assignment.perm[i];
    r.cos_enc = enc.matched[i];
    r.cos_dec = dec.matched[i];
    r.max_cos_enc = enc.row_max[i];
    r.max_cos_dec = dec.row_max[i];
    r.shared = classify_shared(r.enc_counterpart, r.dec_counterpart, r.cos_enc, r.cos_dec, crit);
  }
  out.summary = summarize(out.records);
  out.enc = std::move(enc.assignment);
  out.dec = std::move(dec.assignment);
  out.reverse_max_enc = std::move(enc.col_max);
  out.reverse_max_dec = std::move(dec.col_max);
  return out;
}

AlignSummary summarize(std::span<const MatchRecord> records) {
  AlignSummary s;
  s.latents = records.size();
  if (records.empty()) return s;
  std::size_t shared = 0;
  for (const auto& r : records) {
    s.mean_matched_enc += r.cos_enc;
    s.mean_matched_dec += r.cos_dec;
    s.mean_max_enc += r.max_cos_enc;
    s.mean_max_dec += r.max_cos_dec;
    if (r.shared) ++shared;
    CosineMeans& group = r.enc_counterpart == r.dec_counterpart ? s.agreeing : s.disagreeing;
    ++group.count;
    group.enc += r.cos_enc;
    group.dec += r.cos_dec;
  }
  const double n = static_cast<double>(records.size());
  s.mean_matched_enc /= n;
  s.mean_matched_dec /= n;
  s.mean_max_enc /= n;
  s.mean_max_dec /= n;
  s.shared_fraction = static_cast<double>(shared) / n;
  s.agreement_fraction = static_cast<double>(s.agreeing.count) / n;
  for (CosineMeans* g : {&s.agreeing, &s.disagreeing}) {
    if (g->count == 0) continue;
    g->enc /= static_cast<double>(g->count);
    g->dec /= static_cast<double>(g->count);
    g->mean = 0.5 * (g->enc + g->dec);
  }
  return s;
}

double shared_fraction(std::span<const MatchRecord> records) {
  if (records.empty()) return 0.0;
  const auto shared = std::count_if(records.begin(), records.end(),
                                    [](const MatchRecord& r) { return r.shared; });
  return static_cast<double>(shared) / static_cast<double>(records.size());
}

std::vector<SweepRow> threshold_sweep(std::span<const MatchRecord> records,
                                      std::span<const double> taus,
                                      bool require_same_counterpart) {
  if (!std::is_sorted(taus.begin(), taus.end())) {
    throw DomainError("threshold_sweep needs ascending thresholds");
  }
  std::vector<SweepRow> out;
  out.reserve(taus.size());
  for (double tau : taus) {
    const SharedCriterion crit{tau, require_same_counterpart};
    std::size_t shared = 0;
    for (const auto& r : records)
      if (classify_shared(r.enc_counterpart, r.dec_counterpart, r.cos_enc, r.cos_dec, crit))
        ++shared;
    out.push_back({tau, records.empty() ? 0.0
                                        : static_cast<double>(shared) /
                                              static_cast<double>(records.size())});
  }
  return out;
}

MatchedVsMaxReport matched_vs_max_report(std::span<const MatchRecord> records) {
  constexpr double kExceed = 1e-6;
  MatchedVsMaxReport rep;
  rep.rows.reserve(records.size());
  std::size_t enc_exceed = 0;
  std::size_t dec_exceed = 0;
  for (const auto& r : records) {
    rep.rows.push_back({r.latent, r.cos_enc, r.max_cos_enc, r.cos_dec, r.max_cos_dec});
    if (r.max_cos_enc - r.cos_enc > kExceed) ++enc_exceed;
    if (r.max_cos_dec - r.cos_dec > kExceed) ++dec_exceed;
  }
  if (!records.empty()) {
    rep.enc_exceed_fraction = static_cast<double>(enc_exceed) / static_cast<double>(records.size());
    rep.dec_exceed_fraction = static_cast<double>(dec_exceed) / static_cast<double>(records.size());
  }
  return rep;
}

std::vector<MatchRecord> reverse_records(const PairAlignment& pair, const SharedCriterion& crit) {
  const std::size_t m = pair.records.size();
  std::vector<std::size_t> enc_inv(m);
  std::vector<std::size_t> dec_inv(m);
  for (const auto& r : pair.records) {
    enc_inv[r.enc_counterpart] = r.latent;
    dec_inv[r.dec_counterpart] = r.latent;
  }
  std::vector<MatchRecord> out(m);
  for (std::size_t j = 0; j < m; ++j) {
    MatchRecord& r = out[j];
    r.latent = j;
    r.enc_counterpart = enc_inv[j];
    r.dec_counterpart = dec_inv[j];
    r.cos_enc = pair.records[enc_inv[j]].cos_enc;
    r.cos_dec = pair.records[dec_inv[j]].cos_dec;
    r.max_cos_enc = pair.reverse_max_enc.empty() ? r.cos_enc : pair.reverse_max_enc[j];
    r.max_cos_dec = pair.reverse_max_dec.empty() ? r.cos_dec : pair.reverse_max_dec[j];
    r.shared = classify_shared(r.enc_counterpart, r.dec_counterpart, r.cos_enc, r.cos_dec, crit);
  }
  return out;
}

}  // namespace seedalign::align
