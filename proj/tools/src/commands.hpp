// Copyright 2026 The seedalign Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "run_context.hpp"

namespace seedalign::cli {

struct GenSyntheticOptions {
  std::size_t n_true = 64;
  std::size_t dim = 32;
  std::size_t samples = 10000;
  double p_active = 0.0625;
  double coeff_lo = 0.5;
  double coeff_hi = 1.5;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  std::string dtype = "f64";
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(GenSyntheticOptions, n_true, dim, samples, p_active, coeff_lo,
                                   coeff_hi, noise_sigma, seed, dtype)

/// Training hyperparameters shared by train and sweep.
struct TrainOptions {
  std::string data;
  std::string arch = "topk";
  std::size_t latents = 64;
  std::size_t k = 4;
  std::uint64_t seed = 0;
  std::size_t steps = 1000;
  std::size_t batch_size = 64;
  double learning_rate = 1e-3;
  double l1_coeff = 0.0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::string precision = "f64";
  bool center_data = false;
  std::size_t log_every = 0;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(TrainOptions, data, arch, latents, k, seed, steps, batch_size,
                                   learning_rate, l1_coeff, adam_beta1, adam_beta2, adam_eps,
                                   precision, center_data, log_every)

struct SweepOptions {
  TrainOptions base;
  std::vector<std::uint64_t> seeds{0, 1};
  std::vector<std::string> archs{"topk"};
  std::vector<std::size_t> latents{64};
  std::vector<std::size_t> ks{4};
  std::vector<std::size_t> steps{1000};
  double tau = 0.7;
};

inline void to_json(nlohmann::json& j, const SweepOptions& o) {
  j = nlohmann::json{{"train", o.base}, {"seeds", o.seeds}, {"archs", o.archs},
                     {"latents", o.latents}, {"ks", o.ks},   {"steps", o.steps},
                     {"tau", o.tau}};
  // Per-run fields come from the sweep axes.
  for (const char* key : {"arch", "latents", "k", "seed", "steps", "log_every"}) j["train"].erase(key);
}

/// Matching settings shared by the analysis commands.
struct MatchOptions {
  double tau = 0.7;
  std::string mode = "independent";
  std::string precision = "f64";
  std::size_t block = 64;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(MatchOptions, tau, mode, precision, block)

struct AlignOptions {
  std::string a;
  std::string b;
  MatchOptions match;
  std::vector<double> taus;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(AlignOptions, a, b, match, taus)

struct OverlapOptions {
  std::vector<std::string> checkpoints;
  std::size_t base = 0;
  MatchOptions match;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(OverlapOptions, checkpoints, base, match)

struct FreqOptions {
  std::vector<std::string> checkpoints;
  std::string data;
  std::size_t base = 0;
  std::vector<double> edges;
  MatchOptions match;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(FreqOptions, checkpoints, data, base, edges, match)

struct FitOptions {
  std::string input;
  std::vector<double> ks;
  std::vector<double> ys;
  std::string k_column = "k";
  std::string y_column = "mean_only_in_base";
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(FitOptions, input, ks, ys, k_column, y_column)

struct ScoresOptions {
  std::string a;
  std::string b;
  std::string scores_a;
  std::string scores_b;
  std::string measure = "mean";
  std::string counterpart = "decoder";
  std::vector<double> edges;
  MatchOptions match;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ScoresOptions, a, b, scores_a, scores_b, measure, counterpart,
                                   edges, match)

struct ReportOptions {
  std::vector<std::string> runs;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ReportOptions, runs)

void run_gen_synthetic(RunContext& ctx, const GenSyntheticOptions& o);
void run_train(RunContext& ctx, const TrainOptions& o);
void run_sweep(RunContext& ctx, const SweepOptions& o);
void run_align(RunContext& ctx, const AlignOptions& o);
void run_overlap(RunContext& ctx, const OverlapOptions& o);
void run_freq(RunContext& ctx, const FreqOptions& o);
void run_fit_powerlaw(RunContext& ctx, const FitOptions& o);
void run_scores(RunContext& ctx, const ScoresOptions& o);
void run_report(RunContext& ctx, const ReportOptions& o);

}  // namespace seedalign::cli
