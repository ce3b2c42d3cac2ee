// Copyright 2026 The seedalign Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <sys/resource.h>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "seedalign/align.hpp"
#include "seedalign/cli.hpp"
#include "seedalign/io.hpp"
#include "seedalign/lap.hpp"
#include "seedalign/multiseed.hpp"
#include "seedalign/sae.hpp"
#include "seedalign/table.hpp"
#include "test_util.hpp"

namespace seedalign {
namespace {

namespace fs = std::filesystem;

// Observed shared fraction of the desk-scale end-to-end run below.
constexpr double kPinnedSharedFraction = 0.5078125;
constexpr double kPinnedTolerance = 0.05;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

/// Every alignment produced here, audited by criteria 7 and 12.
std::vector<align::PairAlignment> g_pairs;

align::PairAlignment record(align::PairAlignment p) {
  g_pairs.push_back(p);
  return p;
}

std::vector<std::size_t> random_permutation(std::size_t n, Rng& rng) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  rng.shuffle(p);
  return p;
}

sae::SaeParams untied_sae(std::size_t d, std::size_t m, Rng& rng) {
  auto p = sae::init_params(d, m, sae::Arch::TopK, 4, rng);
  for (double& v : p.w_enc.values()) v += 0.3 * rng.normal();
  for (double& v : p.b_enc) v = 0.1 * rng.normal();
  return p;
}

Outcome assignment_exactness() {
  const auto t0 = Clock::now();
  Rng rng(101);
  std::size_t mismatches = 0, solved = 0;
  for (std::size_t n = 2; n <= 8; ++n)
    for (int trial = 0; trial < 100; ++trial) {
      const Matrix s = testing::random_matrix(n, n, rng);
      if (lap::solve_assignment_max(s).total != lap::brute_force_assignment(s).total) ++mismatches;
      ++solved;
    }
  const double secs = seconds_since(t0);
  std::ostringstream d;
  d << solved << " matrices, " << mismatches << " mismatches, " << secs << " s";
  return {mismatches == 0 && secs < 10.0, d.str()};
}

Outcome permutation_recovery() {
  Rng rng(202);
  std::size_t failures = 0;
  double worst = 1.0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t m = 16 + 12 * static_cast<std::size_t>(trial);  // 16 .. 244
    const auto a = untied_sae(32, m, rng);
    const auto order = random_permutation(m, rng);
    const auto res = record(align::align_pair(a, sae::permute_latents(a, order)));
    bool ok = res.summary.shared_fraction == 1.0;
    for (std::size_t i = 0; i < m; ++i) {
      const auto& r = res.records[order[i]];
      ok = ok && r.enc_counterpart == i && r.dec_counterpart == i;
      worst = std::min({worst, r.cos_enc, r.cos_dec});
    }
    if (!ok) ++failures;
  }
  std::ostringstream d;
  d << "20 SAEs, m up to 244, " << failures << " failures, min matched cosine " << worst;
  return {failures == 0 && worst >= 1.0 - 1e-9, d.str()};
}

Outcome gradient_correctness() {
  std::ostringstream d;
  bool pass = true;
  for (auto arch : {sae::Arch::TopK, sae::Arch::ReLU, sae::Arch::Gated}) {
    double worst = 0.0;
    std::size_t checked = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto fd = testing::finite_difference_check(arch, 5000 + seed);
      worst = std::max(worst, fd.worst);
      checked += fd.checked;
    }
    pass = pass && worst < 1e-4;
    d << sae::arch_name(arch) << " worst rel " << worst << " over " << checked << "; ";
  }
  std::string text = d.str();
  text.resize(text.size() - 2);
  return {pass, text};
}

io::SyntheticData small_synthetic(std::uint64_t seed, std::size_t samples = 20000) {
  io::SyntheticSpec spec;
  spec.samples = samples;
  spec.seed = seed;
  return io::gen_synthetic(spec);
}

Outcome unit_norm_constraint() {
  const auto syn = small_synthetic(303);
  std::ostringstream d;
  bool pass = true;
  for (auto arch : {sae::Arch::TopK, sae::Arch::ReLU, sae::Arch::Gated}) {
    sae::TrainConfig cfg;
    cfg.arch = arch;
    cfg.steps = 1000;
    cfg.l1_coeff = arch == sae::Arch::TopK ? 0.0 : 1e-3;
    double worst = 0.0;
    std::size_t observed = 0;
    sae::train(syn.dataset, cfg, [&](std::size_t, const sae::SaeParams& p, const auto&) {
      worst = std::max(worst, sae::decoder_norm_deviation(p));
      ++observed;
    });
    pass = pass && worst < 1e-6 && observed == 1000;
    d << sae::arch_name(arch) << " max deviation " << worst << "; ";
  }
  std::string text = d.str();
  text.resize(text.size() - 2);
  return {pass, text};
}

Outcome topk_sparsity() {
  const auto syn = small_synthetic(404);
  sae::TrainConfig cfg;
  cfg.latents = 64;
  cfg.k = 4;
  cfg.steps = 2000;
  const auto params = sae::train(syn.dataset, cfg).params;
  const Matrix z = sae::encode(params, syn.dataset.samples);
  std::size_t over = 0, exact = 0;
  std::uint64_t nonzeros = 0;
  for (std::size_t r = 0; r < z.rows(); ++r) {
    std::size_t nz = 0;
    for (double v : z.row(r)) nz += v > 0.0;
    nonzeros += nz;
    over += nz > cfg.k;
    exact += nz == cfg.k;
  }
  const auto stats = sae::firing_counts(params, syn.dataset);
  const std::uint64_t fired = std::accumulate(stats.counts.begin(), stats.counts.end(), std::uint64_t{0});
  const double exact_frac = static_cast<double>(exact) / static_cast<double>(z.rows());
  std::ostringstream d;
  d << "rows over k " << over << ", exactly k " << exact_frac << ", firing sum " << fired
    << " vs counted nonzeros " << nonzeros << " (k x rows with exactly k = " << cfg.k * exact
    << ")";
  const bool sums = fired == nonzeros && (exact != z.rows() || fired == cfg.k * z.rows());
  return {over == 0 && exact_frac >= 0.99 && sums, d.str()};
}

std::string file_bytes(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

Outcome determinism() {
  const auto syn = small_synthetic(505, 5000);
  const auto dir = testing::temp_dir("acceptance_determinism");
  sae::TrainConfig cfg;
  cfg.steps = 500;
  cfg.seed = 17;
  const auto r1 = sae::train(syn.dataset, cfg);
  const auto r2 = sae::train(syn.dataset, cfg);
  io::write_checkpoint(dir / "a.ckpt", {r1.params, cfg});
  io::write_checkpoint(dir / "b.ckpt", {r2.params, cfg});
  const bool same = file_bytes(dir / "a.ckpt") == file_bytes(dir / "b.ckpt");
  auto other = cfg;
  other.seed = 18;
  const auto r3 = sae::train(syn.dataset, other);
  const bool schedule = r3.schedule_fingerprint == r1.schedule_fingerprint;
  const bool differs = !(r3.params == r1.params);
  std::ostringstream d;
  d << "same seed bitwise " << (same ? "identical" : "DIFFERENT") << ", fingerprints "
    << hex64(r1.schedule_fingerprint) << "/" << hex64(r3.schedule_fingerprint);
  return {same && schedule && differs, d.str()};
}

Outcome power_law_recovery() {
  std::vector<double> ks, ys;
  for (int k = 2; k <= 9; ++k) {
    ks.push_back(k);
    ys.push_back(0.5 * std::pow(k, -0.8) + 0.3);
  }
  const auto with = multiseed::fit_power_law(ks, ys, true);
  const auto without = multiseed::fit_power_law(ks, ys, false);
  const double err = std::max({std::abs(with.a - 0.5), std::abs(with.b - 0.8), std::abs(with.c - 0.3)});
  std::ostringstream d;
  d << "a=" << with.a << " b=" << with.b << " c=" << with.c << " max err " << err
    << ", residuals " << with.residual_ss << " <= " << without.residual_ss;
  return {err <= 1e-6 && with.residual_ss <= without.residual_ss, d.str()};
}

sae::SaeParams basis_sae(const std::vector<std::size_t>& dirs) {
  sae::SaeParams p;
  p.arch = sae::Arch::TopK;
  p.k = 2;
  p.w_enc = Matrix(dirs.size(), 8);
  for (std::size_t i = 0; i < dirs.size(); ++i) p.w_enc(i, dirs[i]) = 1.0;
  p.w_dec = p.w_enc;
  p.b_enc.assign(dirs.size(), 0.0);
  p.b_dec.assign(8, 0.0);
  return p;
}

Outcome combinatorics_oracle() {
  // Hand count: A = {e0..e3}, B = {e0, e1, e4, e5}, C = {e0, e2, e6, e7}.
  // Pairs: AB shares 2, AC shares 2, BC shares 1 of 4 latents.
  // k=2 only-in-base: (2 + 2 + 2 + 2 + 3 + 3) / 4 / 6 = 3.5 / 6.
  // k=3: A keeps e3, B keeps e4 e5, C keeps e6 e7 -> (1 + 2 + 2) / 4 / 3.
  multiseed::SeedEnsemble e({basis_sae({0, 1, 2, 3}), basis_sae({0, 1, 4, 5}),
                             basis_sae({0, 2, 6, 7})});
  e.pairwise_matchings();
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = i + 1; j < 3; ++j) record(e.pair(i, j));
  const auto curve = multiseed::only_in_base_curve(e);
  bool pass = curve.size() == 2 && curve[0].mean_only_in_base == 3.5 / 6.0 &&
              curve[1].mean_only_in_base == 5.0 / 12.0;
  pass = pass && multiseed::shared_count_per_latent(e, 0) == std::vector<std::size_t>{2, 1, 1, 0};
  pass = pass && multiseed::shared_count_per_latent(e, 1) == std::vector<std::size_t>{2, 1, 0, 0};
  pass = pass && multiseed::shared_count_per_latent(e, 2) == std::vector<std::size_t>{2, 1, 0, 0};

  Rng rng(606);
  const auto one = untied_sae(16, 48, rng);
  multiseed::SeedEnsemble same(std::vector<sae::SaeParams>(9, one));
  same.pairwise_matchings();
  double worst = 0.0;
  for (const auto& row : multiseed::only_in_base_curve(same))
    worst = std::max(worst, row.max_only_in_base);
  record(same.pair(0, 1));
  std::ostringstream d;
  if (curve.size() == 2) {
    d << "k=2 " << curve[0].mean_only_in_base << ", k=3 " << curve[1].mean_only_in_base;
  }
  d << ", identical ensemble max only-in-base " << worst;
  return {pass && worst == 0.0, d.str()};
}

std::map<std::string, std::string> read_summary(const fs::path& p) {
  std::map<std::string, std::string> out;
  std::istringstream in(file_bytes(p));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    out[line.substr(0, comma)] = line.substr(comma + 1);
  }
  return out;
}

Outcome end_to_end() {
  const auto t0 = Clock::now();
  const auto dir = testing::temp_dir("acceptance_e2e");
  const std::string data = (dir / "data" / "activations.actv").string();
  std::ostringstream sink;
  auto run = [&](std::vector<std::string> args) { return cli::dispatch(args, sink, sink); };
  bool ok = run({"gen-synthetic", "--dim", "32", "--n-true", "64", "--samples", "200000", "--seed",
                 "0", "--out-dir", (dir / "data").string()}) == cli::kOk;
  for (const char* seed : {"0", "1"}) {
    ok = ok && run({"train", "--data", data, "--arch", "topk", "--latents", "128", "--k", "4",
                    "--steps", "20000", "--seed", seed, "--out-dir",
                    (dir / (std::string("seed") + seed)).string()}) == cli::kOk;
  }
  ok = ok && run({"align", "--a", (dir / "seed0" / "sae.ckpt").string(), "--b",
                  (dir / "seed1" / "sae.ckpt").string(), "--out-dir", (dir / "align").string()}) ==
                 cli::kOk;
  const double secs = seconds_since(t0);
  if (!ok) return {false, "pipeline failed: " + sink.str()};
  const double shared = std::stod(read_summary(dir / "align" / "summary.csv")["shared_fraction"]);

  const auto a = io::read_checkpoint(dir / "seed0" / "sae.ckpt").checkpoint.params;
  const auto b = io::read_checkpoint(dir / "seed1" / "sae.ckpt").checkpoint.params;
  record(align::align_pair(a, b));
  std::ostringstream d;
  d << "shared fraction " << shared << " (pinned " << kPinnedSharedFraction << " +/- "
    << kPinnedTolerance << "), " << secs << " s";
  return {shared > 0.0 && shared < 1.0 && std::abs(shared - kPinnedSharedFraction) <= kPinnedTolerance &&
              secs < 600.0,
          d.str()};
}

Outcome scale() {
  constexpr std::size_t n = 8192;
  Rng rng(808);
  const Matrix a = testing::random_normal(n, 64, rng);
  const Matrix b = testing::random_normal(n, 64, rng);
  const auto t0 = Clock::now();
  const Matrix s = linalg::cosine_matrix(a, b);
  const double cos_secs = seconds_since(t0);
  const auto t1 = Clock::now();
  const auto res = lap::solve_assignment_max(s);
  const double lap_secs = seconds_since(t1);
  rusage usage{};
  getrusage(RUSAGE_SELF, &usage);
  const double rss_mib = static_cast<double>(usage.ru_maxrss) / 1024.0;
  std::ostringstream d;
  d << n << "x" << n << " solve " << lap_secs << " s (cosine " << cos_secs << " s), peak RSS "
    << rss_mib << " MiB";
  return {lap::is_permutation(res.perm) && lap_secs < 300.0 && rss_mib < 2048.0, d.str()};
}

void random_pairs() {
  Rng rng(909);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t m = 8 + 20 * static_cast<std::size_t>(trial);
    record(align::align_pair(untied_sae(12, m, rng), untied_sae(12, m, rng)));
  }
  const std::string dir = SEEDALIGN_TEST_DATA_DIR;
  record(align::align_pair(io::read_checkpoint(dir + "/pair_a.ckpt").checkpoint.params,
                           io::read_checkpoint(dir + "/pair_b.ckpt").checkpoint.params));
}

Outcome matched_below_max() {
  std::size_t violations = 0;
  for (const auto& p : g_pairs) {
    for (const auto& r : p.records) violations += r.cos_enc > r.max_cos_enc || r.cos_dec > r.max_cos_dec;
    violations += p.summary.mean_matched_enc > p.summary.mean_max_enc;
    violations += p.summary.mean_matched_dec > p.summary.mean_max_dec;
  }
  return {violations == 0 && !g_pairs.empty(),
          std::to_string(g_pairs.size()) + " pairs, " + std::to_string(violations) + " violations"};
}

Outcome threshold_monotonicity() {
  std::vector<double> taus;
  for (int i = 0; i <= 200; ++i) taus.push_back(-1.0 + i / 100.0);
  std::size_t violations = 0;
  for (const auto& p : g_pairs) {
    const auto rows = align::threshold_sweep(p.records, taus);
    for (std::size_t i = 1; i < rows.size(); ++i)
      violations += rows[i].shared_fraction > rows[i - 1].shared_fraction;
  }
  return {violations == 0 && !g_pairs.empty(),
          std::to_string(g_pairs.size()) + " pairs x " + std::to_string(taus.size()) +
              " thresholds, " + std::to_string(violations) + " increases"};
}

}  // namespace
}  // namespace seedalign

int main() {
  using namespace seedalign;
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> check;
  };
  // 7 and 12 audit the pairs collected by the others, so they run last.
  const std::vector<Criterion> order{
      {1, "assignment exactness", assignment_exactness},
      {2, "permutation recovery", permutation_recovery},
      {3, "gradient correctness", gradient_correctness},
      {4, "unit-norm decoder constraint", unit_norm_constraint},
      {5, "topk sparsity", topk_sparsity},
      {6, "determinism", determinism},
      {8, "power-law fit recovery", power_law_recovery},
      {9, "multi-seed combinatorics", combinatorics_oracle},
      {10, "desk-scale end-to-end regression", end_to_end},
      {11, "assignment at 8192", scale},
      {7, "matched <= max dominance", [] { random_pairs(); return matched_below_max(); }},
      {12, "threshold sweep monotonicity", threshold_monotonicity},
  };
  std::map<int, std::string> lines;
  int failed = 0;
  for (const auto& c : order) {
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::ostringstream line;
    line << (o.pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.name << ": " << o.detail;
    lines[c.id] = line.str();
  }
  for (const auto& [id, line] : lines) std::cout << line << "\n";
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed")
            << std::endl;
  return failed == 0 ? 0 : 1;
}
