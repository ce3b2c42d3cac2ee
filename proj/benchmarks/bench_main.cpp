// Copyright 2026 The seedalign Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "seedalign/align.hpp"
#include "seedalign/lap.hpp"
#include "seedalign/linalg.hpp"
#include "seedalign/multiseed.hpp"
#include "seedalign/sae.hpp"

namespace seedalign {
namespace {

Matrix unit_rows(std::size_t n, std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(n, d);
  for (double& v : m.values()) v = rng.normal();
  return linalg::row_l2_normalize(m);
}

void BM_CosineMatrix(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix a = unit_rows(n, 64, 1);
  const Matrix b = unit_rows(n, 64, 2);
  for (auto _ : state) benchmark::DoNotOptimize(linalg::cosine_matrix(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n));
}
BENCHMARK(BM_CosineMatrix)->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);

void BM_SolveAssignment(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix s = linalg::cosine_matrix(unit_rows(n, 64, 3), unit_rows(n, 64, 4));
  for (auto _ : state) benchmark::DoNotOptimize(lap::solve_assignment_max(s));
}
BENCHMARK(BM_SolveAssignment)->Arg(256)->Arg(1024)->Arg(2048)->Unit(benchmark::kMillisecond);

void BM_SolveAssignmentF32(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const MatrixF s = linalg::cosine_matrix_f32(unit_rows(n, 64, 3), unit_rows(n, 64, 4));
  for (auto _ : state) benchmark::DoNotOptimize(lap::solve_assignment_max(s));
}
BENCHMARK(BM_SolveAssignmentF32)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_LossAndGrads(benchmark::State& state) {
  const auto arch = static_cast<sae::Arch>(state.range(0));
  Rng rng(5);
  const auto p = sae::init_params(32, 128, arch, 4, rng);
  Matrix batch(64, 32);
  for (double& v : batch.values()) v = rng.normal();
  sae::TrainConfig cfg;
  cfg.arch = arch;
  cfg.l1_coeff = 1e-3;
  for (auto _ : state) benchmark::DoNotOptimize(sae::loss_and_grads(p, batch, cfg));
  state.SetLabel(std::string(sae::arch_name(arch)));
}
BENCHMARK(BM_LossAndGrads)
    ->Arg(static_cast<int>(sae::Arch::TopK))
    ->Arg(static_cast<int>(sae::Arch::ReLU))
    ->Arg(static_cast<int>(sae::Arch::Gated))
    ->Unit(benchmark::kMicrosecond);

void BM_AlignPair(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  Rng rng(6);
  const auto a = sae::init_params(64, m, sae::Arch::TopK, 4, rng);
  const auto b = sae::init_params(64, m, sae::Arch::TopK, 4, rng);
  for (auto _ : state) benchmark::DoNotOptimize(align::align_pair(a, b));
}
BENCHMARK(BM_AlignPair)->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_OnlyInBaseCurve(benchmark::State& state) {
  Rng rng(7);
  const auto base = sae::init_params(16, 256, sae::Arch::TopK, 4, rng);
  std::vector<sae::SaeParams> saes;
  for (int s = 0; s < 9; ++s) {
    auto p = base;
    for (double& v : p.w_dec.values()) v += 0.05 * s * rng.normal();
    p.w_dec = linalg::row_l2_normalize(p.w_dec);
    p.w_enc = p.w_dec;
    saes.push_back(std::move(p));
  }
  multiseed::SeedEnsemble e(saes);
  e.pairwise_matchings();
  for (auto _ : state) benchmark::DoNotOptimize(multiseed::only_in_base_curve(e));
}
BENCHMARK(BM_OnlyInBaseCurve)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace seedalign

BENCHMARK_MAIN();
