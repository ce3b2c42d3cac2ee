// Copyright 2026 The seedalign Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "seedalign/io.hpp"
#include "seedalign/sae.hpp"
#include "test_util.hpp"

namespace seedalign {
namespace {

using sae::Arch;
using sae::SaeParams;

constexpr Arch kArchs[] = {Arch::TopK, Arch::ReLU, Arch::Gated};

SaeParams zero_params(std::size_t d, std::size_t m, Arch arch, std::size_t k = 2) {
  SaeParams p;
  p.arch = arch;
  p.k = arch == Arch::TopK ? k : 0;
  p.w_enc = Matrix(m, d);
  p.w_dec = Matrix(m, d);
  p.b_enc.assign(m, 0.0);
  p.b_dec.assign(d, 0.0);
  if (arch == Arch::Gated) {
    p.r_mag.assign(m, 0.0);
    p.b_mag.assign(m, 0.0);
  }
  return p;
}

using testing::random_params;

TEST(InitParams, SameSeedBitwiseIdentical) {
  for (Arch arch : kArchs) {
    Rng a(99), b(99);
    EXPECT_EQ(sae::init_params(12, 30, arch, 4, a), sae::init_params(12, 30, arch, 4, b));
  }
}

TEST(InitParams, DecoderRowsUnitAndEncoderCoupled) {
  Rng rng(5);
  const SaeParams p = sae::init_params(7, 50, Arch::TopK, 3, rng);
  for (double n : linalg::row_norms(p.w_dec)) EXPECT_NEAR(n, 1.0, 1e-12);
  EXPECT_EQ(p.w_enc, p.w_dec);
  EXPECT_TRUE(std::all_of(p.b_enc.begin(), p.b_enc.end(), [](double v) { return v == 0; }));
  EXPECT_TRUE(std::all_of(p.b_dec.begin(), p.b_dec.end(), [](double v) { return v == 0; }));
}

TEST(InitParams, DistinctSeedsGiveDistinctDecoders) {
  std::vector<Matrix> decs;
  for (std::uint64_t s = 0; s < 20; ++s) {
    Rng rng(s);
    decs.push_back(sae::init_params(8, 16, Arch::TopK, 2, rng).w_dec);
  }
  for (std::size_t i = 0; i < decs.size(); ++i)
    for (std::size_t j = i + 1; j < decs.size(); ++j) EXPECT_NE(decs[i], decs[j]);
}

TEST(Encode, ZeroInputZeroLatents) {
  Rng rng(1);
  for (Arch arch : kArchs) {
    SaeParams p = sae::init_params(5, 9, arch, 3, rng);
    const Matrix z = sae::encode(p, Matrix(4, 5));
    for (double v : z.values()) EXPECT_EQ(v, 0.0);
  }
}

TEST(Encode, IdentityWeightsRelu) {
  SaeParams p = zero_params(2, 2, Arch::ReLU);
  p.w_enc = Matrix{{1, 0}, {0, 1}};
  p.w_dec = p.w_enc;
  const Matrix z = sae::encode(p, Matrix{{1, -1}});
  EXPECT_EQ(z, (Matrix{{1, 0}}));
}

TEST(Encode, MatchesScalarReference) {
  Rng rng(2);
  for (Arch arch : kArchs) {
    const SaeParams p = random_params(6, 10, arch, 3, rng);
    const Matrix x = testing::random_normal(7, 6, rng);
    const Matrix z = sae::encode(p, x);
    for (std::size_t r = 0; r < x.rows(); ++r) {
      const auto ref = testing::reference_encode_row(p, {x.row(r).begin(), x.row(r).end()});
      for (std::size_t j = 0; j < ref.size(); ++j) EXPECT_NEAR(z(r, j), ref[j], 1e-12);
    }
  }
}

TEST(Encode, TopKRowsHaveAtMostKNonzeros) {
  Rng rng(3);
  const SaeParams p = random_params(8, 40, Arch::TopK, 5, rng);
  const Matrix z = sae::encode(p, testing::random_normal(200, 8, rng));
  for (std::size_t r = 0; r < z.rows(); ++r) {
    const auto nz = std::count_if(z.row(r).begin(), z.row(r).end(), [](double v) { return v != 0; });
    EXPECT_LE(nz, 5);
  }
}

TEST(Encode, DimensionMismatch) {
  Rng rng(4);
  const SaeParams p = sae::init_params(4, 6, Arch::ReLU, 0, rng);
  EXPECT_THROW(sae::encode(p, Matrix(2, 5)), ShapeError);
  EXPECT_THROW(sae::decode(p, Matrix(2, 5)), ShapeError);
}

TEST(Decode, ZeroLatentsGiveBias) {
  SaeParams p = zero_params(3, 4, Arch::TopK);
  p.b_dec = {1.5, -2.0, 0.25};
  const Matrix xh = sae::decode(p, Matrix(2, 4));
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(xh(r, c), p.b_dec[c]);
}

TEST(Decode, BasisVectorSelectsRow) {
  Rng rng(6);
  SaeParams p = random_params(5, 7, Arch::ReLU, 0, rng);
  for (std::size_t i = 0; i < 7; ++i) {
    Matrix z(1, 7);
    z(0, i) = 1.0;
    const Matrix xh = sae::decode(p, z);
    for (std::size_t c = 0; c < 5; ++c) EXPECT_DOUBLE_EQ(xh(0, c), p.w_dec(i, c) + p.b_dec[c]);
  }
}

TEST(Decode, MatchesScalarReference) {
  Rng rng(7);
  const SaeParams p = random_params(6, 10, Arch::ReLU, 0, rng);
  const Matrix z = testing::random_matrix(5, 10, rng, 0.0, 2.0);
  const Matrix xh = sae::decode(p, z);
  for (std::size_t r = 0; r < z.rows(); ++r) {
    const auto ref = testing::reference_decode_row(p, {z.row(r).begin(), z.row(r).end()});
    for (std::size_t c = 0; c < ref.size(); ++c) EXPECT_NEAR(xh(r, c), ref[c], 1e-12);
  }
}

TEST(LossAndGrads, ZeroParamsBiasGradient) {
  const Matrix x{{0.5, -1.25, 2.0}};
  for (Arch arch : kArchs) {
    const SaeParams p = zero_params(3, 4, arch);
    sae::TrainConfig cfg;
    const auto lg = sae::loss_and_grads(p, x, cfg);
    for (std::size_t c = 0; c < 3; ++c) {
      // Gated adds a second (gate-path) reconstruction of the same zero output.
      const double expect = arch == Arch::Gated ? -4.0 * x(0, c) : -2.0 * x(0, c);
      EXPECT_DOUBLE_EQ(lg.grads.b_dec[c], expect) << sae::arch_name(arch);
    }
  }
}

TEST(LossAndGrads, LossMatchesScalarReference) {
  Rng rng(8);
  for (Arch arch : kArchs) {
    const SaeParams p = random_params(6, 8, arch, 3, rng);
    const Matrix x = testing::random_normal(4, 6, rng);
    sae::TrainConfig cfg;
    cfg.l1_coeff = 0.37;
    const double ref = testing::reference_loss(p, x, arch == Arch::TopK ? 0.0 : cfg.l1_coeff);
    EXPECT_NEAR(sae::loss_and_grads(p, x, cfg).loss.total, ref, 1e-12);
  }
}

TEST(LossAndGrads, FiniteDifferencesAllArchitectures) {
  for (Arch arch : kArchs) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto fd = testing::finite_difference_check(arch, 1000 + seed);
      EXPECT_GT(fd.checked, 0u);
      EXPECT_LT(fd.worst, 1e-4) << sae::arch_name(arch) << " seed " << 1000 + seed << ": "
                                << fd.detail;
    }
  }
}

TEST(LossAndGrads, TopKWithFullKEqualsRelu) {
  Rng rng(9);
  SaeParams topk = random_params(5, 6, Arch::TopK, 6, rng);
  SaeParams relu = topk;
  relu.arch = Arch::ReLU;
  relu.k = 0;
  const Matrix x = testing::random_normal(5, 5, rng);
  sae::TrainConfig cfg;
  cfg.l1_coeff = 0.0;
  const auto a = sae::loss_and_grads(topk, x, cfg);
  const auto b = sae::loss_and_grads(relu, x, cfg);
  EXPECT_EQ(a.loss.total, b.loss.total);
  EXPECT_EQ(a.grads.w_enc, b.grads.w_enc);
  EXPECT_EQ(a.grads.b_enc, b.grads.b_enc);
  EXPECT_EQ(a.grads.w_dec, b.grads.w_dec);
  EXPECT_EQ(a.grads.b_dec, b.grads.b_dec);
}

TEST(ProjectDecoderGradient, RemovesParallelComponent) {
  Rng rng(10);
  const Matrix w = linalg::row_l2_normalize(testing::random_normal(6, 4, rng));
  Matrix g = testing::random_normal(6, 4, rng);
  sae::project_decoder_gradient(w, g);
  for (std::size_t i = 0; i < w.rows(); ++i) {
    double dot = 0;
    for (std::size_t c = 0; c < w.cols(); ++c) dot += w(i, c) * g(i, c);
    EXPECT_NEAR(dot, 0.0, 1e-14);
  }
}

ActivationDataset small_dataset(std::uint64_t seed, std::size_t n = 2000) {
  io::SyntheticSpec spec;
  spec.n_true = 24;
  spec.dim = 10;
  spec.samples = n;
  spec.p_active = 0.1;
  spec.seed = seed;
  return io::gen_synthetic(spec).dataset;
}

TEST(Train, SameSeedBitwiseIdentical) {
  const auto data = small_dataset(1);
  for (Arch arch : kArchs) {
    sae::TrainConfig cfg;
    cfg.arch = arch;
    cfg.latents = 16;
    cfg.k = 3;
    cfg.steps = 60;
    cfg.batch_size = 32;
    cfg.l1_coeff = 0.05;
    cfg.seed = 17;
    const auto a = sae::train(data, cfg);
    const auto b = sae::train(data, cfg);
    EXPECT_EQ(a.params, b.params);
    EXPECT_EQ(a.final_loss, b.final_loss);
  }
}

TEST(Train, SeedChangesParamsButNotSchedule) {
  const auto data = small_dataset(2);
  sae::TrainConfig cfg;
  cfg.latents = 16;
  cfg.steps = 100;
  cfg.batch_size = 48;  // wraps around 2000 samples
  cfg.seed = 1;
  const auto a = sae::train(data, cfg);
  cfg.seed = 2;
  const auto b = sae::train(data, cfg);
  EXPECT_NE(a.params.w_dec, b.params.w_dec);
  EXPECT_EQ(a.schedule_fingerprint, b.schedule_fingerprint);
  EXPECT_EQ(a.schedule_fingerprint, sae::schedule_fingerprint(2000, 100, 48));
  EXPECT_NE(a.schedule_fingerprint, sae::schedule_fingerprint(2000, 100, 47));
}

TEST(Train, DecoderStaysUnitNormEveryStep) {
  const auto data = small_dataset(3);
  for (Arch arch : kArchs) {
    sae::TrainConfig cfg;
    cfg.arch = arch;
    cfg.latents = 20;
    cfg.k = 3;
    cfg.steps = 150;
    cfg.batch_size = 32;
    cfg.learning_rate = 1e-2;
    cfg.l1_coeff = 0.05;
    double worst = 0;
    sae::train(data, cfg, [&](std::size_t, const SaeParams& p, const sae::LossComponents&) {
      worst = std::max(worst, sae::decoder_norm_deviation(p));
    });
    EXPECT_LT(worst, 1e-6) << sae::arch_name(arch);
  }
}

TEST(Train, FinalLossBelowInitialForEveryArchitecture) {
  const auto data = small_dataset(4);
  for (Arch arch : kArchs) {
    sae::TrainConfig cfg;
    cfg.arch = arch;
    cfg.latents = 32;
    cfg.k = 3;
    cfg.steps = 400;
    cfg.batch_size = 64;
    cfg.learning_rate = 3e-3;
    cfg.l1_coeff = 0.01;
    const auto res = sae::train(data, cfg);
    Rng init_rng(cfg.seed);
    const double before =
        sae::evaluate_loss(sae::init_params(10, 32, arch, 3, init_rng), data, cfg).total;
    const double after = sae::evaluate_loss(res.params, data, cfg).total;
    EXPECT_LT(after, before) << sae::arch_name(arch);
    EXPECT_LT(res.final_loss, res.initial_loss) << sae::arch_name(arch);
  }
}

TEST(Train, SyntheticDataBeatsMeanBaselineTenfold) {
  io::SyntheticSpec spec;
  spec.n_true = 64;
  spec.dim = 32;
  spec.samples = 50000;
  spec.p_active = 1.0 / 64.0;
  spec.seed = 5;
  const auto syn = io::gen_synthetic(spec);
  const Matrix& x = syn.dataset.samples;

  // Loss of predicting the dataset mean for every sample.
  std::vector<double> mean(spec.dim, 0.0);
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < spec.dim; ++c) mean[c] += x(r, c);
  for (double& v : mean) v /= static_cast<double>(x.rows());
  double baseline = 0.0;
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < spec.dim; ++c) baseline += (x(r, c) - mean[c]) * (x(r, c) - mean[c]);
  baseline /= static_cast<double>(x.rows());

  sae::TrainConfig cfg;
  cfg.latents = 64;
  cfg.k = 4;
  cfg.steps = 50000;
  const auto result = sae::train(syn.dataset, cfg);
  const double loss = sae::evaluate_loss(result.params, syn.dataset, cfg).total;
  EXPECT_LT(loss * 10.0, baseline) << "loss " << loss << " baseline " << baseline;
}

TEST(Train, CenteringFoldsMeanIntoBiases) {
  auto data = small_dataset(5, 500);
  for (double& v : data.samples.values()) v += 3.0;
  for (Arch arch : kArchs) {
    sae::TrainConfig cfg;
    cfg.arch = arch;
    cfg.latents = 12;
    cfg.k = 3;
    cfg.steps = 0;
    cfg.center_data = true;
    cfg.seed = 9;
    const auto folded = sae::train(data, cfg).params;
    Rng rng(9);
    const auto raw = sae::init_params(10, 12, arch, 3, rng);
    Matrix centered = data.samples;
    std::vector<double> mean(10, 0.0);
    for (std::size_t r = 0; r < centered.rows(); ++r)
      for (std::size_t c = 0; c < 10; ++c) mean[c] += centered(r, c) / 500.0;
    for (std::size_t r = 0; r < centered.rows(); ++r)
      for (std::size_t c = 0; c < 10; ++c) centered(r, c) -= mean[c];
    const Matrix z_raw = sae::encode(raw, centered);
    const Matrix z_folded = sae::encode(folded, data.samples);
    for (std::size_t i = 0; i < z_raw.size(); ++i)
      EXPECT_NEAR(z_raw.values()[i], z_folded.values()[i], 1e-9);
    const Matrix xh = sae::decode(folded, z_folded);
    const Matrix xh_raw = sae::decode(raw, z_raw);
    for (std::size_t r = 0; r < xh.rows(); ++r)
      for (std::size_t c = 0; c < 10; ++c) EXPECT_NEAR(xh(r, c), xh_raw(r, c) + mean[c], 1e-9);
  }
}

TEST(Train, DivergenceReportsStep) {
  const auto data = small_dataset(6, 200);
  sae::TrainConfig cfg;
  cfg.arch = Arch::ReLU;
  cfg.latents = 8;
  cfg.steps = 10;
  cfg.batch_size = 16;
  cfg.learning_rate = 1e300;
  try {
    sae::train(data, cfg);
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    EXPECT_GE(e.step(), 1u);
  }
}

TEST(Train, RejectsBadConfig) {
  const auto data = small_dataset(7, 100);
  sae::TrainConfig cfg;
  cfg.batch_size = 0;
  EXPECT_THROW(sae::train(data, cfg), DomainError);
  cfg = {};
  cfg.learning_rate = -1;
  EXPECT_THROW(sae::train(data, cfg), DomainError);
}

TEST(FiringCounts, TopKSumIsKTimesTokens) {
  Rng rng(11);
  const SaeParams p = random_params(8, 30, Arch::TopK, 4, rng);
  ActivationDataset data;
  data.samples = testing::random_normal(1000, 8, rng);
  const auto stats = sae::firing_counts(p, data);
  EXPECT_EQ(stats.tokens_seen, 1000u);
  EXPECT_EQ(std::accumulate(stats.counts.begin(), stats.counts.end(), std::uint64_t{0}), 4000u);
  EXPECT_DOUBLE_EQ(stats.mean_l0(), 4.0);
}

TEST(FiringCounts, ZeroDatasetNeverFires) {
  Rng rng(12);
  for (Arch arch : kArchs) {
    const SaeParams p = sae::init_params(5, 10, arch, 2, rng);
    ActivationDataset data;
    data.samples = Matrix(50, 5);
    const auto stats = sae::firing_counts(p, data);
    for (auto c : stats.counts) EXPECT_EQ(c, 0u);
  }
}

TEST(FiringCounts, MatchesNaiveLoop) {
  Rng rng(13);
  for (Arch arch : kArchs) {
    const SaeParams p = random_params(6, 12, arch, 3, rng);
    ActivationDataset data;
    data.samples = testing::random_normal(5000, 6, rng);
    const auto stats = sae::firing_counts(p, data);
    std::vector<std::uint64_t> naive(12, 0);
    for (std::size_t r = 0; r < data.count(); ++r) {
      const auto z =
          testing::reference_encode_row(p, {data.samples.row(r).begin(), data.samples.row(r).end()});
      for (std::size_t j = 0; j < 12; ++j)
        if (z[j] > 0) ++naive[j];
    }
    EXPECT_EQ(stats.counts, naive) << sae::arch_name(arch);
  }
}

TEST(PermuteLatents, PreservesFunction) {
  Rng rng(14);
  for (Arch arch : kArchs) {
    const SaeParams p = random_params(5, 9, arch, 3, rng);
    std::vector<std::size_t> order(9);
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);
    const SaeParams q = sae::permute_latents(p, order);
    const Matrix x = testing::random_normal(20, 5, rng);
    const Matrix zp = sae::encode(p, x);
    const Matrix zq = sae::encode(q, x);
    for (std::size_t r = 0; r < x.rows(); ++r)
      for (std::size_t i = 0; i < 9; ++i) EXPECT_EQ(zq(r, i), zp(r, order[i]));
    const Matrix xp = sae::decode(p, zp);
    const Matrix xq = sae::decode(q, zq);
    for (std::size_t i = 0; i < xp.size(); ++i) EXPECT_NEAR(xp.values()[i], xq.values()[i], 1e-12);
  }
}

TEST(ParseArch, Names) {
  EXPECT_EQ(sae::parse_arch("TopK"), Arch::TopK);
  EXPECT_EQ(sae::parse_arch("relu"), Arch::ReLU);
  EXPECT_EQ(sae::parse_arch("GATED"), Arch::Gated);
  EXPECT_THROW(sae::parse_arch("jumprelu"), DomainError);
}

}  // namespace
}  // namespace seedalign
