// Copyright 2026 The seedalign Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "seedalign/dataset.hpp"
#include "seedalign/linalg.hpp"
#include "seedalign/rng.hpp"

namespace seedalign::sae {

enum class Arch { TopK, ReLU, Gated };

std::string_view arch_name(Arch arch) noexcept;
/// Accepts "topk", "relu", "gated" (case-insensitive).
Arch parse_arch(std::string_view name);

/// Arithmetic width used for parameter storage during training. F32 rounds
/// every parameter to single precision after each optimizer step.
enum class Precision { F64, F32 };

/// One trained sparse autoencoder.
///
/// Row i of w_enc and row i of w_dec belong to latent i. For Gated models
/// b_enc is the gate bias and r_mag / b_mag parameterize the magnitude path
/// `(w_enc x) * exp(r_mag) + b_mag`; both vectors are empty otherwise.
struct SaeParams {
  Arch arch = Arch::TopK;
  std::size_t k = 0;  // active latents per sample, TopK only
  Matrix w_enc;       // m x d
  Vector b_enc;       // m
  Matrix w_dec;       // m x d, unit-norm rows
  Vector b_dec;       // d
  Vector r_mag;       // m, Gated only
  Vector b_mag;       // m, Gated only

  std::size_t latents() const noexcept { return w_enc.rows(); }
  std::size_t dim() const noexcept { return w_enc.cols(); }

  bool operator==(const SaeParams&) const = default;
};

struct TrainConfig {
  Arch arch = Arch::TopK;
  std::size_t latents = 64;
  std::size_t k = 4;
  std::uint64_t seed = 0;
  std::size_t steps = 1000;
  std::size_t batch_size = 64;
  double learning_rate = 1e-3;
  double l1_coeff = 0.0;  // ignored by TopK
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  Precision precision = Precision::F64;
  /// Subtract the dataset mean before training; the mean is folded back
  /// into the biases so the returned model consumes raw activations.
  bool center_data = false;
  /// Recorded for reproducibility. Training runs on one thread.
  unsigned threads = 1;
};

struct LossComponents {
  double total = 0.0;
  double reconstruction = 0.0;  // mean over samples of squared L2 error
  double sparsity = 0.0;        // l1_coeff * mean L1 of latents (gate path for Gated)
  double auxiliary = 0.0;       // Gated only: gate-path reconstruction error
};

/// Gradients shaped like SaeParams.
struct Gradients {
  Matrix w_enc;
  Vector b_enc;
  Matrix w_dec;
  Vector b_dec;
  Vector r_mag;
  Vector b_mag;
};

struct LossAndGrads {
  LossComponents loss;
  Gradients grads;
};

struct FiringStats {
  std::vector<std::uint64_t> counts;  // per latent, samples with activation > 0
  std::uint64_t tokens_seen = 0;

  double mean_l0() const noexcept;
};

struct TrainResult {
  SaeParams params;
  double initial_loss = 0.0;  // first batch, before any update
  double final_loss = 0.0;    // last batch, before the last update
  /// Hash of the row indices of every batch in consumption order.
  std::uint64_t schedule_fingerprint = 0;
};

/// Called after each optimizer step with the 0-based step index, the updated
/// parameters and the loss of the batch that produced the step.
using StepObserver =
    std::function<void(std::size_t step, const SaeParams& params, const LossComponents& loss)>;

/// Decoder rows are i.i.d. uniform unit vectors; encoder rows start equal to
/// the decoder rows; all biases and magnitude parameters are zero.
SaeParams init_params(std::size_t dim, std::size_t latents, Arch arch, std::size_t k, Rng& rng);

/// Latent activations, n x m.
Matrix encode(const SaeParams& p, const Matrix& x);

/// Reconstructions z * w_dec + b_dec, n x d.
Matrix decode(const SaeParams& p, const Matrix& z);

/// Exact loss gradients of one batch. No decoder projection is applied here;
/// see project_decoder_gradient.
LossAndGrads loss_and_grads(const SaeParams& p, const Matrix& batch, const TrainConfig& cfg);

/// Removes from each decoder-row gradient its component along the (unit)
/// decoder row.
void project_decoder_gradient(const Matrix& w_dec, Matrix& grad);

/// Loss over a whole dataset, evaluated in fixed-size chunks.
LossComponents evaluate_loss(const SaeParams& p, const ActivationDataset& data,
                             const TrainConfig& cfg);

/// Adam on a fixed cyclic batch order that does not depend on cfg.seed.
/// Throws DivergenceError when the loss turns non-finite.
TrainResult train(const ActivationDataset& data, const TrainConfig& cfg,
                  const StepObserver& observer = {});

/// Fingerprint train() would report for this dataset size and schedule.
std::uint64_t schedule_fingerprint(std::size_t samples, std::size_t steps, std::size_t batch_size);

FiringStats firing_counts(const SaeParams& p, const ActivationDataset& data);

/// Relabels latents: latent i of the result is latent order[i] of p.
SaeParams permute_latents(const SaeParams& p, std::span<const std::size_t> order);

/// Largest |norm - 1| over decoder rows.
double decoder_norm_deviation(const SaeParams& p);

/// Throws ShapeError when the parameter blocks disagree in size.
void validate_shapes(const SaeParams& p);

}  // namespace seedalign::sae
