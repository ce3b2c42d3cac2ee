// Copyright 2026 The seedalign Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "seedalign/dataset.hpp"
#include "seedalign/error.hpp"
#include "seedalign/sae.hpp"

namespace seedalign::io {

enum class IoErrorCode {
  OpenFailed,
  WriteFailed,
  BadMagic,
  BadVersion,
  BadDType,
  Truncated,
  TrailingData,
  BadHeader,
  LayoutMismatch,
  BadValue,
  DuplicateIndex,
};

const char* io_error_name(IoErrorCode code) noexcept;

/// File-format failure. Readers throw this instead of returning partial data.
class IoError : public Error {
 public:
  IoError(IoErrorCode code, const std::string& msg)
      : Error(std::string(io_error_name(code)) + ": " + msg), code_(code) {}
  IoErrorCode code() const noexcept { return code_; }

 private:
  IoErrorCode code_;
};

/// ACTV layout (all integers little-endian):
///
///   offset  size  field
///   0       4     magic "ACTV"
///   4       1     version = 1
///   5       4     u32 d (columns)
///   9       8     u64 n (rows)
///   17      1     dtype tag: 4 = f32, 8 = f64
///   18      n*d*w row-major IEEE-754 little-endian payload
inline constexpr std::size_t kActvHeaderBytes = 18;
inline constexpr std::uint8_t kActvVersion = 1;

void write_activations(const std::filesystem::path& path, const ActivationDataset& data);
ActivationDataset read_activations(const std::filesystem::path& path);

struct Checkpoint {
  sae::SaeParams params;
  sae::TrainConfig config;
};

struct LoadedCheckpoint {
  Checkpoint checkpoint;
  /// Set when a decoder row deviates from unit norm by more than 1e-6.
  bool norm_warning = false;
  std::vector<std::string> warnings;
};

/// Text header followed by little-endian f64 tensors:
///
///   SAECKPT 1
///   <key> <value>        one line per field (arch, latents, dim, k, seed, ...)
///   tensors w_enc b_enc w_dec b_dec [r_mag b_mag]
///   end
///   <w_enc m*d><b_enc m><w_dec m*d><b_dec d>[<r_mag m><b_mag m>]
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
LoadedCheckpoint read_checkpoint(const std::filesystem::path& path);

/// Ground-truth generator for desk-scale experiments.
struct SyntheticSpec {
  std::size_t n_true = 64;
  std::size_t dim = 32;
  std::size_t samples = 10000;
  double p_active = 0.0625;
  /// Coefficients of active features are uniform on [coeff_lo, coeff_hi].
  double coeff_lo = 0.5;
  double coeff_hi = 1.5;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
};

struct SyntheticData {
  ActivationDataset dataset;
  /// n_true x d, unit-norm rows.
  Matrix features;
  /// CSR support: sample r uses features active_feature[offsets[r] .. offsets[r+1]).
  std::vector<std::size_t> offsets;
  std::vector<std::uint32_t> active_feature;
  std::vector<double> coefficient;
};

SyntheticData gen_synthetic(const SyntheticSpec& spec);

/// Scores indexed by latent; std::nullopt marks unscored latents.
using ScoreVector = std::vector<std::optional<double>>;

/// Reads "latent,score" lines (optional header, '#' comments). The result
/// has max(size, largest index + 1) entries.
ScoreVector load_scores(const std::filesystem::path& path, std::size_t size = 0);

}  // namespace seedalign::io
