// Copyright 2026 The seedalign Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>

#include "seedalign/linalg.hpp"

namespace seedalign {

/// On-disk element width of an activation file.
enum class DType : std::uint8_t { F32 = 4, F64 = 8 };

/// A set of activation vectors, one per row. Samples are held in double
/// regardless of the on-disk width.
struct ActivationDataset {
  Matrix samples;  // n x d
  std::string source;
  DType dtype = DType::F64;

  std::size_t dim() const noexcept { return samples.cols(); }
  std::size_t count() const noexcept { return samples.rows(); }
};

}  // namespace seedalign
