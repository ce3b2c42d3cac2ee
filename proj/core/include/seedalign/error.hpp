// Copyright 2026 The seedalign Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace seedalign {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Operand shapes do not agree (row/column counts, latent counts, ...).
class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& msg) : Error(msg) {}
};

/// Input violates a numeric precondition (zero-norm row, NaN, out-of-range value).
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& msg) : Error(msg) {}
};

/// Loss or parameters became non-finite during optimization.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& msg, std::size_t step)
      : Error(msg), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

}  // namespace seedalign
