// Copyright 2026 The seedalign Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace seedalign {

/// Comma-separated table. Written as '#'-prefixed comment lines (units,
/// generating config hash), one header row, then data rows.
class Table {
 public:
  explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void comment(std::string line) { comments_.push_back(std::move(line)); }
  Table& row();
  Table& add(std::string_view text);
  Table& add(const char* text) { return add(std::string_view(text)); }
  Table& add(double value);
  Table& add(std::int64_t value);
  Table& add(std::uint64_t value);
  Table& add(int value) { return add(static_cast<std::int64_t>(value)); }
  Table& add(bool value) { return add(std::string_view(value ? "1" : "0")); }

  const std::vector<std::string>& columns() const noexcept { return columns_; }
  const std::vector<std::vector<std::string>>& rows() const noexcept { return rows_; }

  std::string str() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::string> comments_;
  std::vector<std::vector<std::string>> rows_;
};

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view text);

std::string hex64(std::uint64_t value);

}  // namespace seedalign
