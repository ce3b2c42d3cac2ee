// Copyright 2026 The seedalign Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "seedalign/io.hpp"
#include "seedalign/table.hpp"

namespace seedalign::cli {

/// Everything a subcommand reads and writes, echoed into manifest.json.
class RunContext {
 public:
  RunContext(std::string command, std::filesystem::path out_dir, unsigned threads,
             std::ostream& out, std::ostream& err);

  const std::string& command() const noexcept { return command_; }
  const std::filesystem::path& out_dir() const noexcept { return out_dir_; }
  unsigned threads() const noexcept { return threads_; }
  std::ostream& out() noexcept { return out_; }
  std::ostream& err() noexcept { return err_; }

  void set_config(nlohmann::json config);
  const nlohmann::json& config() const noexcept { return config_; }
  /// FNV-1a of the command and merged config, out-dir and thread count excluded.
  std::uint64_t config_hash() const;

  void add_seed(std::uint64_t seed) { seeds_.push_back(seed); }
  void add_input(const std::filesystem::path& p) { inputs_.push_back(p.string()); }
  void warn(const std::string& message);

  /// Writes `table` under out_dir with units and config hash comments.
  void write_table(const std::string& name, Table table, const std::string& units);
  /// Registers a non-table output and returns its full path.
  std::filesystem::path output(const std::string& name);

  io::LoadedCheckpoint load_checkpoint(const std::filesystem::path& p);
  ActivationDataset load_activations(const std::filesystem::path& p);

  void write_manifest(int exit_code, const std::string& error) const;

 private:
  std::string command_;
  std::filesystem::path out_dir_;
  unsigned threads_;
  std::ostream& out_;
  std::ostream& err_;
  nlohmann::json config_ = nlohmann::json::object();
  std::vector<std::uint64_t> seeds_;
  std::vector<std::string> inputs_;
  std::vector<std::string> outputs_;
  std::vector<std::string> warnings_;
};

}  // namespace seedalign::cli
