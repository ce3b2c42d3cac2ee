// Copyright 2026 The seedalign Authors
// SPDX-License-Identifier: Apache-2.0

#include "run_context.hpp"

#include <fstream>

#include "seedalign/cli.hpp"

namespace seedalign::cli {

namespace fs = std::filesystem;

RunContext::RunContext(std::string command, fs::path out_dir, unsigned threads, std::ostream& out,
                       std::ostream& err)
    : command_(std::move(command)),
      out_dir_(std::move(out_dir)),
      threads_(threads),
      out_(out),
      err_(err) {
  std::error_code ec;
  fs::create_directories(out_dir_, ec);
  if (ec || !fs::is_directory(out_dir_)) {
    throw io::IoError(io::IoErrorCode::OpenFailed,
                      "cannot create output directory " + out_dir_.string());
  }
}

void RunContext::set_config(nlohmann::json config) { config_ = std::move(config); }

std::uint64_t RunContext::config_hash() const {
  return fnv1a(command_ + "\n" + config_.dump());
}

void RunContext::warn(const std::string& message) {
  err_ << "warning: " << message << "\n";
  warnings_.push_back(message);
}

void RunContext::write_table(const std::string& name, Table table, const std::string& units) {
  table.comment("units: " + units);
  table.comment("config_hash: " + hex64(config_hash()));
  table.write(output(name));
}

fs::path RunContext::output(const std::string& name) {
  outputs_.push_back(name);
  return out_dir_ / name;
}

io::LoadedCheckpoint RunContext::load_checkpoint(const fs::path& p) {
  add_input(p);
  auto loaded = io::read_checkpoint(p);
  for (const auto& w : loaded.warnings) warn(p.string() + ": " + w);
  return loaded;
}

ActivationDataset RunContext::load_activations(const fs::path& p) {
  add_input(p);
  return io::read_activations(p);
}

void RunContext::write_manifest(int exit_code, const std::string& error) const {
  nlohmann::json m;
  m["tool"] = "seedalign";
  m["version"] = version();
  m["command"] = command_;
  m["status"] = exit_code == kOk ? "ok" : "error";
  m["exit_code"] = exit_code;
  if (!error.empty()) m["error"] = error;
  m["config"] = config_;
  m["config_hash"] = hex64(config_hash());
  m["seeds"] = seeds_;
  m["inputs"] = inputs_;
  m["outputs"] = outputs_;
  m["warnings"] = warnings_;
  m["threads"] = threads_;
  std::ofstream f(out_dir_ / "manifest.json", std::ios::binary | std::ios::trunc);
  f << m.dump(2) << "\n";
  if (!f) err_ << "error: cannot write " << (out_dir_ / "manifest.json").string() << "\n";
}

}  // namespace seedalign::cli
