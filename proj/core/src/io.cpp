// Copyright 2026 The seedalign Authors
// SPDX-License-Identifier: Apache-2.0

#include "seedalign/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "seedalign/rng.hpp"
#include "seedalign/table.hpp"

namespace seedalign::io {

namespace {

constexpr char kActvMagic[4] = {'A', 'C', 'T', 'V'};
constexpr const char* kCheckpointMagic = "SAECKPT 1";
constexpr std::size_t kMaxHeaderBytes = 1 << 16;
constexpr double kNormTolerance = 1e-6;

template <typename U>
void put_le(std::string& out, U value) {
  for (std::size_t b = 0; b < sizeof(U); ++b)
    out.push_back(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * b)) & 0xffU));
}

template <typename U>
U get_le(const unsigned char* p) {
  std::uint64_t v = 0;
  for (std::size_t b = 0; b < sizeof(U); ++b) v |= static_cast<std::uint64_t>(p[b]) << (8 * b);
  return static_cast<U>(v);
}

void append_doubles(std::string& out, std::span<const double> values) {
  for (double v : values) put_le(out, std::bit_cast<std::uint64_t>(v));
}

void append_floats(std::string& out, std::span<const double> values) {
  for (double v : values) put_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError(IoErrorCode::OpenFailed, "cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void spit(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError(IoErrorCode::OpenFailed, "cannot create " + path.string());
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  f.flush();
  if (!f) throw IoError(IoErrorCode::WriteFailed, "short write to " + path.string());
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
  const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  return res.ec == std::errc() && res.ptr == text.data() + text.size();
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string> expected_tensors(sae::Arch arch) {
  std::vector<std::string> names{"w_enc", "b_enc", "w_dec", "b_dec"};
  if (arch == sae::Arch::Gated) {
    names.emplace_back("r_mag");
    names.emplace_back("b_mag");
  }
  return names;
}

}  // namespace

const char* io_error_name(IoErrorCode code) noexcept {
  switch (code) {
    case IoErrorCode::OpenFailed: return "open failed";
    case IoErrorCode::WriteFailed: return "write failed";
    case IoErrorCode::BadMagic: return "bad magic";
    case IoErrorCode::BadVersion: return "unsupported version";
    case IoErrorCode::BadDType: return "bad dtype";
    case IoErrorCode::Truncated: return "truncated";
    case IoErrorCode::TrailingData: return "trailing data";
    case IoErrorCode::BadHeader: return "bad header";
    case IoErrorCode::LayoutMismatch: return "layout mismatch";
    case IoErrorCode::BadValue: return "bad value";
    case IoErrorCode::DuplicateIndex: return "duplicate index";
  }
  return "io error";
}

void write_activations(const std::filesystem::path& path, const ActivationDataset& data) {
  if (data.count() == 0 || data.dim() == 0) {
    throw IoError(IoErrorCode::BadValue, "refusing to write an empty dataset");
  }
  if (data.dim() > 0xffffffffULL) throw IoError(IoErrorCode::BadValue, "dimension exceeds u32");
  linalg::require_finite(data.samples.values(), "activation dataset");
  std::string out;
  const std::size_t width = static_cast<std::size_t>(data.dtype);
  out.reserve(kActvHeaderBytes + data.samples.size() * width);
  out.append(kActvMagic, 4);
  out.push_back(static_cast<char>(kActvVersion));
  put_le(out, static_cast<std::uint32_t>(data.dim()));
  put_le(out, static_cast<std::uint64_t>(data.count()));
  out.push_back(static_cast<char>(data.dtype));
  if (data.dtype == DType::F64) {
    append_doubles(out, data.samples.values());
  } else {
    append_floats(out, data.samples.values());
  }
  spit(path, out);
}

ActivationDataset read_activations(const std::filesystem::path& path) {
  const std::string bytes = slurp(path);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (bytes.size() < 4 || std::memcmp(p, kActvMagic, 4) != 0) {
    throw IoError(IoErrorCode::BadMagic, path.string() + " is not an ACTV file");
  }
  if (bytes.size() < kActvHeaderBytes) {
    throw IoError(IoErrorCode::Truncated, path.string() + " ends inside the header");
  }
  if (p[4] != kActvVersion) {
    throw IoError(IoErrorCode::BadVersion,
                  path.string() + " has version " + std::to_string(static_cast<int>(p[4])));
  }
  const auto d = get_le<std::uint32_t>(p + 5);
  const auto n = get_le<std::uint64_t>(p + 9);
  const std::uint8_t tag = p[17];
  if (tag != 4 && tag != 8) {
    throw IoError(IoErrorCode::BadDType, path.string() + " has dtype tag " + std::to_string(tag));
  }
  if (d == 0 || n == 0) throw IoError(IoErrorCode::BadValue, path.string() + " is empty");
  const std::size_t values = static_cast<std::size_t>(n) * d;
  if (values / d != n) throw IoError(IoErrorCode::BadValue, "shape overflows");
  const std::size_t payload = values * tag;
  const std::size_t have = bytes.size() - kActvHeaderBytes;
  if (have < payload) {
    throw IoError(IoErrorCode::Truncated, path.string() + " holds " + std::to_string(have) +
                                              " payload bytes, header promises " +
                                              std::to_string(payload));
  }
  if (have > payload) {
    throw IoError(IoErrorCode::TrailingData, path.string() + " has " +
                                                 std::to_string(have - payload) +
                                                 " bytes past the payload");
  }
  std::vector<double> data(values);
  const unsigned char* src = p + kActvHeaderBytes;
  if (tag == 8) {
    for (std::size_t i = 0; i < values; ++i)
      data[i] = std::bit_cast<double>(get_le<std::uint64_t>(src + 8 * i));
  } else {
    for (std::size_t i = 0; i < values; ++i)
      data[i] = static_cast<double>(std::bit_cast<float>(get_le<std::uint32_t>(src + 4 * i)));
  }
  for (std::size_t i = 0; i < values; ++i) {
    if (!std::isfinite(data[i])) {
      throw IoError(IoErrorCode::BadValue, path.string() + " has a non-finite value at row " +
                                               std::to_string(i / d));
    }
  }
  ActivationDataset ds;
  ds.samples = Matrix(static_cast<std::size_t>(n), d, std::move(data));
  ds.source = path.string();
  ds.dtype = tag == 8 ? DType::F64 : DType::F32;
  return ds;
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const auto& p = ckpt.params;
  const auto& c = ckpt.config;
  sae::validate_shapes(p);
  std::string out = std::string(kCheckpointMagic) + "\n";
  auto kv = [&](const char* key, const std::string& value) {
    out += key;
    out += ' ';
    out += value;
    out += '\n';
  };
  kv("arch", std::string(sae::arch_name(p.arch)));
  kv("latents", std::to_string(p.latents()));
  kv("dim", std::to_string(p.dim()));
  kv("k", std::to_string(p.k));
  kv("seed", std::to_string(c.seed));
  kv("steps", std::to_string(c.steps));
  kv("batch_size", std::to_string(c.batch_size));
  kv("learning_rate", format_double(c.learning_rate));
  kv("l1_coeff", format_double(c.l1_coeff));
  kv("adam_beta1", format_double(c.adam_beta1));
  kv("adam_beta2", format_double(c.adam_beta2));
  kv("adam_eps", format_double(c.adam_eps));
  kv("precision", c.precision == sae::Precision::F32 ? "f32" : "f64");
  kv("center_data", c.center_data ? "1" : "0");
  kv("threads", std::to_string(c.threads));
  std::string tensors;
  for (const auto& name : expected_tensors(p.arch)) tensors += (tensors.empty() ? "" : " ") + name;
  kv("tensors", tensors);
  out += "end\n";
  append_doubles(out, p.w_enc.values());
  append_doubles(out, p.b_enc);
  append_doubles(out, p.w_dec.values());
  append_doubles(out, p.b_dec);
  if (p.arch == sae::Arch::Gated) {
    append_doubles(out, p.r_mag);
    append_doubles(out, p.b_mag);
  }
  spit(path, out);
}

LoadedCheckpoint read_checkpoint(const std::filesystem::path& path) {
  const std::string bytes = slurp(path);
  const std::string magic_line = std::string(kCheckpointMagic) + "\n";
  if (bytes.compare(0, magic_line.size(), magic_line) != 0) {
    if (bytes.compare(0, 8, "SAECKPT ") == 0) {
      throw IoError(IoErrorCode::BadVersion, path.string() + " has an unsupported version");
    }
    throw IoError(IoErrorCode::BadMagic, path.string() + " is not an SAE checkpoint");
  }
  const std::size_t end_pos = bytes.find("\nend\n");
  if (end_pos == std::string::npos || end_pos > kMaxHeaderBytes) {
    throw IoError(IoErrorCode::Truncated, path.string() + " has no complete header");
  }
  std::map<std::string, std::string, std::less<>> fields;
  {
    std::istringstream header(bytes.substr(magic_line.size(), end_pos + 1 - magic_line.size()));
    std::string line;
    while (std::getline(header, line)) {
      if (line.empty()) continue;
      const auto space = line.find(' ');
      if (space == std::string::npos) {
        throw IoError(IoErrorCode::BadHeader, "malformed header line '" + line + "'");
      }
      fields[line.substr(0, space)] = line.substr(space + 1);
    }
  }
  auto field = [&](const char* key) -> const std::string& {
    const auto it = fields.find(key);
    if (it == fields.end()) {
      throw IoError(IoErrorCode::BadHeader, path.string() + " lacks header field '" + key + "'");
    }
    return it->second;
  };
  auto as_size = [&](const char* key) {
    std::uint64_t v = 0;
    if (!parse_number(field(key), v)) {
      throw IoError(IoErrorCode::BadHeader, "field '" + std::string(key) + "' is not an integer");
    }
    return v;
  };
  auto as_double = [&](const char* key) {
    double v = 0;
    if (!parse_number(field(key), v)) {
      throw IoError(IoErrorCode::BadHeader, "field '" + std::string(key) + "' is not a number");
    }
    return v;
  };

  Checkpoint ck;
  auto& c = ck.config;
  try {
    c.arch = sae::parse_arch(field("arch"));
  } catch (const DomainError& e) {
    throw IoError(IoErrorCode::BadHeader, e.what());
  }
  const std::size_t m = as_size("latents");
  const std::size_t d = as_size("dim");
  if (m == 0 || d == 0) throw IoError(IoErrorCode::BadHeader, "latents and dim must be positive");
  c.latents = m;
  c.k = as_size("k");
  c.seed = as_size("seed");
  c.steps = as_size("steps");
  c.batch_size = as_size("batch_size");
  c.learning_rate = as_double("learning_rate");
  c.l1_coeff = as_double("l1_coeff");
  c.adam_beta1 = as_double("adam_beta1");
  c.adam_beta2 = as_double("adam_beta2");
  c.adam_eps = as_double("adam_eps");
  const std::string& precision = field("precision");
  if (precision != "f32" && precision != "f64") {
    throw IoError(IoErrorCode::BadHeader, "precision must be f32 or f64");
  }
  c.precision = precision == "f32" ? sae::Precision::F32 : sae::Precision::F64;
  c.center_data = field("center_data") == "1";
  c.threads = static_cast<unsigned>(as_size("threads"));

  std::string tensors;
  for (const auto& name : expected_tensors(c.arch)) tensors += (tensors.empty() ? "" : " ") + name;
  if (field("tensors") != tensors) {
    throw IoError(IoErrorCode::LayoutMismatch,
                  "tensor list '" + field("tensors") + "' does not match arch " +
                      std::string(sae::arch_name(c.arch)));
  }

  std::size_t count = 2 * m * d + m + d;
  if (c.arch == sae::Arch::Gated) count += 2 * m;
  const std::size_t payload_start = end_pos + 5;
  const std::size_t have = bytes.size() - payload_start;
  if (have < count * 8) {
    throw IoError(IoErrorCode::Truncated, path.string() + " holds " + std::to_string(have) +
                                              " tensor bytes, expected " +
                                              std::to_string(count * 8));
  }
  if (have > count * 8) {
    throw IoError(IoErrorCode::TrailingData, path.string() + " has bytes past the tensors");
  }
  const auto* src = reinterpret_cast<const unsigned char*>(bytes.data()) + payload_start;
  auto take = [&](std::size_t len) {
    std::vector<double> v(len);
    for (std::size_t i = 0; i < len; ++i) {
      v[i] = std::bit_cast<double>(get_le<std::uint64_t>(src));
      if (!std::isfinite(v[i])) throw IoError(IoErrorCode::BadValue, "non-finite parameter");
      src += 8;
    }
    return v;
  };

  auto& p = ck.params;
  p.arch = c.arch;
  p.k = c.arch == sae::Arch::TopK ? c.k : 0;
  p.w_enc = Matrix(m, d, take(m * d));
  p.b_enc = take(m);
  p.w_dec = Matrix(m, d, take(m * d));
  p.b_dec = take(d);
  if (c.arch == sae::Arch::Gated) {
    p.r_mag = take(m);
    p.b_mag = take(m);
  }

  LoadedCheckpoint out;
  const auto norms = linalg::row_norms(p.w_dec);
  for (std::size_t i = 0; i < norms.size(); ++i) {
    if (std::abs(norms[i] - 1.0) > kNormTolerance) {
      out.norm_warning = true;
      out.warnings.push_back("decoder row " + std::to_string(i) + " has norm " +
                             format_double(norms[i]));
    }
  }
  out.checkpoint = std::move(ck);
  return out;
}

SyntheticData gen_synthetic(const SyntheticSpec& spec) {
  if (spec.n_true == 0 || spec.dim == 0 || spec.samples == 0) {
    throw DomainError("synthetic spec needs positive feature count, dimension and sample count");
  }
  if (!(spec.p_active > 0.0 && spec.p_active < 1.0)) {
    throw DomainError("p_active must lie in (0, 1)");
  }
  if (!(spec.coeff_lo >= 0.0 && spec.coeff_lo <= spec.coeff_hi)) {
    throw DomainError("coefficient range must satisfy 0 <= lo <= hi");
  }
  if (!(spec.noise_sigma >= 0.0)) throw DomainError("noise_sigma must be nonnegative");

  Rng rng(spec.seed);
  SyntheticData out;
  out.features = Matrix(spec.n_true, spec.dim);
  for (std::size_t f = 0; f < spec.n_true; ++f) {
    auto row = out.features.row(f);
    double sq = 0.0;
    while (sq == 0.0) {
      sq = 0.0;
      for (double& v : row) {
        v = rng.normal();
        sq += v * v;
      }
    }
    const double norm = std::sqrt(sq);
    for (double& v : row) v /= norm;
  }

  Matrix samples(spec.samples, spec.dim);
  out.offsets.reserve(spec.samples + 1);
  out.offsets.push_back(0);
  for (std::size_t r = 0; r < spec.samples; ++r) {
    auto x = samples.row(r);
    for (std::size_t f = 0; f < spec.n_true; ++f) {
      if (!rng.bernoulli(spec.p_active)) continue;
      const double coeff = rng.uniform(spec.coeff_lo, spec.coeff_hi);
      const auto dir = out.features.row(f);
      for (std::size_t c = 0; c < spec.dim; ++c) x[c] += coeff * dir[c];
      out.active_feature.push_back(static_cast<std::uint32_t>(f));
      out.coefficient.push_back(coeff);
    }
    if (spec.noise_sigma > 0.0)
      for (double& v : x) v += spec.noise_sigma * rng.normal();
    out.offsets.push_back(out.active_feature.size());
  }
  out.dataset.samples = std::move(samples);
  out.dataset.source = "synthetic:seed=" + std::to_string(spec.seed);
  out.dataset.dtype = DType::F64;
  return out;
}

ScoreVector load_scores(const std::filesystem::path& path, std::size_t size) {
  std::ifstream f(path);
  if (!f) throw IoError(IoErrorCode::OpenFailed, "cannot open " + path.string());
  std::map<std::size_t, double> parsed;
  std::string line;
  std::size_t line_no = 0;
  bool seen_data = false;
  while (std::getline(f, line)) {
    ++line_no;
    const std::string_view text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto comma = text.find(',');
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (comma == std::string_view::npos) {
      throw IoError(IoErrorCode::BadValue, where + ": expected 'latent,score'");
    }
    const auto idx_text = trim(text.substr(0, comma));
    const auto score_text = trim(text.substr(comma + 1));
    std::size_t idx = 0;
    double score = 0.0;
    if (!parse_number(idx_text, idx)) {
      if (!seen_data) {
        seen_data = true;  // header row
        continue;
      }
      throw IoError(IoErrorCode::BadValue, where + ": latent index is not an integer");
    }
    seen_data = true;
    if (!parse_number(score_text, score)) {
      throw IoError(IoErrorCode::BadValue, where + ": score is not a number");
    }
    if (!(score >= 0.0 && score <= 1.0)) {
      throw IoError(IoErrorCode::BadValue, where + ": score " + std::string(score_text) +
                                               " is outside [0, 1]");
    }
    if (!parsed.emplace(idx, score).second) {
      throw IoError(IoErrorCode::DuplicateIndex,
                    where + ": latent " + std::to_string(idx) + " scored twice");
    }
  }
  std::size_t n = size;
  if (!parsed.empty()) n = std::max(n, parsed.rbegin()->first + 1);
  ScoreVector out(n);
  for (const auto& [idx, score] : parsed) out[idx] = score;
  return out;
}

}  // namespace seedalign::io
