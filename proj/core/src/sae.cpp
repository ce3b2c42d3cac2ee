// Copyright 2026 The seedalign Authors
// SPDX-License-Identifier: Apache-2.0

#include "seedalign/sae.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

namespace seedalign::sae {

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

void fnv_mix(std::uint64_t& h, std::uint64_t value) {
  for (int b = 0; b < 8; ++b) {
    h ^= (value >> (8 * b)) & 0xffU;
    h *= kFnvPrime;
  }
}

struct Forward {
  Matrix hidden;  // x w_enc^T
  Matrix gate;    // hidden + b_enc (the ReLU/TopK pre-activation, or the Gated gate path)
  Matrix mag;     // Gated magnitude pre-activation
  Matrix z;
};

Forward forward(const SaeParams& p, const Matrix& x) {
  if (x.cols() != p.dim()) {
    throw ShapeError("input has " + std::to_string(x.cols()) + " columns, model expects " +
                     std::to_string(p.dim()));
  }
  const std::size_t n = x.rows();
  const std::size_t m = p.latents();
  Forward f;
  f.hidden = linalg::matmul_transposed(x, p.w_enc);
  f.gate = f.hidden;
  for (std::size_t r = 0; r < n; ++r) {
    auto row = f.gate.row(r);
    for (std::size_t j = 0; j < m; ++j) row[j] += p.b_enc[j];
  }
  f.z = Matrix(n, m);
  switch (p.arch) {
    case Arch::ReLU:
      for (std::size_t i = 0; i < f.z.size(); ++i)
        f.z.values()[i] = std::max(0.0, f.gate.values()[i]);
      break;
    case Arch::TopK: {
      std::vector<double> post(m);
      for (std::size_t r = 0; r < n; ++r) {
        const auto g = f.gate.row(r);
        for (std::size_t j = 0; j < m; ++j) post[j] = std::max(0.0, g[j]);
        auto zr = f.z.row(r);
        for (std::size_t j : linalg::topk_select(post, p.k)) zr[j] = post[j];
      }
      break;
    }
    case Arch::Gated: {
      f.mag = Matrix(n, m);
      for (std::size_t r = 0; r < n; ++r) {
        const auto h = f.hidden.row(r);
        const auto g = f.gate.row(r);
        auto mg = f.mag.row(r);
        auto zr = f.z.row(r);
        for (std::size_t j = 0; j < m; ++j) {
          mg[j] = h[j] * std::exp(p.r_mag[j]) + p.b_mag[j];
          zr[j] = g[j] > 0.0 ? std::max(0.0, mg[j]) : 0.0;
        }
      }
      break;
    }
  }
  return f;
}

// Writes scale * (decode(code) - x) into `residual`; returns the summed squared error.
double add_reconstruction_terms(const Matrix& code, const Matrix& x, const SaeParams& p,
                                double scale, Matrix& residual) {
  residual = decode(p, code);
  double sq = 0.0;
  for (std::size_t i = 0; i < residual.size(); ++i) {
    const double e = residual.values()[i] - x.values()[i];
    residual.values()[i] = scale * e;
    sq += e * e;
  }
  return sq;
}

Matrix rows_of(const Matrix& src, std::size_t start, std::size_t count) {
  const std::size_t n = src.rows();
  Matrix out(count, src.cols());
  for (std::size_t r = 0; r < count; ++r) {
    const auto s = src.row((start + r) % n);
    std::copy(s.begin(), s.end(), out.row(r).begin());
  }
  return out;
}

struct AdamSlot {
  std::vector<double> m;
  std::vector<double> v;
};

void adam_update(std::span<double> param, std::span<const double> grad, AdamSlot& slot,
                 const TrainConfig& cfg, double bias1, double bias2) {
  if (slot.m.empty()) {
    slot.m.assign(param.size(), 0.0);
    slot.v.assign(param.size(), 0.0);
  }
  const double b1 = cfg.adam_beta1;
  const double b2 = cfg.adam_beta2;
  for (std::size_t i = 0; i < param.size(); ++i) {
    slot.m[i] = b1 * slot.m[i] + (1.0 - b1) * grad[i];
    slot.v[i] = b2 * slot.v[i] + (1.0 - b2) * grad[i] * grad[i];
    const double mhat = slot.m[i] / bias1;
    const double vhat = slot.v[i] / bias2;
    param[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.adam_eps);
  }
}

void normalize_decoder_rows(Matrix& w_dec) {
  for (std::size_t i = 0; i < w_dec.rows(); ++i) {
    auto row = w_dec.row(i);
    double sq = 0.0;
    for (double v : row) sq += v * v;
    const double norm = std::sqrt(sq);
    if (norm > 0.0)
      for (double& v : row) v /= norm;
  }
}

void round_to_float(std::span<double> values) {
  for (double& v : values) v = static_cast<double>(static_cast<float>(v));
}

void check_config(const TrainConfig& cfg, std::size_t dim) {
  if (dim == 0 || cfg.latents == 0) throw DomainError("dimension and latent count must be >= 1");
  if (cfg.arch == Arch::TopK && cfg.k == 0) throw DomainError("TopK needs k >= 1");
  if (cfg.batch_size == 0) throw DomainError("batch_size must be >= 1");
  if (!(cfg.learning_rate > 0.0)) throw DomainError("learning_rate must be positive");
  if (!(cfg.l1_coeff >= 0.0)) throw DomainError("l1_coeff must be nonnegative");
  if (!(cfg.adam_beta1 > 0.0 && cfg.adam_beta1 < 1.0 && cfg.adam_beta2 > 0.0 &&
        cfg.adam_beta2 < 1.0)) {
    throw DomainError("adam betas must lie in (0, 1)");
  }
  if (!(cfg.adam_eps > 0.0)) throw DomainError("adam_eps must be positive");
}

}  // namespace

std::string_view arch_name(Arch arch) noexcept {
  switch (arch) {
    case Arch::TopK:
      return "topk";
    case Arch::ReLU:
      return "relu";
    case Arch::Gated:
      return "gated";
  }
  return "unknown";
}

Arch parse_arch(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "topk") return Arch::TopK;
  if (lower == "relu") return Arch::ReLU;
  if (lower == "gated") return Arch::Gated;
  throw DomainError("unknown architecture '" + std::string(name) + "'");
}

double FiringStats::mean_l0() const noexcept {
  if (tokens_seen == 0) return 0.0;
  const auto total = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  return static_cast<double>(total) / static_cast<double>(tokens_seen);
}

void validate_shapes(const SaeParams& p) {
  const std::size_t m = p.latents();
  const std::size_t d = p.dim();
  auto fail = [](const std::string& what) { throw ShapeError("SAE parameter shape: " + what); };
  if (m == 0 || d == 0) fail("empty model");
  if (p.w_dec.rows() != m || p.w_dec.cols() != d) fail("w_dec does not match w_enc");
  if (p.b_enc.size() != m) fail("b_enc length");
  if (p.b_dec.size() != d) fail("b_dec length");
  if (p.arch == Arch::Gated) {
    if (p.r_mag.size() != m || p.b_mag.size() != m) fail("gated magnitude parameters");
  } else if (!p.r_mag.empty() || !p.b_mag.empty()) {
    fail("magnitude parameters on a non-gated model");
  }
}

SaeParams init_params(std::size_t dim, std::size_t latents, Arch arch, std::size_t k, Rng& rng) {
  if (dim == 0 || latents == 0) throw DomainError("dimension and latent count must be >= 1");
  SaeParams p;
  p.arch = arch;
  p.k = arch == Arch::TopK ? k : 0;
  p.w_dec = Matrix(latents, dim);
  for (std::size_t i = 0; i < latents; ++i) {
    auto row = p.w_dec.row(i);
    double sq = 0.0;
    // Redraw the (probability-zero) all-zero vector.
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
  p.w_enc = p.w_dec;
  p.b_enc.assign(latents, 0.0);
  p.b_dec.assign(dim, 0.0);
  if (arch == Arch::Gated) {
    p.r_mag.assign(latents, 0.0);
    p.b_mag.assign(latents, 0.0);
  }
  return p;
}

Matrix encode(const SaeParams& p, const Matrix& x) { return forward(p, x).z; }

Matrix decode(const SaeParams& p, const Matrix& z) {
  if (z.cols() != p.latents()) {
    throw ShapeError("latent matrix has " + std::to_string(z.cols()) + " columns, model has " +
                     std::to_string(p.latents()) + " latents");
  }
  Matrix out = linalg::matmul(z, p.w_dec);
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += p.b_dec[c];
  }
  return out;
}

LossAndGrads loss_and_grads(const SaeParams& p, const Matrix& batch, const TrainConfig& cfg) {
  const std::size_t n = batch.rows();
  if (n == 0) throw DomainError("loss_and_grads needs at least one sample");
  const std::size_t m = p.latents();
  const std::size_t d = p.dim();
  const Forward f = forward(p, batch);
  const double inv_n = 1.0 / static_cast<double>(n);

  LossAndGrads out;
  auto& g = out.grads;
  g.w_enc = Matrix(m, d);
  g.b_enc.assign(m, 0.0);
  g.w_dec = Matrix(m, d);
  g.b_dec.assign(d, 0.0);

  // d(loss)/d(x_hat) = 2/n (x_hat - x)
  Matrix dxhat;
  out.loss.reconstruction = add_reconstruction_terms(f.z, batch, p, 2.0 * inv_n, dxhat) * inv_n;

  auto accumulate_decoder = [&](const Matrix& code, const Matrix& upstream) {
    for (std::size_t r = 0; r < n; ++r) {
      const auto cr = code.row(r);
      const auto ur = upstream.row(r);
      for (std::size_t j = 0; j < m; ++j) {
        if (cr[j] == 0.0) continue;
        auto gw = g.w_dec.row(j);
        for (std::size_t c = 0; c < d; ++c) gw[c] += cr[j] * ur[c];
      }
      for (std::size_t c = 0; c < d; ++c) g.b_dec[c] += ur[c];
    }
  };
  // Back-propagates `upstream` (n x d) through w_dec into latent slot j of row r.
  auto latent_grad = [&](const Matrix& upstream, std::size_t r, std::size_t j) {
    const auto ur = upstream.row(r);
    const auto wd = p.w_dec.row(j);
    double s = 0.0;
    for (std::size_t c = 0; c < d; ++c) s += ur[c] * wd[c];
    return s;
  };

  accumulate_decoder(f.z, dxhat);

  // d(loss)/d(hidden) where hidden = x w_enc^T; b_enc receives the gate-path share.
  Matrix dhidden(n, m);
  const double l1_per_sample = cfg.l1_coeff * inv_n;

  if (p.arch == Arch::TopK || p.arch == Arch::ReLU) {
    const bool l1 = p.arch == Arch::ReLU;
    double l1_sum = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const auto zr = f.z.row(r);
      auto dh = dhidden.row(r);
      for (std::size_t j = 0; j < m; ++j) {
        if (zr[j] <= 0.0) continue;
        double dz = latent_grad(dxhat, r, j);
        if (l1) {
          dz += l1_per_sample;
          l1_sum += zr[j];
        }
        dh[j] = dz;
        g.b_enc[j] += dz;
      }
    }
    if (l1) out.loss.sparsity = cfg.l1_coeff * l1_sum * inv_n;
  } else {
    g.r_mag.assign(m, 0.0);
    g.b_mag.assign(m, 0.0);
    // Gate-path reconstruction through the same decoder.
    Matrix gate_code(n, m);
    double l1_sum = 0.0;
    for (std::size_t i = 0; i < gate_code.size(); ++i) {
      const double v = std::max(0.0, f.gate.values()[i]);
      gate_code.values()[i] = v;
      l1_sum += v;
    }
    out.loss.sparsity = cfg.l1_coeff * l1_sum * inv_n;
    Matrix daux;
    out.loss.auxiliary = add_reconstruction_terms(gate_code, batch, p, 2.0 * inv_n, daux) * inv_n;
    accumulate_decoder(gate_code, daux);

    std::vector<double> scale(m);
    for (std::size_t j = 0; j < m; ++j) scale[j] = std::exp(p.r_mag[j]);
    for (std::size_t r = 0; r < n; ++r) {
      const auto zr = f.z.row(r);
      const auto gr = f.gate.row(r);
      const auto hr = f.hidden.row(r);
      auto dh = dhidden.row(r);
      for (std::size_t j = 0; j < m; ++j) {
        // Magnitude path: active where both gate and magnitude are positive.
        if (zr[j] > 0.0) {
          const double dmag = latent_grad(dxhat, r, j);
          dh[j] += dmag * scale[j];
          g.b_mag[j] += dmag;
          g.r_mag[j] += dmag * hr[j] * scale[j];
        }
        // Gate path: the indicator has zero derivative; the L1 and auxiliary
        // terms see ReLU(gate).
        if (gr[j] > 0.0) {
          const double dgate = latent_grad(daux, r, j) + l1_per_sample;
          dh[j] += dgate;
          g.b_enc[j] += dgate;
        }
      }
    }
  }

  for (std::size_t r = 0; r < n; ++r) {
    const auto dh = dhidden.row(r);
    const auto xr = batch.row(r);
    for (std::size_t j = 0; j < m; ++j) {
      if (dh[j] == 0.0) continue;
      auto gw = g.w_enc.row(j);
      for (std::size_t c = 0; c < d; ++c) gw[c] += dh[j] * xr[c];
    }
  }

  out.loss.total = out.loss.reconstruction + out.loss.sparsity + out.loss.auxiliary;
  return out;
}

void project_decoder_gradient(const Matrix& w_dec, Matrix& grad) {
  if (grad.rows() != w_dec.rows() || grad.cols() != w_dec.cols()) {
    throw ShapeError("decoder gradient shape does not match decoder");
  }
  for (std::size_t i = 0; i < w_dec.rows(); ++i) {
    const auto w = w_dec.row(i);
    auto gr = grad.row(i);
    double along = 0.0;
    for (std::size_t c = 0; c < w.size(); ++c) along += gr[c] * w[c];
    for (std::size_t c = 0; c < w.size(); ++c) gr[c] -= along * w[c];
  }
}

LossComponents evaluate_loss(const SaeParams& p, const ActivationDataset& data,
                             const TrainConfig& cfg) {
  constexpr std::size_t kChunk = 4096;
  const std::size_t n = data.count();
  LossComponents sum;
  for (std::size_t start = 0; start < n; start += kChunk) {
    const std::size_t count = std::min(kChunk, n - start);
    const Matrix chunk = rows_of(data.samples, start, count);
    const LossComponents part = loss_and_grads(p, chunk, cfg).loss;
    const double w = static_cast<double>(count);
    sum.reconstruction += part.reconstruction * w;
    sum.sparsity += part.sparsity * w;
    sum.auxiliary += part.auxiliary * w;
  }
  const double inv = 1.0 / static_cast<double>(n);
  sum.reconstruction *= inv;
  sum.sparsity *= inv;
  sum.auxiliary *= inv;
  sum.total = sum.reconstruction + sum.sparsity + sum.auxiliary;
  return sum;
}

std::uint64_t schedule_fingerprint(std::size_t samples, std::size_t steps,
                                   std::size_t batch_size) {
  std::uint64_t h = kFnvOffset;
  for (std::size_t s = 0; s < steps; ++s) {
    const std::size_t start = (s * batch_size) % samples;
    for (std::size_t r = 0; r < batch_size; ++r) fnv_mix(h, (start + r) % samples);
  }
  return h;
}

TrainResult train(const ActivationDataset& data, const TrainConfig& cfg,
                  const StepObserver& observer) {
  check_config(cfg, data.dim());
  const std::size_t n = data.count();
  if (n == 0) throw DomainError("training dataset is empty");
  const std::size_t d = data.dim();

  Rng rng(cfg.seed);
  TrainResult result;
  SaeParams& p = result.params;
  p = init_params(d, cfg.latents, cfg.arch, cfg.k, rng);

  Vector mean(d, 0.0);
  if (cfg.center_data) {
    for (std::size_t r = 0; r < n; ++r) {
      const auto row = data.samples.row(r);
      for (std::size_t c = 0; c < d; ++c) mean[c] += row[c];
    }
    for (double& v : mean) v /= static_cast<double>(n);
  }

  AdamSlot s_w_enc, s_b_enc, s_w_dec, s_b_dec, s_r_mag, s_b_mag;
  std::uint64_t fingerprint = kFnvOffset;
  double bias1 = 1.0;
  double bias2 = 1.0;

  for (std::size_t step = 0; step < cfg.steps; ++step) {
    const std::size_t start = (step * cfg.batch_size) % n;
    Matrix batch = rows_of(data.samples, start, cfg.batch_size);
    for (std::size_t r = 0; r < cfg.batch_size; ++r) fnv_mix(fingerprint, (start + r) % n);
    if (cfg.center_data) {
      for (std::size_t r = 0; r < batch.rows(); ++r) {
        auto row = batch.row(r);
        for (std::size_t c = 0; c < d; ++c) row[c] -= mean[c];
      }
    }

    LossAndGrads lg = loss_and_grads(p, batch, cfg);
    if (!std::isfinite(lg.loss.total)) {
      throw DivergenceError("loss became non-finite at step " + std::to_string(step), step);
    }
    if (step == 0) result.initial_loss = lg.loss.total;
    result.final_loss = lg.loss.total;

    project_decoder_gradient(p.w_dec, lg.grads.w_dec);
    bias1 *= cfg.adam_beta1;
    bias2 *= cfg.adam_beta2;
    const double c1 = 1.0 - bias1;
    const double c2 = 1.0 - bias2;
    adam_update(p.w_enc.values(), lg.grads.w_enc.values(), s_w_enc, cfg, c1, c2);
    adam_update(p.b_enc, lg.grads.b_enc, s_b_enc, cfg, c1, c2);
    adam_update(p.w_dec.values(), lg.grads.w_dec.values(), s_w_dec, cfg, c1, c2);
    adam_update(p.b_dec, lg.grads.b_dec, s_b_dec, cfg, c1, c2);
    if (p.arch == Arch::Gated) {
      adam_update(p.r_mag, lg.grads.r_mag, s_r_mag, cfg, c1, c2);
      adam_update(p.b_mag, lg.grads.b_mag, s_b_mag, cfg, c1, c2);
    }
    if (cfg.precision == Precision::F32) {
      round_to_float(p.w_enc.values());
      round_to_float(p.b_enc);
      round_to_float(p.w_dec.values());
      round_to_float(p.b_dec);
      round_to_float(p.r_mag);
      round_to_float(p.b_mag);
    }
    normalize_decoder_rows(p.w_dec);
    if (observer) observer(step, p, lg.loss);
  }

  if (cfg.center_data) {
    // Model was fit on x - mean; rewrite it for raw x.
    const Matrix mu(1, d, mean);
    const Matrix shift = linalg::matmul_transposed(mu, p.w_enc);
    for (std::size_t j = 0; j < p.latents(); ++j) {
      p.b_enc[j] -= shift(0, j);
      if (p.arch == Arch::Gated) p.b_mag[j] -= shift(0, j) * std::exp(p.r_mag[j]);
    }
    for (std::size_t c = 0; c < d; ++c) p.b_dec[c] += mean[c];
  }

  result.schedule_fingerprint = fingerprint;
  return result;
}

FiringStats firing_counts(const SaeParams& p, const ActivationDataset& data) {
  constexpr std::size_t kChunk = 4096;
  FiringStats stats;
  stats.counts.assign(p.latents(), 0);
  const std::size_t n = data.count();
  for (std::size_t start = 0; start < n; start += kChunk) {
    const std::size_t count = std::min(kChunk, n - start);
    const Matrix z = encode(p, rows_of(data.samples, start, count));
    for (std::size_t r = 0; r < count; ++r) {
      const auto zr = z.row(r);
      for (std::size_t j = 0; j < zr.size(); ++j)
        if (zr[j] > 0.0) ++stats.counts[j];
    }
  }
  stats.tokens_seen = n;
  return stats;
}

SaeParams permute_latents(const SaeParams& p, std::span<const std::size_t> order) {
  const std::size_t m = p.latents();
  if (order.size() != m) throw ShapeError("permutation length does not match latent count");
  std::vector<bool> seen(m, false);
  for (std::size_t v : order) {
    if (v >= m || seen[v]) throw DomainError("latent order is not a permutation");
    seen[v] = true;
  }
  SaeParams q = p;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t src = order[i];
    std::copy_n(p.w_enc.row(src).begin(), p.dim(), q.w_enc.row(i).begin());
    std::copy_n(p.w_dec.row(src).begin(), p.dim(), q.w_dec.row(i).begin());
    q.b_enc[i] = p.b_enc[src];
    if (p.arch == Arch::Gated) {
      q.r_mag[i] = p.r_mag[src];
      q.b_mag[i] = p.b_mag[src];
    }
  }
  return q;
}

double decoder_norm_deviation(const SaeParams& p) {
  double worst = 0.0;
  for (double norm : linalg::row_norms(p.w_dec)) worst = std::max(worst, std::abs(norm - 1.0));
  return worst;
}

}  // namespace seedalign::sae
