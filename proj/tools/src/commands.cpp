// Copyright 2026 The seedalign Authors
// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <exception>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <thread>

#include "seedalign/align.hpp"
#include "seedalign/multiseed.hpp"
#include "seedalign/sae.hpp"

namespace seedalign::cli {
namespace {

namespace fs = std::filesystem;

/// Runs fn(0..n-1) on up to `threads` workers. The exception of the lowest
/// failing index is rethrown so failures do not depend on scheduling.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::min<std::size_t>(std::max(1u, threads), n);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

sae::Precision parse_precision(const std::string& s) {
  if (s == "f64") return sae::Precision::F64;
  if (s == "f32") return sae::Precision::F32;
  throw DomainError("precision must be f32 or f64, got '" + s + "'");
}

sae::TrainConfig train_config(const TrainOptions& o, unsigned threads) {
  sae::TrainConfig c;
  c.arch = sae::parse_arch(o.arch);
  c.latents = o.latents;
  c.k = o.k;
  c.seed = o.seed;
  c.steps = o.steps;
  c.batch_size = o.batch_size;
  c.learning_rate = o.learning_rate;
  c.l1_coeff = o.l1_coeff;
  c.adam_beta1 = o.adam_beta1;
  c.adam_beta2 = o.adam_beta2;
  c.adam_eps = o.adam_eps;
  c.precision = parse_precision(o.precision);
  c.center_data = o.center_data;
  c.threads = threads;
  return c;
}

align::SharedCriterion criterion(const MatchOptions& o) {
  if (!(o.tau >= -1.0 && o.tau <= 1.0)) throw DomainError("tau must lie in [-1, 1]");
  return {o.tau, true};
}

align::AlignOptions align_options(const MatchOptions& o) {
  align::AlignOptions a;
  if (o.mode == "independent") {
    a.mode = align::MatchMode::Independent;
  } else if (o.mode == "combined") {
    a.mode = align::MatchMode::Combined;
  } else {
    throw DomainError("mode must be independent or combined, got '" + o.mode + "'");
  }
  if (o.precision == "f64") {
    a.precision = align::CostPrecision::F64;
  } else if (o.precision == "f32") {
    a.precision = align::CostPrecision::F32;
  } else {
    throw DomainError("precision must be f32 or f64, got '" + o.precision + "'");
  }
  if (o.block == 0) throw DomainError("block must be positive");
  a.cosine.block = o.block;
  return a;
}

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name, const fs::path& path) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw io::IoError(io::IoErrorCode::BadHeader,
                        path.string() + " has no column '" + name + "'");
    }
    return static_cast<std::size_t>(it - header.begin());
  }
};

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out(1);
  for (char ch : line) {
    if (ch == ',') {
      out.emplace_back();
    } else if (ch != '\r') {
      out.back() += ch;
    }
  }
  return out;
}

Csv read_csv(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw io::IoError(io::IoErrorCode::OpenFailed, "cannot open " + path.string());
  Csv csv;
  std::string line;
  bool have_header = false;
  while (std::getline(f, line)) {
    if (line.empty() || line.front() == '#') continue;
    if (!have_header) {
      csv.header = split_commas(line);
      have_header = true;
    } else {
      csv.rows.push_back(split_commas(line));
      if (csv.rows.back().size() != csv.header.size()) {
        throw io::IoError(io::IoErrorCode::BadValue,
                          path.string() + ": row " + std::to_string(csv.rows.size()) + " has " +
                              std::to_string(csv.rows.back().size()) + " fields");
      }
    }
  }
  if (!have_header) throw io::IoError(io::IoErrorCode::BadHeader, path.string() + " is empty");
  return csv;
}

double parse_double(const std::string& text, const fs::path& path) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw io::IoError(io::IoErrorCode::BadValue,
                      path.string() + ": '" + text + "' is not a number");
  }
  return v;
}

Table metric_table() { return Table({"metric", "value"}); }

void add_metric(Table& t, std::string_view name, double v) { t.row().add(name).add(v); }

void add_metric(Table& t, std::string_view name, std::uint64_t v) { t.row().add(name).add(v); }

void add_metric(Table& t, std::string_view name, std::string_view v) { t.row().add(name).add(v); }

Table match_table(std::span<const align::MatchRecord> records) {
  Table t({"latent", "enc_counterpart", "dec_counterpart", "cos_enc", "cos_dec", "max_cos_enc",
           "max_cos_dec", "shared"});
  for (const auto& r : records) {
    t.row()
        .add(std::uint64_t{r.latent})
        .add(std::uint64_t{r.enc_counterpart})
        .add(std::uint64_t{r.dec_counterpart})
        .add(r.cos_enc)
        .add(r.cos_dec)
        .add(r.max_cos_enc)
        .add(r.max_cos_dec)
        .add(r.shared);
  }
  return t;
}

std::vector<sae::SaeParams> load_ensemble(RunContext& ctx, const std::vector<std::string>& paths) {
  std::vector<sae::SaeParams> saes;
  for (const auto& p : paths) {
    auto loaded = ctx.load_checkpoint(p);
    ctx.add_seed(loaded.checkpoint.config.seed);
    saes.push_back(std::move(loaded.checkpoint.params));
  }
  return saes;
}

multiseed::SeedEnsemble build_ensemble(RunContext& ctx, const std::vector<std::string>& paths,
                                       const MatchOptions& match, std::size_t base) {
  if (paths.size() < 2) throw DomainError("at least two checkpoints are required");
  if (base >= paths.size()) {
    throw DomainError("base index " + std::to_string(base) + " is out of range for " +
                      std::to_string(paths.size()) + " checkpoints");
  }
  multiseed::SeedEnsemble e(load_ensemble(ctx, paths), criterion(match));
  e.pairwise_matchings(ctx.threads(), align_options(match));
  return e;
}

constexpr const char* kCosineUnits = "cosine similarity in [-1, 1]; fractions of latents in [0, 1]";

}  // namespace

void run_gen_synthetic(RunContext& ctx, const GenSyntheticOptions& o) {
  if (o.dtype != "f32" && o.dtype != "f64") {
    throw DomainError("dtype must be f32 or f64, got '" + o.dtype + "'");
  }
  io::SyntheticSpec spec;
  spec.n_true = o.n_true;
  spec.dim = o.dim;
  spec.samples = o.samples;
  spec.p_active = o.p_active;
  spec.coeff_lo = o.coeff_lo;
  spec.coeff_hi = o.coeff_hi;
  spec.noise_sigma = o.noise_sigma;
  spec.seed = o.seed;
  ctx.add_seed(o.seed);
  auto syn = io::gen_synthetic(spec);
  if (o.dtype == "f32") {
    for (double& v : syn.dataset.samples.values()) v = static_cast<float>(v);
    syn.dataset.dtype = DType::F32;
  }
  io::write_activations(ctx.output("activations.actv"), syn.dataset);

  std::vector<std::string> cols{"feature"};
  for (std::size_t c = 0; c < o.dim; ++c) cols.push_back("x" + std::to_string(c));
  Table features(cols);
  for (std::size_t f = 0; f < o.n_true; ++f) {
    features.row().add(std::uint64_t{f});
    for (double v : syn.features.row(f)) features.add(v);
  }
  ctx.write_table("features.csv", std::move(features), "unit-norm ground-truth feature directions");

  Table summary = metric_table();
  add_metric(summary, "samples", std::uint64_t{o.samples});
  add_metric(summary, "dim", std::uint64_t{o.dim});
  add_metric(summary, "n_true", std::uint64_t{o.n_true});
  add_metric(summary, "mean_active_features",
             static_cast<double>(syn.active_feature.size()) / static_cast<double>(o.samples));
  ctx.write_table("summary.csv", std::move(summary), "counts; mean active features per sample");
  ctx.out() << "wrote " << o.samples << " samples of dimension " << o.dim << "\n";
}

void run_train(RunContext& ctx, const TrainOptions& o) {
  const auto data = ctx.load_activations(o.data);
  const auto cfg = train_config(o, ctx.threads());
  ctx.add_seed(cfg.seed);

  Table log({"step", "total", "reconstruction", "sparsity", "auxiliary"});
  sae::StepObserver observer;
  if (o.log_every > 0) {
    observer = [&](std::size_t step, const sae::SaeParams&, const sae::LossComponents& l) {
      if ((step + 1) % o.log_every != 0 && step + 1 != cfg.steps) return;
      log.row()
          .add(std::uint64_t{step + 1})
          .add(l.total)
          .add(l.reconstruction)
          .add(l.sparsity)
          .add(l.auxiliary);
    };
  }
  const auto result = sae::train(data, cfg, observer);
  io::write_checkpoint(ctx.output("sae.ckpt"), {result.params, cfg});

  const auto full = sae::evaluate_loss(result.params, data, cfg);
  const auto firing = sae::firing_counts(result.params, data);
  Table summary = metric_table();
  add_metric(summary, "initial_loss", result.initial_loss);
  add_metric(summary, "final_loss", result.final_loss);
  add_metric(summary, "dataset_loss", full.total);
  add_metric(summary, "dataset_reconstruction", full.reconstruction);
  add_metric(summary, "mean_l0", firing.mean_l0());
  add_metric(summary, "decoder_norm_deviation", sae::decoder_norm_deviation(result.params));
  add_metric(summary, "schedule_fingerprint", hex64(result.schedule_fingerprint));
  ctx.write_table("summary.csv", std::move(summary),
                  "losses are mean squared error per sample; mean_l0 in active latents per sample");
  if (o.log_every > 0) {
    ctx.write_table("loss.csv", std::move(log), "batch loss before the step's update");
  }
  ctx.out() << "final_loss " << format_double(result.final_loss) << "\n";
}

void run_sweep(RunContext& ctx, const SweepOptions& o) {
  if (o.seeds.empty() || o.archs.empty() || o.latents.empty() || o.ks.empty() || o.steps.empty()) {
    throw DomainError("every sweep axis needs at least one value");
  }
  const auto data = ctx.load_activations(o.base.data);
  for (auto s : o.seeds) ctx.add_seed(s);

  struct Run {
    TrainOptions opts;
    std::string file;
    std::string group;
    sae::TrainResult result;
  };
  std::vector<Run> runs;
  for (const auto& arch_name : o.archs) {
    const auto arch = sae::parse_arch(arch_name);
    // k only matters for TopK; other architectures train once per width.
    const std::vector<std::size_t> ks = arch == sae::Arch::TopK ? o.ks : std::vector<std::size_t>{0};
    for (auto m : o.latents)
      for (auto k : ks)
        for (auto steps : o.steps) {
          std::string group = std::string(sae::arch_name(arch)) + "_m" + std::to_string(m);
          if (arch == sae::Arch::TopK) group += "_k" + std::to_string(k);
          group += "_t" + std::to_string(steps);
          for (auto seed : o.seeds) {
            Run r;
            r.opts = o.base;
            r.opts.arch = sae::arch_name(arch);
            r.opts.latents = m;
            r.opts.k = arch == sae::Arch::TopK ? k : o.base.k;
            r.opts.steps = steps;
            r.opts.seed = seed;
            r.group = group;
            r.file = group + "_s" + std::to_string(seed) + ".ckpt";
            runs.push_back(std::move(r));
          }
        }
  }
  std::vector<sae::TrainConfig> configs;
  for (const auto& r : runs) configs.push_back(train_config(r.opts, 1));

  parallel_for(runs.size(), ctx.threads(),
               [&](std::size_t i) { runs[i].result = sae::train(data, configs[i]); });

  Table run_table({"group", "arch", "latents", "k", "steps", "seed", "initial_loss", "final_loss",
                   "schedule_fingerprint", "checkpoint"});
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& r = runs[i];
    io::write_checkpoint(ctx.output(r.file), {r.result.params, configs[i]});
    run_table.row()
        .add(r.group)
        .add(r.opts.arch)
        .add(std::uint64_t{r.opts.latents})
        .add(std::uint64_t{r.result.params.k})
        .add(std::uint64_t{r.opts.steps})
        .add(std::uint64_t{r.opts.seed})
        .add(r.result.initial_loss)
        .add(r.result.final_loss)
        .add(hex64(r.result.schedule_fingerprint))
        .add(r.file);
  }
  ctx.write_table("runs.csv", std::move(run_table), "losses are mean squared error per sample");

  struct Pair {
    std::size_t a, b;
    align::AlignSummary summary;
  };
  std::vector<Pair> pairs;
  for (std::size_t i = 0; i < runs.size(); ++i)
    for (std::size_t j = i + 1; j < runs.size(); ++j)
      if (runs[i].group == runs[j].group) pairs.push_back({i, j, {}});
  const align::SharedCriterion crit{o.tau, true};
  parallel_for(pairs.size(), ctx.threads(), [&](std::size_t p) {
    pairs[p].summary =
        align::align_pair(runs[pairs[p].a].result.params, runs[pairs[p].b].result.params, crit)
            .summary;
  });

  Table pair_table({"group", "seed_a", "seed_b", "shared_fraction", "mean_matched_enc",
                    "mean_matched_dec", "mean_max_enc", "mean_max_dec"});
  std::map<std::string, std::vector<double>> by_group;
  std::vector<std::string> group_order;
  for (const auto& p : pairs) {
    const auto& s = p.summary;
    const auto& g = runs[p.a].group;
    pair_table.row()
        .add(g)
        .add(std::uint64_t{runs[p.a].opts.seed})
        .add(std::uint64_t{runs[p.b].opts.seed})
        .add(s.shared_fraction)
        .add(s.mean_matched_enc)
        .add(s.mean_matched_dec)
        .add(s.mean_max_enc)
        .add(s.mean_max_dec);
    if (!by_group.contains(g)) group_order.push_back(g);
    by_group[g].push_back(s.shared_fraction);
  }
  ctx.write_table("pairs.csv", std::move(pair_table), kCosineUnits);

  Table groups({"group", "pairs", "mean_shared_fraction", "min_shared_fraction",
                "max_shared_fraction"});
  for (const auto& g : group_order) {
    const auto& v = by_group[g];
    double sum = 0.0;
    for (double x : v) sum += x;
    groups.row()
        .add(g)
        .add(std::uint64_t{v.size()})
        .add(sum / static_cast<double>(v.size()))
        .add(*std::min_element(v.begin(), v.end()))
        .add(*std::max_element(v.begin(), v.end()));
    ctx.out() << g << " shared_fraction " << format_double(sum / static_cast<double>(v.size()))
              << "\n";
  }
  ctx.write_table("groups.csv", std::move(groups), "fractions of latents in [0, 1]");
}

void run_align(RunContext& ctx, const AlignOptions& o) {
  const auto a = ctx.load_checkpoint(o.a).checkpoint;
  const auto b = ctx.load_checkpoint(o.b).checkpoint;
  ctx.add_seed(a.config.seed);
  ctx.add_seed(b.config.seed);
  std::vector<double> taus = o.taus;
  if (taus.empty())
    for (int i = 0; i <= 20; ++i) taus.push_back(i / 20.0);

  const auto pair = align::align_pair(a.params, b.params, criterion(o.match), align_options(o.match));
  const auto& s = pair.summary;
  const auto report = align::matched_vs_max_report(pair.records);

  ctx.write_table("matches.csv", match_table(pair.records), kCosineUnits);

  Table summary = metric_table();
  add_metric(summary, "latents", std::uint64_t{s.latents});
  add_metric(summary, "shared_fraction", s.shared_fraction);
  add_metric(summary, "agreement_fraction", s.agreement_fraction);
  add_metric(summary, "mean_matched_enc", s.mean_matched_enc);
  add_metric(summary, "mean_matched_dec", s.mean_matched_dec);
  add_metric(summary, "mean_max_enc", s.mean_max_enc);
  add_metric(summary, "mean_max_dec", s.mean_max_dec);
  add_metric(summary, "enc_exceed_fraction", report.enc_exceed_fraction);
  add_metric(summary, "dec_exceed_fraction", report.dec_exceed_fraction);
  add_metric(summary, "agreeing_latents", std::uint64_t{s.agreeing.count});
  add_metric(summary, "agreeing_mean_cos", s.agreeing.mean);
  add_metric(summary, "disagreeing_latents", std::uint64_t{s.disagreeing.count});
  add_metric(summary, "disagreeing_mean_cos_enc", s.disagreeing.enc);
  add_metric(summary, "disagreeing_mean_cos_dec", s.disagreeing.dec);
  ctx.write_table("summary.csv", std::move(summary), kCosineUnits);

  const auto strict = align::threshold_sweep(pair.records, taus, true);
  const auto loose = align::threshold_sweep(pair.records, taus, false);
  Table sweep({"tau", "shared_fraction", "shared_fraction_any_counterpart"});
  for (std::size_t i = 0; i < strict.size(); ++i)
    sweep.row().add(strict[i].tau).add(strict[i].shared_fraction).add(loose[i].shared_fraction);
  ctx.write_table("threshold_sweep.csv", std::move(sweep), kCosineUnits);

  Table mvm({"latent", "enc_matched", "enc_max", "dec_matched", "dec_max"});
  for (const auto& r : report.rows)
    mvm.row().add(std::uint64_t{r.latent}).add(r.enc_matched).add(r.enc_max).add(r.dec_matched).add(r.dec_max);
  ctx.write_table("matched_vs_max.csv", std::move(mvm), kCosineUnits);

  ctx.out() << "shared_fraction " << format_double(s.shared_fraction) << "\n";
}

void run_overlap(RunContext& ctx, const OverlapOptions& o) {
  const auto e = build_ensemble(ctx, o.checkpoints, o.match, o.base);
  const auto curve = multiseed::only_in_base_curve(e);
  Table t({"k", "combinations", "runs", "mean_only_in_base", "min_only_in_base",
           "max_only_in_base"});
  for (const auto& r : curve) {
    t.row()
        .add(std::uint64_t{r.k})
        .add(std::uint64_t{r.combinations})
        .add(std::uint64_t{r.runs})
        .add(r.mean_only_in_base)
        .add(r.min_only_in_base)
        .add(r.max_only_in_base);
  }
  ctx.write_table("overlap.csv", std::move(t),
                  "k = number of seeds; only-in-base = fraction of base latents in [0, 1]");

  Table pairs({"sae_a", "sae_b", "shared_fraction", "mean_matched_enc", "mean_matched_dec"});
  for (std::size_t i = 0; i < e.size(); ++i)
    for (std::size_t j = i + 1; j < e.size(); ++j) {
      const auto& s = e.pair(i, j).summary;
      pairs.row()
          .add(std::uint64_t{i})
          .add(std::uint64_t{j})
          .add(s.shared_fraction)
          .add(s.mean_matched_enc)
          .add(s.mean_matched_dec);
    }
  ctx.write_table("pairs.csv", std::move(pairs), kCosineUnits);

  const auto counts = multiseed::shared_count_per_latent(e, o.base);
  const auto cos = multiseed::mean_matched_cosine_per_latent(e, o.base);
  Table per_latent({"latent", "shared_count", "mean_matched_cos"});
  for (std::size_t l = 0; l < counts.size(); ++l)
    per_latent.row().add(std::uint64_t{l}).add(std::uint64_t{counts[l]}).add(cos[l]);
  ctx.write_table("shared_counts.csv", std::move(per_latent),
                  "shared_count = other seeds sharing the latent; cosine in [-1, 1]");
  if (!curve.empty()) {
    ctx.out() << "only_in_base k=" << curve.back().k << " "
              << format_double(curve.back().mean_only_in_base) << "\n";
  }
}

void run_freq(RunContext& ctx, const FreqOptions& o) {
  const auto e = build_ensemble(ctx, o.checkpoints, o.match, o.base);
  const auto data = ctx.load_activations(o.data);
  if (data.dim() != e.sae(o.base).dim()) {
    throw ShapeError("dataset dimension " + std::to_string(data.dim()) +
                     " does not match SAE dimension " + std::to_string(e.sae(o.base).dim()));
  }
  const auto counts = multiseed::shared_count_per_latent(e, o.base);
  const auto stats = sae::firing_counts(e.sae(o.base), data);
  const auto table = multiseed::frequency_vs_sharing_table(stats, counts, e.size() - 1, o.edges);

  Table hist({"shared_count", "bin_lo", "bin_hi", "latents"});
  for (std::size_t s = 0; s < table.histogram.size(); ++s)
    for (std::size_t b = 0; b < table.edges.size(); ++b) {
      const double hi = b + 1 < table.edges.size() ? table.edges[b + 1]
                                                   : std::numeric_limits<double>::infinity();
      hist.row()
          .add(std::uint64_t{s})
          .add(table.edges[b])
          .add(hi)
          .add(std::uint64_t{table.histogram[s][b]});
    }
  ctx.write_table("frequency.csv", std::move(hist),
                  "bins of firing count in samples, [bin_lo, bin_hi); latents per bin");

  Table firing({"latent", "shared_count", "firing_count", "firing_frequency"});
  const double tokens = static_cast<double>(std::max<std::uint64_t>(stats.tokens_seen, 1));
  for (std::size_t l = 0; l < counts.size(); ++l) {
    firing.row()
        .add(std::uint64_t{l})
        .add(std::uint64_t{counts[l]})
        .add(stats.counts[l])
        .add(static_cast<double>(stats.counts[l]) / tokens);
  }
  ctx.write_table("firing.csv", std::move(firing),
                  "firing_count in samples; firing_frequency = firing_count / " +
                      std::to_string(stats.tokens_seen) + " samples");
}

void run_fit_powerlaw(RunContext& ctx, const FitOptions& o) {
  std::vector<double> ks = o.ks;
  std::vector<double> ys = o.ys;
  if (!o.input.empty()) {
    if (!ks.empty() || !ys.empty()) throw DomainError("give either --input or --k/--y, not both");
    ctx.add_input(o.input);
    const auto csv = read_csv(o.input);
    const auto kc = csv.column(o.k_column, o.input);
    const auto yc = csv.column(o.y_column, o.input);
    for (const auto& row : csv.rows) {
      ks.push_back(parse_double(row[kc], o.input));
      ys.push_back(parse_double(row[yc], o.input));
    }
  }
  const auto plain = multiseed::fit_power_law(ks, ys, false);
  const auto offset = multiseed::fit_power_law(ks, ys, true);

  Table fit({"model", "a", "b", "c", "residual_ss"});
  fit.row().add("a*k^-b").add(plain.a).add(plain.b).add(plain.c).add(plain.residual_ss);
  fit.row().add("a*k^-b+c").add(offset.a).add(offset.b).add(offset.c).add(offset.residual_ss);
  ctx.write_table("fit.csv", std::move(fit), "dimensionless; residual_ss = sum of squared residuals");

  Table curve({"k", "observed", "fit_no_offset", "fit_with_offset"});
  for (std::size_t i = 0; i < ks.size(); ++i)
    curve.row().add(ks[i]).add(ys[i]).add(plain(ks[i])).add(offset(ks[i]));
  ctx.write_table("curve.csv", std::move(curve), "k = number of seeds; fraction of latents");
  ctx.out() << "offset fit a=" << format_double(offset.a) << " b=" << format_double(offset.b)
            << " c=" << format_double(offset.c) << "\n";
}

void run_scores(RunContext& ctx, const ScoresOptions& o) {
  const auto a = ctx.load_checkpoint(o.a).checkpoint;
  const auto b = ctx.load_checkpoint(o.b).checkpoint;
  ctx.add_seed(a.config.seed);
  ctx.add_seed(b.config.seed);
  multiseed::ScoreBinOptions opts;
  opts.tau = criterion(o.match).tau;
  if (!o.edges.empty()) opts.edges = o.edges;
  if (o.measure == "mean") {
    opts.measure = multiseed::AlignmentMeasure::Mean;
  } else if (o.measure == "encoder") {
    opts.measure = multiseed::AlignmentMeasure::Encoder;
  } else if (o.measure == "decoder") {
    opts.measure = multiseed::AlignmentMeasure::Decoder;
  } else {
    throw DomainError("measure must be mean, encoder or decoder, got '" + o.measure + "'");
  }
  if (o.counterpart != "decoder" && o.counterpart != "encoder") {
    throw DomainError("counterpart must be decoder or encoder, got '" + o.counterpart + "'");
  }
  opts.decoder_counterpart = o.counterpart == "decoder";

  const auto pair = align::align_pair(a.params, b.params, criterion(o.match), align_options(o.match));
  ctx.add_input(o.scores_a);
  ctx.add_input(o.scores_b);
  const std::size_t m = a.params.latents();
  const auto sa = io::load_scores(o.scores_a, m);
  const auto sb = io::load_scores(o.scores_b, m);
  if (sa.size() != m || sb.size() != m) {
    throw ShapeError("score files index latents beyond the SAE width " + std::to_string(m));
  }
  const auto bins = multiseed::score_alignment_table(sa, sb, pair.records, opts);

  Table summary({"bin_lo", "bin_hi", "pairs", "mean_score_a", "mean_score_b"});
  Table examples({"bin_lo", "bin_hi", "latent_a", "latent_b", "alignment", "score_a", "score_b"});
  Table all({"latent_a", "latent_b", "alignment", "score_a", "score_b"});
  for (const auto& bin : bins) {
    summary.row().add(bin.lo).add(bin.hi).add(std::uint64_t{bin.pairs.size()});
    if (bin.pairs.empty()) {
      summary.add("").add("");
    } else {
      summary.add(bin.mean_a).add(bin.mean_b);
    }
    if (bin.selected) {
      const auto& p = *bin.selected;
      examples.row()
          .add(bin.lo)
          .add(bin.hi)
          .add(std::uint64_t{p.latent_a})
          .add(std::uint64_t{p.latent_b})
          .add(p.alignment)
          .add(p.score_a)
          .add(p.score_b);
    }
    for (const auto& p : bin.pairs) {
      all.row()
          .add(std::uint64_t{p.latent_a})
          .add(std::uint64_t{p.latent_b})
          .add(p.alignment)
          .add(p.score_a)
          .add(p.score_b);
    }
  }
  const std::string units = "alignment = cosine similarity; scores in [0, 1]; empty = no pairs";
  ctx.write_table("score_bins.csv", std::move(summary), units);
  ctx.write_table("score_examples.csv", std::move(examples), units);
  ctx.write_table("score_pairs.csv", std::move(all), units);
}

void run_report(RunContext& ctx, const ReportOptions& o) {
  if (o.runs.empty()) throw DomainError("report needs at least one run directory");
  Table runs({"run", "command", "status", "config_hash", "outputs"});
  Table metrics({"run", "command", "metric", "value"});
  for (const auto& dir : o.runs) {
    const fs::path manifest_path = fs::path(dir) / "manifest.json";
    ctx.add_input(manifest_path);
    std::ifstream f(manifest_path);
    if (!f) throw io::IoError(io::IoErrorCode::OpenFailed, "cannot open " + manifest_path.string());
    nlohmann::json m;
    try {
      m = nlohmann::json::parse(f);
    } catch (const nlohmann::json::exception& e) {
      throw io::IoError(io::IoErrorCode::BadValue, manifest_path.string() + ": " + e.what());
    }
    const std::string command = m.value("command", "");
    runs.row()
        .add(dir)
        .add(command)
        .add(m.value("status", ""))
        .add(m.value("config_hash", ""))
        .add(std::uint64_t{m.value("outputs", nlohmann::json::array()).size()});
    const fs::path summary_path = fs::path(dir) / "summary.csv";
    if (!fs::exists(summary_path)) continue;
    ctx.add_input(summary_path);
    const auto csv = read_csv(summary_path);
    const auto mc = csv.column("metric", summary_path);
    const auto vc = csv.column("value", summary_path);
    for (const auto& row : csv.rows) metrics.row().add(dir).add(command).add(row[mc]).add(row[vc]);
  }
  ctx.write_table("report.csv", std::move(runs), "one row per run directory");
  ctx.write_table("metrics.csv", std::move(metrics), "values copied from each run's summary.csv");
}

}  // namespace seedalign::cli
