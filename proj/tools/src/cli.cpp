// Copyright 2026 The seedalign Authors
// SPDX-License-Identifier: Apache-2.0

#include "seedalign/cli.hpp"

#include <functional>
#include <memory>
#include <optional>

#include "CLI11.hpp"
#include "commands.hpp"
#include "seedalign/error.hpp"
#include "seedalign/io.hpp"

namespace seedalign::cli {
namespace {

struct Command {
  CLI::App* app = nullptr;
  std::string out_dir;
  std::function<nlohmann::json()> config;
  std::function<void(RunContext&)> run;
};

void add_match_options(CLI::App* sub, MatchOptions& m) {
  sub->add_option("--tau", m.tau, "Cosine threshold of the shared criterion");
  sub->add_option("--mode", m.mode, "Matching mode: independent or combined");
  sub->add_option("--cost-precision", m.precision, "Cosine matrix precision: f64 or f32");
  sub->add_option("--block", m.block, "Cosine tile size");
}

void add_train_options(CLI::App* sub, TrainOptions& t, bool single) {
  sub->add_option("--data", t.data, "Activation dataset (ACTV)")->required();
  if (single) {
    sub->add_option("--arch", t.arch, "topk, relu or gated");
    sub->add_option("--latents", t.latents, "Number of latents m");
    sub->add_option("--k", t.k, "Active latents per sample (topk)");
    sub->add_option("--seed", t.seed, "Initialization seed");
    sub->add_option("--steps", t.steps, "Optimizer steps");
    sub->add_option("--log-every", t.log_every, "Write a loss row every N steps (0 = off)");
  }
  sub->add_option("--batch-size", t.batch_size, "Samples per batch");
  sub->add_option("--lr", t.learning_rate, "Adam learning rate");
  sub->add_option("--l1", t.l1_coeff, "L1 coefficient (relu, gated)");
  sub->add_option("--beta1", t.adam_beta1, "Adam beta1");
  sub->add_option("--beta2", t.adam_beta2, "Adam beta2");
  sub->add_option("--eps", t.adam_eps, "Adam epsilon");
  sub->add_option("--precision", t.precision, "Parameter precision: f64 or f32");
  sub->add_flag("--center", t.center_data, "Subtract the dataset mean during training");
}

template <typename Opts>
Command make_command(CLI::App& root, const std::string& name, const std::string& help,
                     std::shared_ptr<Opts> opts, void (*fn)(RunContext&, const Opts&)) {
  Command c;
  c.app = root.add_subcommand(name, help);
  c.config = [opts] { return nlohmann::json(*opts); };
  c.run = [opts, fn](RunContext& ctx) { fn(ctx, *opts); };
  return c;
}

int exit_code_for(const std::exception_ptr& e, std::string& message) {
  try {
    std::rethrow_exception(e);
  } catch (const io::IoError& ex) {
    message = ex.what();
    return kIo;
  } catch (const ShapeError& ex) {
    message = std::string("shape mismatch: ") + ex.what();
    return kShapeMismatch;
  } catch (const DivergenceError& ex) {
    message = std::string("diverged: ") + ex.what();
    return kDivergence;
  } catch (const DomainError& ex) {
    message = std::string("invalid argument: ") + ex.what();
    return kUsage;
  } catch (const std::exception& ex) {
    message = ex.what();
    return kFailure;
  } catch (...) {
    message = "unknown error";
    return kFailure;
  }
}

}  // namespace

const char* version() noexcept { return SEEDALIGN_VERSION; }

int dispatch(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Trains sparse autoencoders under controlled seeds and measures shared latents.",
               "seedalign"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", version());
  app.set_config("--config", "", "TOML config file; command-line flags take precedence");
  unsigned threads = 1;
  app.add_option("--threads", threads, "Worker thread budget")
      ->envname("SEEDALIGN_THREADS")
      ->check(CLI::PositiveNumber);

  std::vector<Command> commands;

  auto gen = std::make_shared<GenSyntheticOptions>();
  commands.push_back(make_command(app, "gen-synthetic", "Generate a synthetic superposition dataset",
                                  gen, &run_gen_synthetic));
  {
    auto* s = commands.back().app;
    s->add_option("--n-true", gen->n_true, "Ground-truth feature count");
    s->add_option("--dim", gen->dim, "Activation dimension");
    s->add_option("--samples", gen->samples, "Sample count");
    s->add_option("--p-active", gen->p_active, "Per-feature firing probability");
    s->add_option("--coeff-lo", gen->coeff_lo, "Lower bound of active coefficients");
    s->add_option("--coeff-hi", gen->coeff_hi, "Upper bound of active coefficients");
    s->add_option("--noise-sigma", gen->noise_sigma, "Gaussian noise standard deviation");
    s->add_option("--seed", gen->seed, "Generator seed");
    s->add_option("--dtype", gen->dtype, "Stored precision: f64 or f32");
  }

  auto train = std::make_shared<TrainOptions>();
  commands.push_back(make_command(app, "train", "Train one SAE", train, &run_train));
  add_train_options(commands.back().app, *train, true);

  auto sweep = std::make_shared<SweepOptions>();
  commands.push_back(make_command(app, "sweep", "Train a grid of SAEs and align seeds per group",
                                  sweep, &run_sweep));
  {
    auto* s = commands.back().app;
    add_train_options(s, sweep->base, false);
    s->add_option("--seeds", sweep->seeds, "Seeds trained for every configuration");
    s->add_option("--archs", sweep->archs, "Architectures");
    s->add_option("--latents", sweep->latents, "Widths");
    s->add_option("--ks", sweep->ks, "TopK k values");
    s->add_option("--steps", sweep->steps, "Step counts (token budget = steps x batch size)");
    s->add_option("--tau", sweep->tau, "Cosine threshold of the shared criterion");
  }

  auto al = std::make_shared<AlignOptions>();
  commands.push_back(make_command(app, "align", "Align two SAEs", al, &run_align));
  {
    auto* s = commands.back().app;
    s->add_option("--a", al->a, "First checkpoint")->required();
    s->add_option("--b", al->b, "Second checkpoint")->required();
    s->add_option("--taus", al->taus, "Ascending thresholds for the sweep table");
    add_match_options(s, al->match);
  }

  auto ov = std::make_shared<OverlapOptions>();
  commands.push_back(make_command(app, "overlap", "Only-in-base fraction against seed count", ov,
                                  &run_overlap));
  {
    auto* s = commands.back().app;
    s->add_option("--checkpoints", ov->checkpoints, "Checkpoints of one configuration")->required();
    s->add_option("--base", ov->base, "Index of the base checkpoint for per-latent counts");
    add_match_options(s, ov->match);
  }

  auto fq = std::make_shared<FreqOptions>();
  commands.push_back(make_command(app, "freq", "Firing frequency against sharing count", fq,
                                  &run_freq));
  {
    auto* s = commands.back().app;
    s->add_option("--checkpoints", fq->checkpoints, "Checkpoints of one configuration")->required();
    s->add_option("--data", fq->data, "Activation dataset used to count firings")->required();
    s->add_option("--base", fq->base, "Index of the base checkpoint");
    s->add_option("--edges", fq->edges, "Ascending firing-count bin edges");
    add_match_options(s, fq->match);
  }

  auto fit = std::make_shared<FitOptions>();
  commands.push_back(make_command(app, "fit-powerlaw", "Fit a*k^-b (+c) to a decay curve", fit,
                                  &run_fit_powerlaw));
  {
    auto* s = commands.back().app;
    s->add_option("--input", fit->input, "Table with k and y columns (e.g. overlap.csv)");
    s->add_option("--k", fit->ks, "k values");
    s->add_option("--y", fit->ys, "y values");
    s->add_option("--k-column", fit->k_column, "Column holding k");
    s->add_option("--y-column", fit->y_column, "Column holding y");
  }

  auto sc = std::make_shared<ScoresOptions>();
  commands.push_back(make_command(app, "scores", "Explanation scores binned by alignment", sc,
                                  &run_scores));
  {
    auto* s = commands.back().app;
    s->add_option("--a", sc->a, "First checkpoint")->required();
    s->add_option("--b", sc->b, "Second checkpoint")->required();
    s->add_option("--scores-a", sc->scores_a, "latent,score table of the first SAE")->required();
    s->add_option("--scores-b", sc->scores_b, "latent,score table of the second SAE")->required();
    s->add_option("--measure", sc->measure, "Alignment of a pair: mean, encoder or decoder");
    s->add_option("--counterpart", sc->counterpart, "Pair latents by decoder or encoder matching");
    s->add_option("--edges", sc->edges, "Ascending alignment bin edges");
    add_match_options(s, sc->match);
  }

  auto rep = std::make_shared<ReportOptions>();
  commands.push_back(make_command(app, "report", "Aggregate manifests and summaries of runs", rep,
                                  &run_report));
  commands.back().app->add_option("--runs", rep->runs, "Run directories")->required();

  for (auto& c : commands) {
    c.app->add_option("--out-dir", c.out_dir, "Output directory")->required();
  }

  Command* selected = nullptr;
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }
  for (auto& c : commands)
    if (c.app->parsed()) selected = &c;
  if (selected == nullptr) return kUsage;

  std::optional<RunContext> ctx;
  try {
    ctx.emplace(selected->app->get_name(), selected->out_dir, threads, out, err);
  } catch (...) {
    std::string message;
    const int code = exit_code_for(std::current_exception(), message);
    err << "error: " << message << "\n";
    return code;
  }
  int code = kOk;
  std::string message;
  try {
    ctx->set_config(selected->config());
    selected->run(*ctx);
  } catch (...) {
    code = exit_code_for(std::current_exception(), message);
    err << "error: " << message << "\n";
  }
  ctx->write_manifest(code, message);
  return code;
}

}  // namespace seedalign::cli
