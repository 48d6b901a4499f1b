#include "dicnet/cli/commands.hpp"

#include "dicnet/core/error.hpp"
#include "dicnet/core/rng.hpp"
#include "dicnet/data/io.hpp"
#include "dicnet/data/masks.hpp"
#include "dicnet/data/synthetic.hpp"
#include "dicnet/diffcore/gradcheck.hpp"
#include "dicnet/diffcore/matrix_io.hpp"
#include "dicnet/trainer/experiment.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <utility>

namespace dicnet::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const CLI::Validator kRate(
    [](std::string& text) -> std::string {
      try {
        const double v = std::stod(text);
        if (v >= 0.0 && v < 1.0) return {};
      } catch (const std::exception&) {
      }
      return "rate must lie in [0, 1), got " + text;
    },
    "RATE in [0,1)");

const CLI::Validator kFraction(
    [](std::string& text) -> std::string {
      try {
        const double v = std::stod(text);
        if (v > 0.0 && v <= 1.0) return {};
      } catch (const std::exception&) {
      }
      return "fraction must lie in (0, 1], got " + text;
    },
    "FRACTION in (0,1]");

struct TrainingFlags {
  TrainConfig config;
  Architecture arch;
  std::string mode = "semi-supervised";
  std::string init = "kaiming_uniform";

  void add_to(CLI::App* app) {
    app->add_option("--epochs", config.max_epochs, "Maximum epochs T")->capture_default_str();
    app->add_option("--batch-size", config.batch_size, "Batch size B")->capture_default_str();
    app->add_option("--lr", config.learning_rate, "Adam learning rate")->capture_default_str();
    app->add_option("--beta", config.weights.beta, "Contrastive loss weight")->capture_default_str();
    app->add_option("--gamma", config.weights.gamma, "Reconstruction loss weight")->capture_default_str();
    app->add_option("--tau", config.weights.tau, "Contrastive temperature")->capture_default_str();
    app->add_option("--sigma", config.stop_threshold, "Loss-plateau stopping threshold")->capture_default_str();
    app->add_option("--threshold", config.prediction_threshold, "Binarization threshold")->capture_default_str();
    app->add_option("--mode", mode, "semi-supervised | supervised")->capture_default_str();
    app->add_option("--hidden", arch.hidden_widths, "Encoder hidden widths")
        ->delimiter(',')
        ->capture_default_str();
    app->add_option("--repr-dim", arch.repr_dim, "Representation dimension d")->capture_default_str();
    app->add_option("--init", init, "kaiming_uniform | zeros")->capture_default_str();
  }

  void finalize() {
    config.mode = training_mode_from_string(mode);
    arch.init = init_scheme_from_string(init);
    config.validate();
    ModelConfig probe;
    probe.view_dims = {1};
    probe.num_labels = 1;
    probe.hidden_widths = arch.hidden_widths;
    probe.repr_dim = arch.repr_dim;
    probe.validate();
  }
};

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cli", "cannot create " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cli", "cannot write " + path.string());
  out << text;
}

// The effective configuration (file < flags) of a subcommand, re-readable
// through --config. Only the root app reads config files, so the values sit
// under the subcommand's section.
void write_effective_config(const CLI::App* app, const fs::path& dir) {
  write_text(dir / "config.ini", "[" + app->get_name() + "]\n" + app->config_to_str(true, false));
}

LoadedDataset load_with_warnings(const std::string& path, std::ostream& err) {
  LoadedDataset loaded = load_dataset(path);
  for (const std::string& w : loaded.warnings) err << "warning: " << w << '\n';
  return loaded;
}

std::string format_metric(const MetricSummary& s) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << s.mean << " +- " << s.std;
  return os.str();
}

void check_not_inside(const fs::path& out, const fs::path& input) {
  const fs::path in_dir = fs::is_directory(input) ? input : input.parent_path();
  if (fs::exists(out) && fs::exists(in_dir) && fs::equivalent(out, in_dir)) {
    throw ValidationError("cli", "output directory must differ from the input dataset directory");
  }
}

// ---- synth ------------------------------------------------------------------

struct SynthFlags {
  SynthSpec spec;
  std::vector<std::size_t> dims;
  std::string out;
  std::optional<double> p, q, m;
};

int cmd_synth(SynthFlags& f, std::ostream& out) {
  if (f.dims.empty()) f.dims.assign(f.spec.l, 40);
  if (f.dims.size() == 1 && f.spec.l > 1) f.dims.assign(f.spec.l, f.dims.front());
  f.spec.dims = f.dims;
  const MultiViewDataset clean = generate_synthetic(f.spec);

  SaveOptions options;
  options.seed = f.spec.seed;
  options.origin_json = f.spec.to_json();
  if (f.p || f.q || f.m) {
    MaskSpec masks{f.p.value_or(0.0), f.q.value_or(0.0), f.m.value_or(1.0), f.spec.seed};
    CorruptedDataset corrupted = corrupt(clean, masks);
    options.split = corrupted.split;
    options.corruption = masks;
    save_dataset(corrupted.data, f.out, options);
  } else {
    save_dataset(clean, f.out, options);
  }
  out << "wrote synthetic dataset (n=" << f.spec.n << ", l=" << f.spec.l << ", c=" << f.spec.c
      << ") to " << f.out << '\n';
  return 0;
}

// ---- corrupt ----------------------------------------------------------------

struct CorruptFlags {
  std::string data;
  std::string out;
  MaskSpec masks;
};

int cmd_corrupt(const CorruptFlags& f, std::ostream& out, std::ostream& err) {
  check_not_inside(f.out, f.data);
  LoadedDataset loaded = load_with_warnings(f.data, err);
  if (loaded.split) {
    throw ValidationError("cli", "input dataset already carries a split; corrupt a clean dataset");
  }
  CorruptedDataset corrupted = corrupt(loaded.data, f.masks);
  SaveOptions options;
  options.split = corrupted.split;
  options.corruption = f.masks;
  options.seed = f.masks.seed;
  options.origin_json = loaded.manifest.origin_json;
  save_dataset(corrupted.data, f.out, options);

  const Matrix& w = corrupted.data.view_mask();
  const Matrix& g = corrupted.data.label_mask();
  out << "missing instances: " << (w.array() == 0.0).count() << " of " << w.size()
      << "; hidden labels: " << (g.array() == 0.0).count() << " of " << g.size()
      << "; train/test: " << corrupted.split.train.size() << "/" << corrupted.split.test.size()
      << '\n';
  return 0;
}

// ---- train ------------------------------------------------------------------

struct TrainFlags {
  std::string data;
  std::string out;
  std::uint64_t seed = 0;
  std::size_t checkpoint_every = 0;
  TrainingFlags training;
};

int cmd_train(TrainFlags& f, const CLI::App* app, std::ostream& out, std::ostream& err) {
  f.training.finalize();
  check_not_inside(f.out, f.data);
  LoadedDataset loaded = load_with_warnings(f.data, err);
  if (!loaded.split) {
    throw ValidationError("cli", "dataset has no train/test split; run `corrupt` first");
  }
  const fs::path run_dir = f.out;
  ensure_directory(run_dir);
  ensure_directory(run_dir / "checkpoints");
  write_effective_config(app, run_dir);

  std::ofstream epochs(run_dir / "epochs.jsonl");
  std::ofstream timing(run_dir / "timing.jsonl");
  if (!epochs || !timing) throw IoError("cli", "cannot write logs in " + run_dir.string());

  auto on_epoch = [&](const EpochReport& r, const DICNetModel& model) {
    epochs << r.to_json() << '\n';
    timing << json{{"epoch", r.epoch}, {"seconds", r.seconds}}.dump() << '\n';
    if (f.checkpoint_every > 0 && (r.epoch % f.checkpoint_every == 0 || r.stopped)) {
      std::ostringstream name;
      name << "epoch_" << std::setw(4) << std::setfill('0') << r.epoch << ".ckpt";
      model.save(run_dir / "checkpoints" / name.str());
    }
  };
  RunOutcome outcome = run_on_split(zero_fill(loaded.data), *loaded.split, f.training.arch,
                                    f.training.config, f.seed, on_epoch);
  epochs.flush();
  outcome.model.save(run_dir / "model.ckpt");
  write_matrix_file(run_dir / "test_scores.txt", outcome.test_predictions.scores);
  write_text(run_dir / "eval.json", outcome.eval.to_json() + "\n");

  const EpochReport& last = outcome.epochs.back();
  out << "epochs: " << outcome.epochs.size() << " (stop: " << to_string(last.reason) << ")\n"
      << std::fixed << std::setprecision(4) << "AP " << outcome.eval.average_precision
      << "  1-HL " << outcome.eval.one_minus_hamming << "  1-RL "
      << outcome.eval.one_minus_ranking << "  AUC " << outcome.eval.auc << '\n';
  return 0;
}

// ---- ablate / sweep shared ----------------------------------------------------

struct GridFlags {
  std::string data;
  std::string out;
  std::vector<std::uint64_t> seeds{0};
  MaskSpec masks{0.5, 0.5, 0.7, 0};
  TrainingFlags training;
};

// One outcome per seed: the dataset's own split when it has one, otherwise a
// fresh corruption per seed.
std::vector<EvalReport> run_seeds(const LoadedDataset& loaded, const GridFlags& f,
                                  const TrainConfig& config) {
  std::vector<EvalReport> reports;
  for (std::uint64_t seed : f.seeds) {
    if (loaded.split) {
      reports.push_back(run_on_split(zero_fill(loaded.data), *loaded.split, f.training.arch,
                                     config, seed)
                            .eval);
    } else {
      reports.push_back(
          run_experiment(loaded.data, f.masks, f.training.arch, config, seed).eval);
    }
  }
  return reports;
}

int cmd_ablate(GridFlags& f, const CLI::App* app, std::ostream& out, std::ostream& err) {
  f.training.finalize();
  f.masks.validate();
  if (f.seeds.empty()) throw ValidationError("cli", "ablation needs at least one seed");
  const LoadedDataset loaded = load_with_warnings(f.data, err);
  std::ofstream records;
  if (!f.out.empty()) {
    check_not_inside(f.out, f.data);
    ensure_directory(f.out);
    write_effective_config(app, f.out);
    records.open(fs::path(f.out) / "ablation.jsonl");
  }

  std::ostringstream table;
  table << std::left << std::setw(10) << "losses" << std::setw(22) << "AP" << "AUC" << '\n';
  for (const AblationRow& row : ablation_rows()) {
    TrainConfig config = f.training.config;
    config.weights = ablate(config.weights, row);
    const AggregateReport agg = aggregate(run_seeds(loaded, f, config), f.seeds);
    table << std::left << std::setw(10) << row.name << std::setw(22)
          << format_metric(agg.average_precision) << format_metric(agg.auc) << '\n';
    if (records.is_open()) {
      json rec = json::parse(agg.to_json());
      rec["config"] = row.name;
      rec["beta"] = config.weights.beta;
      rec["gamma"] = config.weights.gamma;
      rec["tau"] = config.weights.tau;
      records << rec.dump() << '\n';
    }
  }
  out << table.str();
  if (!f.out.empty()) write_text(fs::path(f.out) / "ablation.txt", table.str());
  return 0;
}

struct SweepFlags {
  GridFlags grid;
  std::vector<double> betas, gammas, taus;
};

int cmd_sweep(SweepFlags& f, const CLI::App* app, std::ostream& out, std::ostream& err) {
  f.grid.training.finalize();
  f.grid.masks.validate();
  const bool any = app->count("--betas") + app->count("--gammas") + app->count("--taus") > 0;
  if (!any) throw ValidationError("cli", "sweep needs at least one of --betas, --gammas, --taus");
  const LossWeights base = f.grid.training.config.weights;
  auto values = [&](const char* flag, const std::vector<double>& given, double fallback) {
    return app->count(flag) > 0 ? given : std::vector<double>{fallback};
  };
  const auto betas = values("--betas", f.betas, base.beta);
  const auto gammas = values("--gammas", f.gammas, base.gamma);
  const auto taus = values("--taus", f.taus, base.tau);
  if (betas.empty() || gammas.empty() || taus.empty() || f.grid.seeds.empty()) {
    throw ValidationError("cli", "sweep grid is empty");
  }
  const LoadedDataset loaded = load_with_warnings(f.grid.data, err);
  std::ofstream file;
  if (!f.grid.out.empty()) {
    check_not_inside(f.grid.out, f.grid.data);
    ensure_directory(f.grid.out);
    write_effective_config(app, f.grid.out);
    file.open(fs::path(f.grid.out) / "sweep.jsonl");
  }
  std::ostream& records = file.is_open() ? static_cast<std::ostream&>(file) : out;

  for (double beta : betas) {
    for (double gamma : gammas) {
      for (double tau : taus) {
        TrainConfig config = f.grid.training.config;
        config.weights = {beta, gamma, tau};
        config.validate();
        const AggregateReport agg = aggregate(run_seeds(loaded, f.grid, config), f.grid.seeds);
        json rec = json::parse(agg.to_json());
        rec["beta"] = beta;
        rec["gamma"] = gamma;
        rec["tau"] = tau;
        rec["epochs"] = config.max_epochs;
        rec["batch_size"] = config.batch_size;
        rec["lr"] = config.learning_rate;
        records << rec.dump() << '\n';
      }
    }
  }
  if (file.is_open()) {
    out << "wrote " << betas.size() * gammas.size() * taus.size() << " records to "
        << (fs::path(f.grid.out) / "sweep.jsonl").string() << '\n';
  }
  return 0;
}

// ---- gradcheck --------------------------------------------------------------

struct GradcheckFlags {
  std::size_t n = 6;
  std::size_t views = 3;
  std::size_t labels = 3;
  std::size_t dim = 5;
  std::vector<std::size_t> hidden{6};
  std::size_t repr_dim = 4;
  double p = 0.3;
  double q = 0.3;
  LossWeights weights{0.5, 0.5, 0.5};
  GradCheckOptions options;
  std::uint64_t seed = 0;
};

int cmd_gradcheck(const GradcheckFlags& f, std::ostream& out) {
  SynthSpec spec;
  spec.n = f.n;
  spec.l = f.views;
  spec.c = f.labels;
  spec.dims.assign(f.views, f.dim);
  spec.latent_dim = 3;
  spec.seed = f.seed;
  MultiViewDataset data = generate_synthetic(spec);
  data = data.with_view_mask(generate_view_mask(f.n, f.views, f.p, derive_seed(f.seed, 1)));
  data = zero_fill(data.with_label_mask(generate_label_mask(data.labels(), f.q, derive_seed(f.seed, 2))));

  ModelConfig mc;
  mc.view_dims = data.view_dims();
  mc.hidden_widths = f.hidden;
  mc.repr_dim = f.repr_dim;
  mc.num_labels = f.labels;
  mc.seed = derive_seed(f.seed, 3);
  DICNetModel model(mc);
  f.weights.validate();
  // Zero biases can leave a sample with an all-zero embedding, where cosine
  // similarity is discontinuous and finite differences are meaningless.
  Rng jitter(derive_seed(f.seed, 4));
  std::vector<std::string> biases;
  for (const auto& entry : std::as_const(model.params())) {
    if (entry.first.ends_with(".bias")) biases.push_back(entry.first);
  }
  for (const std::string& name : biases) {
    Matrix& b = model.params().mutable_at(name);
    for (Eigen::Index k = 0; k < b.size(); ++k) b.data()[k] = 0.1 * jitter.normal();
  }

  const LossBuilder build = [&](Graph& g, const ParamStore& params) {
    BoundModel bound(g, mc, params);
    return build_batch_loss(g, bound, data, f.weights).total;
  };
  GradCheckOptions options = f.options;
  options.seed = f.seed;
  const GradCheckReport report = finite_diff_check(build, model.params(), options);

  for (const ParamCheck& p : report.params) {
    out << (p.passed ? "PASS " : "FAIL ") << std::left << std::setw(26) << p.name
        << " coords=" << p.coordinates_checked << " max_rel_err=" << std::scientific
        << std::setprecision(3) << p.max_relative_error << std::defaultfloat << '\n';
  }
  out << (report.all_passed() ? "all parameters pass" : "gradient check FAILED")
      << " at tolerance " << report.tolerance << '\n';
  return report.all_passed() ? 0 : 1;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Double-incomplete multi-view multi-label classification toolkit", "dicnet"};
  app.require_subcommand(1);
  // Subcommands pass unknown options up, so `train --config run/config.ini` works.
  app.set_config("--config", "", "INI file of option values; command-line flags take precedence");
  app.fallthrough();

  SynthFlags synth;
  CLI::App* synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth_cmd->add_option("--out", synth.out, "Output dataset directory")->required();
  synth_cmd->add_option("--n", synth.spec.n, "Samples")->capture_default_str();
  synth_cmd->add_option("--views", synth.spec.l, "Views l")->capture_default_str();
  synth_cmd->add_option("--labels", synth.spec.c, "Labels c")->capture_default_str();
  synth_cmd->add_option("--dims", synth.dims, "Per-view dims (one value = same for all)")->delimiter(',');
  synth_cmd->add_option("--latent-dim", synth.spec.latent_dim, "Latent factors")->capture_default_str();
  synth_cmd->add_option("--noise", synth.spec.noise, "Feature noise stddev")->capture_default_str();
  synth_cmd->add_option("--seed", synth.spec.seed, "Seed")->capture_default_str();
  synth_cmd->add_option("--p", synth.p, "Also corrupt: view missing rate")->check(kRate);
  synth_cmd->add_option("--q", synth.q, "Also corrupt: label missing rate")->check(kRate);
  synth_cmd->add_option("--m", synth.m, "Also corrupt: train fraction")->check(kFraction);

  CorruptFlags corrupt_flags;
  CLI::App* corrupt_cmd = app.add_subcommand("corrupt", "Apply the missing-view / missing-label protocol");
  corrupt_cmd->add_option("--data", corrupt_flags.data, "Input manifest or directory")->required();
  corrupt_cmd->add_option("--out", corrupt_flags.out, "Output dataset directory")->required();
  corrupt_cmd->add_option("--p", corrupt_flags.masks.view_missing_rate, "View missing rate")->check(kRate)->capture_default_str();
  corrupt_cmd->add_option("--q", corrupt_flags.masks.label_missing_rate, "Label missing rate")->check(kRate)->capture_default_str();
  corrupt_cmd->add_option("--m", corrupt_flags.masks.train_fraction, "Train fraction")->check(kFraction)->capture_default_str();
  corrupt_cmd->add_option("--seed", corrupt_flags.masks.seed, "Seed")->capture_default_str();

  TrainFlags train_flags;
  CLI::App* train_cmd = app.add_subcommand("train", "Train and evaluate on a corrupted dataset");
  train_cmd->add_option("--data", train_flags.data, "Corrupted dataset manifest or directory")->required();
  train_cmd->add_option("--out", train_flags.out, "Run directory")->required();
  train_cmd->add_option("--seed", train_flags.seed, "Seed (model init and batch order)")->capture_default_str();
  train_cmd->add_option("--checkpoint-every", train_flags.checkpoint_every,
                        "Write a checkpoint every N epochs (0: final only)")->capture_default_str();
  train_flags.training.add_to(train_cmd);

  auto add_grid = [](CLI::App* cmd, GridFlags& g) {
    cmd->add_option("--data", g.data, "Dataset manifest or directory")->required();
    cmd->add_option("--out", g.out, "Output directory for records");
    cmd->add_option("--seeds", g.seeds, "Seeds")->delimiter(',')->capture_default_str();
    cmd->add_option("--p", g.masks.view_missing_rate, "View missing rate (clean input)")->check(kRate)->capture_default_str();
    cmd->add_option("--q", g.masks.label_missing_rate, "Label missing rate (clean input)")->check(kRate)->capture_default_str();
    cmd->add_option("--m", g.masks.train_fraction, "Train fraction (clean input)")->check(kFraction)->capture_default_str();
    g.training.add_to(cmd);
  };

  GridFlags ablate_flags;
  CLI::App* ablate_cmd = app.add_subcommand("ablate", "Loss-component ablation over seeds");
  add_grid(ablate_cmd, ablate_flags);

  SweepFlags sweep_flags;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Grid over beta, gamma, tau");
  add_grid(sweep_cmd, sweep_flags.grid);
  sweep_cmd->add_option("--betas", sweep_flags.betas, "beta values")->delimiter(',');
  sweep_cmd->add_option("--gammas", sweep_flags.gammas, "gamma values")->delimiter(',');
  sweep_cmd->add_option("--taus", sweep_flags.taus, "tau values")->delimiter(',');

  GradcheckFlags grad;
  CLI::App* grad_cmd = app.add_subcommand("gradcheck", "Finite-difference check of the full loss");
  grad_cmd->add_option("--n", grad.n, "Samples")->capture_default_str();
  grad_cmd->add_option("--views", grad.views, "Views")->capture_default_str();
  grad_cmd->add_option("--labels", grad.labels, "Labels")->capture_default_str();
  grad_cmd->add_option("--dim", grad.dim, "Features per view")->capture_default_str();
  grad_cmd->add_option("--hidden", grad.hidden, "Hidden widths")->delimiter(',')->capture_default_str();
  grad_cmd->add_option("--repr-dim", grad.repr_dim, "Representation dim")->capture_default_str();
  grad_cmd->add_option("--p", grad.p, "View missing rate")->check(kRate)->capture_default_str();
  grad_cmd->add_option("--q", grad.q, "Label missing rate")->check(kRate)->capture_default_str();
  grad_cmd->add_option("--beta", grad.weights.beta, "Contrastive weight")->capture_default_str();
  grad_cmd->add_option("--gamma", grad.weights.gamma, "Reconstruction weight")->capture_default_str();
  grad_cmd->add_option("--tau", grad.weights.tau, "Temperature")->capture_default_str();
  grad_cmd->add_option("--step", grad.options.step, "Central difference step")->capture_default_str();
  grad_cmd->add_option("--tolerance", grad.options.tolerance, "Max relative error")->capture_default_str();
  grad_cmd->add_option("--coords", grad.options.coordinates, "Coordinates per parameter")->capture_default_str();
  grad_cmd->add_option("--seed", grad.seed, "Seed")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (synth_cmd->parsed()) return cmd_synth(synth, out);
    if (corrupt_cmd->parsed()) return cmd_corrupt(corrupt_flags, out, err);
    if (train_cmd->parsed()) return cmd_train(train_flags, train_cmd, out, err);
    if (ablate_cmd->parsed()) return cmd_ablate(ablate_flags, ablate_cmd, out, err);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep_flags, sweep_cmd, out, err);
    if (grad_cmd->parsed()) return cmd_gradcheck(grad, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace dicnet::cli
