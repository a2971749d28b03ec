// Command-line entry point: data generation, training, evaluation, the
// ablation matrix and report emission. Every run writes a resolved-config
// snapshot into its output directory so results can be reproduced from the
// snapshot alone.
//
// Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 numerical
// abort (non-finite training loss).

#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "curvox/ablation.hpp"
#include "curvox/checkpoint.hpp"
#include "curvox/report.hpp"
#include "curvox/trainer.hpp"
#include "curvox/util.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumeric = 4;

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  long long seed_override = -1;
  bool verbose = false;
};

curvox::KeyValueFile load_config_or_empty(const std::string& path) {
  if (path.empty()) return {};
  return curvox::KeyValueFile::load(path);
}

int run_gen_data(const CommonFlags& flags) {
  curvox::KeyValueFile kv = load_config_or_empty(flags.config_path);
  if (flags.seed_override >= 0) {
    kv.set_u64("seed", static_cast<std::uint64_t>(flags.seed_override));
  }
  const curvox::DatasetConfig config = curvox::DatasetConfig::from_key_values(kv);
  const auto summaries = curvox::generate_dataset(config, flags.out_dir);
  for (const auto& s : summaries) {
    const double samples_per_scene =
        s.scenes > 0 ? static_cast<double>(s.depth_samples) / s.scenes : 0.0;
    std::printf("%s: %d scenes, %lld depth samples (%.1f/scene, rate %.3f of %.1f valid px), "
                "%lld evidence voxels, %lld dropped\n",
                s.split.c_str(), s.scenes, s.depth_samples, samples_per_scene,
                config.sample_rate, s.mean_valid_pixels, s.evidence_voxels, s.dropped_samples);
  }
  return kExitOk;
}

curvox::TrainConfig train_config_from(const CommonFlags& flags, const std::string& ablation) {
  curvox::KeyValueFile kv = load_config_or_empty(flags.config_path);
  if (!ablation.empty()) {
    kv.set("ablation", ablation);
  }
  if (flags.seed_override >= 0) {
    kv.set_u64("seed", static_cast<std::uint64_t>(flags.seed_override));
  }
  return curvox::TrainConfig::from_key_values(kv);
}

int run_train(const CommonFlags& flags, const std::string& data_dir,
              const std::string& ablation) {
  const curvox::TrainConfig config = train_config_from(flags, ablation);
  const curvox::RunRecord record = curvox::train(config, data_dir, flags.out_dir);
  if (flags.verbose) {
    for (const auto& epoch : record.epochs) {
      std::printf("epoch %zu: train %.6f val %.6f\n",
                  static_cast<std::size_t>(&epoch - record.epochs.data()) + 1, epoch.train.total,
                  epoch.val.total);
    }
  }
  if (record.aborted) {
    std::fprintf(stderr, "run aborted on non-finite loss: %s\n", record.abort_reason.c_str());
    return kExitNumeric;
  }
  std::printf("trained %zu epochs (best %d), best val total %s, %lld parameters\n",
              record.epochs.size(), record.best_epoch + 1,
              curvox::format_double(record.best_val_total).c_str(), record.parameter_count);
  std::printf("checkpoint: %s\n", record.checkpoint_path.string().c_str());
  return kExitOk;
}

int run_eval(const CommonFlags& flags, const std::string& checkpoint, const std::string& data_dir,
             const std::string& split, long long sample_seed) {
  curvox::KeyValueFile kv = load_config_or_empty(flags.config_path);
  const curvox::TrainConfig config = curvox::TrainConfig::from_key_values(kv);
  const curvox::EvalResult result =
      curvox::evaluate(checkpoint, data_dir, split, config.weights, sample_seed);
  const std::string csv = curvox::eval_csv_header() + "\n" + curvox::eval_csv_row(result) + "\n";
  std::printf("%s", csv.c_str());
  if (!flags.out_dir.empty()) {
    std::filesystem::create_directories(flags.out_dir);
    curvox::write_text_file(std::filesystem::path(flags.out_dir) / "eval.csv", csv);
    curvox::KeyValueFile snapshot = config.to_key_values();
    snapshot.set("checkpoint", checkpoint);
    snapshot.set("split", split);
    snapshot.save(std::filesystem::path(flags.out_dir) / "config.snapshot");
  }
  return kExitOk;
}

int run_ablate(const CommonFlags& flags, const std::string& data_dir, int jobs,
               const std::string& seeds_csv) {
  curvox::AblationConfig config;
  curvox::KeyValueFile kv = load_config_or_empty(flags.config_path);
  config.base = curvox::TrainConfig::from_key_values(kv);
  config.jobs = jobs;
  if (!seeds_csv.empty()) {
    config.seeds.clear();
    for (int s : curvox::parse_int_list(seeds_csv)) {
      config.seeds.push_back(static_cast<std::uint64_t>(s));
    }
  }
  const std::filesystem::path out(flags.out_dir);
  {
    curvox::KeyValueFile snapshot = config.base.to_key_values();
    std::string seeds;
    for (std::size_t i = 0; i < config.seeds.size(); ++i) {
      if (i) seeds += ",";
      seeds += std::to_string(config.seeds[i]);
    }
    snapshot.set("ablation_seeds", seeds);
    snapshot.set_int("jobs", config.jobs);
    std::filesystem::create_directories(out);
    snapshot.save(out / "config.snapshot");
  }
  const curvox::AblationReport report = curvox::run_ablation(config, data_dir, out);
  int aborted = 0;
  for (const auto& run : report.runs) {
    std::printf("%s seed %llu: %s\n", run.cell.c_str(),
                static_cast<unsigned long long>(run.seed),
                run.aborted ? ("aborted (" + run.abort_reason + ")").c_str()
                            : curvox::format_double(run.test.mean.total).c_str());
    aborted += run.aborted;
  }
  std::printf("%zu runs, %d aborted (aborts are recorded instability events)\n",
              report.runs.size(), aborted);
  return kExitOk;
}

int run_report(const CommonFlags& flags, const std::string& runs_dir) {
  curvox::emit_report(runs_dir, flags.out_dir);
  curvox::KeyValueFile snapshot;
  snapshot.set("runs_dir", runs_dir);
  snapshot.save(std::filesystem::path(flags.out_dir) / "config.snapshot");
  std::printf("report written to %s\n", flags.out_dir.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"curvature-regularized volumetric reconstruction pipeline"};
  app.require_subcommand(1);

  CommonFlags flags;

  auto add_common = [&](CLI::App* cmd, bool out_required) {
    cmd->add_option("--config", flags.config_path, "key = value config file");
    auto* out = cmd->add_option("--out", flags.out_dir, "output directory");
    if (out_required) out->required();
    cmd->add_option("--seed", flags.seed_override, "seed override");
    cmd->add_flag("--verbose", flags.verbose, "per-epoch progress output");
  };

  auto* gen = app.add_subcommand("gen-data", "generate the synthetic sparse-depth dataset");
  add_common(gen, true);

  std::string data_dir;
  std::string ablation;
  auto* train_cmd = app.add_subcommand("train", "train one model");
  add_common(train_cmd, true);
  train_cmd->add_option("--data", data_dir, "dataset directory")->required();
  train_cmd->add_option("--ablation", ablation,
                        "cell name: baseline | curvature-only | multi-geometric | "
                        "alternative-geometric | custom");

  std::string checkpoint;
  std::string split = "test";
  long long sample_seed = -1;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a split");
  add_common(eval_cmd, false);
  eval_cmd->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  eval_cmd->add_option("--data", data_dir, "dataset directory")->required();
  eval_cmd->add_option("--split", split, "dataset split (default test)");
  eval_cmd->add_option("--sample-seed", sample_seed,
                       "evaluate with sampled latents using this seed (default: posterior mean)");

  int jobs = 1;
  std::string seeds_csv;
  auto* ablate_cmd = app.add_subcommand("ablate", "train the full ablation matrix");
  add_common(ablate_cmd, true);
  ablate_cmd->add_option("--data", data_dir, "dataset directory")->required();
  ablate_cmd->add_option("--jobs", jobs, "parallel training jobs (default 1)");
  ablate_cmd->add_option("--seeds", seeds_csv, "comma-separated seeds (default 42,123,456)");

  std::string runs_dir;
  auto* report_cmd = app.add_subcommand("report", "aggregate ablation runs into CSVs and plots");
  add_common(report_cmd, true);
  report_cmd->add_option("--runs", runs_dir, "ablation output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (gen->parsed()) return run_gen_data(flags);
    if (train_cmd->parsed()) return run_train(flags, data_dir, ablation);
    if (eval_cmd->parsed()) return run_eval(flags, checkpoint, data_dir, split, sample_seed);
    if (ablate_cmd->parsed()) return run_ablate(flags, data_dir, jobs, seeds_csv);
    if (report_cmd->parsed()) return run_report(flags, runs_dir);
  } catch (const curvox::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const curvox::IoError& e) {
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return kExitIo;
  } catch (const curvox::NumericError& e) {
    std::fprintf(stderr, "numerical abort: %s\n", e.what());
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  }
  return kExitOk;
}
