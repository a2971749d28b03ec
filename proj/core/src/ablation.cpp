#include "curvox/ablation.hpp"

#include <atomic>
#include <mutex>
#include <thread>

#include "curvox/util.hpp"

namespace curvox {

std::vector<AblationCell> standard_cells() {
  std::vector<AblationCell> cells;

  AblationCell baseline;
  baseline.name = "baseline";
  baseline.weights.lambda_curv = 0.0;
  cells.push_back(baseline);

  AblationCell curvature;
  curvature.name = "curvature-only";
  cells.push_back(curvature);  // defaults: lambda_curv = 0.02, laplacian-6

  AblationCell multi;
  multi.name = "multi-geometric";
  multi.weights.lambda_normal = 0.05;
  multi.weights.lambda_edge = 0.01;
  cells.push_back(multi);

  AblationCell alternative;
  alternative.name = "alternative-geometric";
  alternative.weights.curvature_operator = CurvatureOperator::kGradientMagnitude;
  cells.push_back(alternative);

  return cells;
}

LossWeights ablation_weights(const std::string& name) {
  if (name == "custom") return LossWeights{};
  for (const auto& cell : standard_cells()) {
    if (cell.name == name) return cell.weights;
  }
  throw ConfigError("unknown ablation cell: " + name);
}

bool is_known_ablation(const std::string& name) {
  if (name == "custom") return true;
  for (const auto& cell : standard_cells()) {
    if (cell.name == name) return true;
  }
  return false;
}

namespace {

void write_run_result(const std::filesystem::path& run_dir, const AblationRun& run) {
  std::string csv = "cell,seed,aborted," + eval_csv_header() + ",abort_reason\n";
  csv += run.cell + "," + std::to_string(run.seed) + "," + (run.aborted ? "1" : "0") + ",";
  if (run.aborted) {
    csv += ",,,,,,,,,";  // empty metric fields
    std::string reason = run.abort_reason;
    for (char& c : reason) {
      if (c == ',' || c == '\n') c = ';';
    }
    csv += reason;
  } else {
    csv += eval_csv_row(run.test) + ",";
  }
  csv += "\n";
  write_text_file(run_dir / "test_metrics.csv", csv);
}

}  // namespace

AblationReport run_ablation(const AblationConfig& config,
                            const std::filesystem::path& dataset_dir,
                            const std::filesystem::path& out_dir) {
  if (config.seeds.empty()) {
    throw ConfigError("ablation needs at least one seed");
  }
  std::filesystem::create_directories(out_dir);

  struct Job {
    AblationCell cell;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (const auto& cell : standard_cells()) {
    for (std::uint64_t seed : config.seeds) {
      jobs.push_back({cell, seed});
    }
  }

  std::vector<AblationRun> runs(jobs.size());
  std::atomic<std::size_t> next{0};
  const int workers = std::max(1, std::min(config.jobs, static_cast<int>(jobs.size())));

  auto worker = [&]() {
    while (true) {
      const std::size_t j = next.fetch_add(1);
      if (j >= jobs.size()) break;
      const Job& job = jobs[j];
      TrainConfig cfg = config.base;
      cfg.weights = job.cell.weights;
      cfg.ablation_tag = job.cell.name;
      cfg.seed = job.seed;
      const std::filesystem::path run_dir =
          out_dir / job.cell.name / ("seed_" + std::to_string(job.seed));

      AblationRun run;
      run.cell = job.cell.name;
      run.seed = job.seed;
      run.run_dir = run_dir;
      const RunRecord record = train(cfg, dataset_dir, run_dir);
      run.aborted = record.aborted;
      run.abort_reason = record.abort_reason;
      run.best_epoch = record.best_epoch;
      run.epochs_run = static_cast<int>(record.epochs.size());
      if (!record.aborted) {
        run.test = evaluate(record.checkpoint_path, dataset_dir, "test", cfg.weights);
      }
      write_run_result(run_dir, run);
      runs[j] = std::move(run);
    }
  };

  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  AblationReport report;
  report.runs = std::move(runs);
  return report;
}

}  // namespace curvox
