#include <cstring>

#include "curvox/ablation.hpp"
#include "curvox/checkpoint.hpp"
#include "curvox/trainer.hpp"
#include "curvox/util.hpp"
#include "doctest.h"
#include "tmpdir.hpp"

using namespace curvox;

namespace {

// One tiny dataset shared by the training tests.
const std::filesystem::path& tiny_dataset() {
  static testsupport::TmpDir tmp("train_ds");
  static bool generated = false;
  if (!generated) {
    DatasetConfig cfg;
    cfg.grid_n = 8;
    cfg.train_scenes = 6;
    cfg.val_scenes = 2;
    cfg.test_scenes = 2;
    cfg.image_width = 32;
    cfg.image_height = 32;
    cfg.focal = 35.0;
    cfg.min_valid_pixels = 40;
    cfg.seed = 90;
    generate_dataset(cfg, tmp.path());
    generated = true;
  }
  return tmp.path();
}

TrainConfig tiny_train_config() {
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch_size = 4;
  cfg.patience = 20;
  cfg.seed = 42;
  cfg.model.grid_n = 8;
  cfg.model.latent_dim = 8;
  cfg.model.encoder_hidden = {32, 16};
  cfg.model.decoder_hidden = {16, 32};
  cfg.assert_clip = true;
  return cfg;
}

}  // namespace

TEST_CASE("training is bit-deterministic given (seed, config, dataset)") {
  testsupport::TmpDir tmp("train_det");
  const TrainConfig cfg = tiny_train_config();
  const RunRecord r1 = train(cfg, tiny_dataset(), tmp.path() / "run1");
  const RunRecord r2 = train(cfg, tiny_dataset(), tmp.path() / "run2");
  REQUIRE_FALSE(r1.aborted);
  REQUIRE_FALSE(r2.aborted);

  const auto m1 = read_binary_file(r1.metrics_path);
  const auto m2 = read_binary_file(r2.metrics_path);
  CHECK(m1 == m2);
  const auto c1 = read_binary_file(r1.checkpoint_path);
  const auto c2 = read_binary_file(r2.checkpoint_path);
  CHECK(c1 == c2);

  // A different seed diverges.
  TrainConfig other = cfg;
  other.seed = 43;
  const RunRecord r3 = train(other, tiny_dataset(), tmp.path() / "run3");
  REQUIRE_FALSE(r3.aborted);
  CHECK(read_binary_file(r3.metrics_path) != m1);
}

TEST_CASE("metrics CSV structure and lr column") {
  testsupport::TmpDir tmp("train_csv");
  const TrainConfig cfg = tiny_train_config();
  const RunRecord record = train(cfg, tiny_dataset(), tmp.path() / "run");
  REQUIRE_FALSE(record.aborted);
  const std::string csv = read_text_file(record.metrics_path);
  const auto lines = split(trim(csv), '\n');
  CHECK(lines[0] == LossBreakdown::csv_header() + ",lr");
  CHECK(lines.size() == 1 + 2 * record.epochs.size());
  // Epoch 1 train row carries the exact initial learning rate.
  CHECK(lines[1].rfind("1,train,", 0) == 0);
  CHECK(lines[1].find(format_double(cosine_lr(0, cfg.epochs, cfg.lr0, cfg.lr_final))) !=
        std::string::npos);
  // The run writes a resolved config snapshot, and the snapshot parses back
  // into an identical configuration.
  CHECK(std::filesystem::exists(record.run_dir / "config.snapshot"));
  const KeyValueFile snap = KeyValueFile::load(record.run_dir / "config.snapshot");
  CHECK(snap.get("ablation") == "custom");
  const TrainConfig reparsed = TrainConfig::from_key_values(snap);
  CHECK(reparsed.to_key_values().serialize() == cfg.to_key_values().serialize());
}

TEST_CASE("baseline logs a zero curvature component every epoch") {
  testsupport::TmpDir tmp("train_base");
  TrainConfig cfg = tiny_train_config();
  cfg.weights = ablation_weights("baseline");
  cfg.ablation_tag = "baseline";
  const RunRecord record = train(cfg, tiny_dataset(), tmp.path() / "run");
  REQUIRE_FALSE(record.aborted);
  for (const auto& epoch : record.epochs) {
    CHECK(epoch.train.curvature == 0.0);
    CHECK(epoch.val.curvature == 0.0);
    CHECK(epoch.train.surface_voxels == 0);
  }
}

TEST_CASE("curvature cell logs a nonzero curvature component") {
  testsupport::TmpDir tmp("train_curv");
  TrainConfig cfg = tiny_train_config();
  cfg.weights = ablation_weights("curvature-only");
  const RunRecord record = train(cfg, tiny_dataset(), tmp.path() / "run");
  REQUIRE_FALSE(record.aborted);
  CHECK(record.epochs[0].train.curvature > 0.0);
  CHECK(record.epochs[0].train.surface_voxels > 0);
}

TEST_CASE("early stopping bounds the number of recorded epochs") {
  testsupport::TmpDir tmp("train_early");
  TrainConfig cfg = tiny_train_config();
  cfg.epochs = 30;
  cfg.patience = 2;
  // A huge learning rate makes validation bounce instead of improving.
  cfg.lr0 = 0.3;
  cfg.lr_final = 1e-6;
  const RunRecord record = train(cfg, tiny_dataset(), tmp.path() / "run");
  if (!record.aborted) {
    CHECK(static_cast<int>(record.epochs.size()) <= record.best_epoch + cfg.patience + 1);
    CHECK(record.stopping_epoch <= record.best_epoch + cfg.patience);
  }
}

TEST_CASE("non-finite loss aborts the run with the component named") {
  testsupport::TmpDir tmp("train_abort");
  TrainConfig cfg = tiny_train_config();
  cfg.epochs = 4;
  // An absurd learning rate forces an overflow inside a few steps.
  cfg.lr0 = 1e300;
  cfg.lr_final = 1.0;
  const RunRecord record = train(cfg, tiny_dataset(), tmp.path() / "run");
  CHECK(record.aborted);
  CHECK_FALSE(record.abort_reason.empty());
  const KeyValueFile summary = KeyValueFile::load(record.run_dir / "run_summary.txt");
  CHECK(summary.get("aborted") == "true");
}

TEST_CASE("run summary excludes wall time; timing is separate") {
  testsupport::TmpDir tmp("train_summary");
  const TrainConfig cfg = tiny_train_config();
  const RunRecord record = train(cfg, tiny_dataset(), tmp.path() / "run");
  const std::string summary = read_text_file(record.run_dir / "run_summary.txt");
  CHECK(summary.find("wall") == std::string::npos);
  CHECK(std::filesystem::exists(record.run_dir / "timing.txt"));
  CHECK(record.wall_seconds > 0.0);
  CHECK(record.parameter_count == cfg.model.parameter_count());
}
