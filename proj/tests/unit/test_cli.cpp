// End-to-end smoke tests of the command-line tool, exercised as a
// subprocess so the exit-code contract is what's checked.

#include <cstdlib>
#include <string>

#include "curvox/util.hpp"
#include "doctest.h"
#include "tmpdir.hpp"

#ifndef CURVOX_CLI_PATH
#define CURVOX_CLI_PATH "curvox"
#endif

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(CURVOX_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

void write_tiny_dataset_config(const std::filesystem::path& path) {
  curvox::write_text_file(path,
                          "grid_n = 8\n"
                          "train_scenes = 4\n"
                          "val_scenes = 2\n"
                          "test_scenes = 2\n"
                          "image_width = 32\n"
                          "image_height = 32\n"
                          "focal = 35\n"
                          "min_valid_pixels = 40\n"
                          "seed = 123\n");
}

void write_tiny_train_config(const std::filesystem::path& path) {
  curvox::write_text_file(path,
                          "epochs = 2\n"
                          "batch_size = 4\n"
                          "grid_n = 8\n"
                          "latent_dim = 8\n"
                          "encoder_hidden = 32,16\n"
                          "decoder_hidden = 16,32\n");
}

}  // namespace

TEST_CASE("cli pipeline: gen-data, train, eval, report") {
  testsupport::TmpDir tmp("cli");
  const auto ds_cfg = tmp.path() / "dataset.cfg";
  const auto tr_cfg = tmp.path() / "train.cfg";
  write_tiny_dataset_config(ds_cfg);
  write_tiny_train_config(tr_cfg);
  const auto data = (tmp.path() / "data").string();

  CHECK(run_cli("gen-data --config " + ds_cfg.string() + " --out " + data) == 0);
  CHECK(std::filesystem::exists(tmp.path() / "data" / "train" / "manifest.txt"));

  // Identical seed twice: identical directory contents (spot-check bytes).
  const auto data2 = (tmp.path() / "data2").string();
  CHECK(run_cli("gen-data --config " + ds_cfg.string() + " --out " + data2) == 0);
  const auto a = curvox::read_binary_file(tmp.path() / "data" / "train" / "scene_000000.gt.vxg");
  const auto b = curvox::read_binary_file(tmp.path() / "data2" / "train" / "scene_000000.gt.vxg");
  CHECK(a == b);

  const auto run_dir = (tmp.path() / "run").string();
  CHECK(run_cli("train --config " + tr_cfg.string() + " --data " + data + " --out " + run_dir +
                " --ablation curvature-only --seed 42") == 0);
  CHECK(std::filesystem::exists(tmp.path() / "run" / "checkpoint.ckpt"));
  CHECK(std::filesystem::exists(tmp.path() / "run" / "config.snapshot"));

  // The metrics CSV for a curvature-only run carries a nonzero curvature
  // component.
  const std::string metrics = curvox::read_text_file(tmp.path() / "run" / "metrics.csv");
  CHECK(metrics.find("train") != std::string::npos);

  const auto eval_dir = (tmp.path() / "eval").string();
  CHECK(run_cli("eval --checkpoint " + run_dir + "/checkpoint.ckpt --data " + data + " --out " +
                eval_dir + " --config " + tr_cfg.string()) == 0);
  const std::string eval1 = curvox::read_text_file(tmp.path() / "eval" / "eval.csv");
  CHECK(run_cli("eval --checkpoint " + run_dir + "/checkpoint.ckpt --data " + data + " --out " +
                eval_dir + " --config " + tr_cfg.string()) == 0);
  const std::string eval2 = curvox::read_text_file(tmp.path() / "eval" / "eval.csv");
  CHECK(eval1 == eval2);
}

TEST_CASE("cli exit codes distinguish config, I/O and numerical failures") {
  testsupport::TmpDir tmp("cli_codes");
  // Unknown flag / missing required option -> 2.
  CHECK(run_cli("train --nope") == 2);

  // Config error: zero sample rate is refused as untrainable.
  const auto bad_cfg = tmp.path() / "bad.cfg";
  curvox::write_text_file(bad_cfg, "sample_rate = 0\n");
  CHECK(run_cli("gen-data --config " + bad_cfg.string() + " --out " +
                (tmp.path() / "x").string()) == 2);

  // Unknown config key -> 2.
  const auto typo_cfg = tmp.path() / "typo.cfg";
  curvox::write_text_file(typo_cfg, "gridn = 8\n");
  CHECK(run_cli("gen-data --config " + typo_cfg.string() + " --out " +
                (tmp.path() / "y").string()) == 2);

  // Missing dataset -> 3 (I/O).
  const auto tr_cfg = tmp.path() / "train.cfg";
  write_tiny_train_config(tr_cfg);
  CHECK(run_cli("train --config " + tr_cfg.string() + " --data " +
                (tmp.path() / "missing").string() + " --out " + (tmp.path() / "r").string()) ==
        3);

  // Numerical abort -> 4: absurd learning rate on a real tiny dataset.
  const auto ds_cfg = tmp.path() / "dataset.cfg";
  write_tiny_dataset_config(ds_cfg);
  const auto data = (tmp.path() / "data").string();
  REQUIRE(run_cli("gen-data --config " + ds_cfg.string() + " --out " + data) == 0);
  const auto abort_cfg = tmp.path() / "abort.cfg";
  curvox::write_text_file(abort_cfg,
                          "epochs = 4\n"
                          "batch_size = 4\n"
                          "grid_n = 8\n"
                          "latent_dim = 8\n"
                          "encoder_hidden = 32,16\n"
                          "decoder_hidden = 16,32\n"
                          "lr0 = 1e300\n"
                          "lr_final = 1\n");
  CHECK(run_cli("train --config " + abort_cfg.string() + " --data " + data + " --out " +
                (tmp.path() / "abort_run").string()) == 4);
}
