#include "curvox/evaluate.hpp"

#include "curvox/checkpoint.hpp"
#include "curvox/trainer.hpp"
#include "curvox/util.hpp"

namespace curvox {

EvalResult evaluate(const std::filesystem::path& checkpoint_path,
                    const std::filesystem::path& dataset_dir, const std::string& split,
                    const LossWeights& weights, long long sample_seed) {
  const Checkpoint ckpt = load_checkpoint(checkpoint_path);
  const auto dir = dataset_dir / split;
  const DatasetManifest manifest = read_manifest(dir);
  if (manifest.grid_n != ckpt.config.grid_n) {
    throw ConfigError("checkpoint grid_n " + std::to_string(ckpt.config.grid_n) +
                      " does not match dataset grid_n " + std::to_string(manifest.grid_n));
  }
  if (manifest.scene_names.empty()) {
    throw ConfigError("split " + split + " has no scenes");
  }

  const Model model(ckpt.config, ckpt.params, nullptr);
  Rng sampler(sample_seed >= 0 ? static_cast<std::uint64_t>(sample_seed) : 0);

  double recon = 0.0, kl = 0.0, curv = 0.0, normal = 0.0, edge = 0.0;
  long long voxels = 0;
  for (const auto& name : manifest.scene_names) {
    const TrainingSample sample = load_sample(dir, name, manifest.extent);
    const ag::Tensor eps = sample_seed >= 0
                               ? sample_standard_normal(sampler, ckpt.config.latent_dim)
                               : ag::Tensor::zeros({ckpt.config.latent_dim});
    const ExampleTerms t =
        compute_objective_terms(model, sample, weights, eps, /*force_all_terms=*/true);
    recon += t.recon.scalar_value();
    kl += t.kl.scalar_value();
    curv += t.curvature.scalar_value();
    normal += t.normal.scalar_value();
    edge += t.edge.scalar_value();
    voxels += t.surface_voxels;
  }

  EvalResult result;
  result.scenes = static_cast<int>(manifest.scene_names.size());
  const double inv = 1.0 / result.scenes;
  result.mean =
      total_loss(recon * inv, kl * inv, curv * inv, normal * inv, edge * inv, weights, voxels);
  result.total_recon_kl = result.mean.recon + weights.beta * result.mean.kl;
  return result;
}

std::string eval_csv_header() {
  return "scenes,recon,kl,curvature,normal,edge,total_recon_kl,total_full,surface_voxels";
}

std::string eval_csv_row(const EvalResult& r) {
  std::string row = std::to_string(r.scenes);
  for (double v : {r.mean.recon, r.mean.kl, r.mean.curvature, r.mean.normal, r.mean.edge,
                   r.total_recon_kl, r.mean.total}) {
    row += "," + format_double(v);
  }
  row += "," + std::to_string(r.mean.surface_voxels);
  return row;
}

}  // namespace curvox
