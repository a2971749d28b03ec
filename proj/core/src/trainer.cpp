#include "curvox/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "curvox/ablation.hpp"
#include "curvox/checkpoint.hpp"
#include "curvox/util.hpp"

namespace curvox {

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(lr0 > lr_final && lr_final > 0.0)) {
    throw ConfigError("learning rates must satisfy lr0 > lr_final > 0");
  }
  if (patience < 1) throw ConfigError("patience must be >= 1");
  if (!(clip_norm > 0.0)) throw ConfigError("clip_norm must be positive");
  weights.validate();
  model.validate();
}

KeyValueFile TrainConfig::to_key_values() const {
  KeyValueFile kv;
  kv.set("ablation", ablation_tag);
  kv.set_int("epochs", epochs);
  kv.set_int("batch_size", batch_size);
  kv.set_double("lr0", lr0);
  kv.set_double("lr_final", lr_final);
  kv.set_double("adam_beta1", adam.beta1);
  kv.set_double("adam_beta2", adam.beta2);
  kv.set_double("adam_epsilon", adam.epsilon);
  kv.set_double("weight_decay", adam.weight_decay);
  kv.set_bool("decoupled_weight_decay", adam.decoupled_weight_decay);
  kv.set_double("clip_norm", clip_norm);
  kv.set_int("patience", patience);
  kv.set_u64("seed", seed);
  kv.set_double("beta", weights.beta);
  kv.set_double("lambda_curv", weights.lambda_curv);
  kv.set_double("lambda_normal", weights.lambda_normal);
  kv.set_double("lambda_edge", weights.lambda_edge);
  kv.set("curvature_operator", to_string(weights.curvature_operator));
  kv.set_double("band_lo", weights.band_lo);
  kv.set_double("band_hi", weights.band_hi);
  kv.set_bool("curvature_from_ground_truth", weights.curvature_from_ground_truth);
  kv.set_bool("stop_gradient_target", weights.stop_gradient_target);
  kv.set("boundary_policy", weights.boundary == BoundaryPolicy::kFixedDivisor
                                ? "fixed-divisor"
                                : "in-bounds-count");
  kv.set_int("grid_n", model.grid_n);
  kv.set_int("latent_dim", model.latent_dim);
  kv.set("encoder_hidden", join_ints(model.encoder_hidden));
  kv.set("decoder_hidden", join_ints(model.decoder_hidden));
  kv.set("nonlinearity", to_string(model.nonlinearity));
  kv.set_double("logvar_min", model.logvar_min);
  kv.set_double("logvar_max", model.logvar_max);
  kv.set_bool("augment_flip", augment_flip);
  kv.set_bool("augment_depth_scale", augment_depth_scale);
  return kv;
}

std::vector<std::string> TrainConfig::known_keys() {
  return {"ablation",      "epochs",        "batch_size",    "lr0",
          "lr_final",      "adam_beta1",    "adam_beta2",    "adam_epsilon",
          "weight_decay",  "decoupled_weight_decay",         "clip_norm",
          "patience",      "seed",          "beta",          "lambda_curv",
          "lambda_normal", "lambda_edge",   "curvature_operator",
          "band_lo",       "band_hi",       "curvature_from_ground_truth",
          "stop_gradient_target",           "boundary_policy",
          "grid_n",        "latent_dim",    "encoder_hidden", "decoder_hidden",
          "nonlinearity",  "logvar_min",    "logvar_max",    "augment_flip",
          "augment_depth_scale",
          // Snapshot bookkeeping keys, accepted so a config.snapshot can be
          // fed back via --config to reproduce a run.
          "data_dir",      "checkpoint",    "split",         "ablation_seeds",
          "jobs"};
}

TrainConfig TrainConfig::from_key_values(const KeyValueFile& kv) {
  kv.require_known_keys(known_keys());
  TrainConfig c;
  c.ablation_tag = kv.get_or("ablation", "custom");
  if (c.ablation_tag != "custom") {
    c.weights = ablation_weights(c.ablation_tag);
  }
  c.epochs = kv.get_int_or("epochs", c.epochs);
  c.batch_size = kv.get_int_or("batch_size", c.batch_size);
  c.lr0 = kv.get_double_or("lr0", c.lr0);
  c.lr_final = kv.get_double_or("lr_final", c.lr_final);
  c.adam.beta1 = kv.get_double_or("adam_beta1", c.adam.beta1);
  c.adam.beta2 = kv.get_double_or("adam_beta2", c.adam.beta2);
  c.adam.epsilon = kv.get_double_or("adam_epsilon", c.adam.epsilon);
  c.adam.weight_decay = kv.get_double_or("weight_decay", c.adam.weight_decay);
  c.adam.decoupled_weight_decay =
      kv.get_bool_or("decoupled_weight_decay", c.adam.decoupled_weight_decay);
  c.clip_norm = kv.get_double_or("clip_norm", c.clip_norm);
  c.patience = kv.get_int_or("patience", c.patience);
  c.seed = kv.get_u64_or("seed", c.seed);
  c.weights.beta = kv.get_double_or("beta", c.weights.beta);
  c.weights.lambda_curv = kv.get_double_or("lambda_curv", c.weights.lambda_curv);
  c.weights.lambda_normal = kv.get_double_or("lambda_normal", c.weights.lambda_normal);
  c.weights.lambda_edge = kv.get_double_or("lambda_edge", c.weights.lambda_edge);
  if (kv.has("curvature_operator")) {
    c.weights.curvature_operator = curvature_operator_from_string(kv.get("curvature_operator"));
  }
  c.weights.band_lo = kv.get_double_or("band_lo", c.weights.band_lo);
  c.weights.band_hi = kv.get_double_or("band_hi", c.weights.band_hi);
  c.weights.curvature_from_ground_truth =
      kv.get_bool_or("curvature_from_ground_truth", c.weights.curvature_from_ground_truth);
  c.weights.stop_gradient_target =
      kv.get_bool_or("stop_gradient_target", c.weights.stop_gradient_target);
  if (kv.has("boundary_policy")) {
    const std::string p = kv.get("boundary_policy");
    if (p == "fixed-divisor") c.weights.boundary = BoundaryPolicy::kFixedDivisor;
    else if (p == "in-bounds-count") c.weights.boundary = BoundaryPolicy::kInBoundsCount;
    else throw ConfigError("unknown boundary_policy: " + p);
  }
  c.model.grid_n = kv.get_int_or("grid_n", c.model.grid_n);
  c.model.latent_dim = kv.get_int_or("latent_dim", c.model.latent_dim);
  if (kv.has("encoder_hidden")) c.model.encoder_hidden = parse_int_list(kv.get("encoder_hidden"));
  if (kv.has("decoder_hidden")) c.model.decoder_hidden = parse_int_list(kv.get("decoder_hidden"));
  if (kv.has("nonlinearity")) {
    c.model.nonlinearity = nonlinearity_from_string(kv.get("nonlinearity"));
  }
  c.model.logvar_min = kv.get_double_or("logvar_min", c.model.logvar_min);
  c.model.logvar_max = kv.get_double_or("logvar_max", c.model.logvar_max);
  c.augment_flip = kv.get_bool_or("augment_flip", c.augment_flip);
  c.augment_depth_scale = kv.get_bool_or("augment_depth_scale", c.augment_depth_scale);
  c.validate();
  return c;
}

namespace {

ag::Tensor grid_tensor(const OccupancyGrid& grid) {
  const int n = grid.n();
  return ag::Tensor({n, n, n}, std::vector<double>(grid.values().begin(), grid.values().end()));
}

}  // namespace

ExampleTerms compute_objective_terms(const Model& model, const TrainingSample& sample,
                                     const LossWeights& weights, const ag::Tensor& eps,
                                     bool force_all_terms) {
  const int n = model.config().grid_n;
  if (sample.gt.n() != n) {
    throw ConfigError("sample resolution " + std::to_string(sample.gt.n()) +
                      " does not match model grid_n " + std::to_string(n));
  }
  ExampleTerms terms;
  {
    const ag::Tensor evidence = grid_tensor(sample.evidence);
    const ag::Tensor mask = grid_tensor(sample.mask);
    const ag::Tensor gt = grid_tensor(sample.gt);

    auto [mu, logvar] = model.encode(evidence, mask);
    const ag::Tensor z = model.reparameterize(mu, logvar, eps);
    const Model::Decoded decoded = model.decode(z);

    try {
      terms.recon = bce(decoded.occupancy, gt);
    } catch (const NumericError& e) {
      throw NumericError(std::string("recon: ") + e.what());
    }
    try {
      terms.kl = kl_gaussian(mu, logvar);
    } catch (const NumericError& e) {
      throw NumericError(std::string("kl: ") + e.what());
    }
    if (weights.lambda_curv > 0.0 || force_all_terms) {
      try {
        const CurvatureTerm ct =
            curvature_loss(decoded.curvature, decoded.occupancy, &gt, n, weights);
        terms.curvature = ct.loss;
        terms.surface_voxels = ct.surface_voxels;
      } catch (const NumericError& e) {
        throw NumericError(std::string("curvature: ") + e.what());
      }
    } else {
      terms.curvature = ag::Tensor::scalar(0.0);
    }
    if (weights.lambda_normal > 0.0) {
      try {
        terms.normal =
            normal_consistency_loss(decoded.occupancy, sample.gt, weights.band_lo, weights.band_hi);
      } catch (const NumericError& e) {
        throw NumericError(std::string("normal: ") + e.what());
      }
    } else {
      terms.normal = ag::Tensor::scalar(0.0);
    }
    if (weights.lambda_edge > 0.0) {
      try {
        terms.edge = edge_preservation_loss(decoded.occupancy, sample.gt);
      } catch (const NumericError& e) {
        throw NumericError(std::string("edge: ") + e.what());
      }
    } else {
      terms.edge = ag::Tensor::scalar(0.0);
    }
  }
  return terms;
}

namespace {

struct BatchTerms {
  ag::Tensor recon, kl, curvature, normal, edge;
  long long surface_voxels = 0;
};

BatchTerms average_terms(const std::vector<ExampleTerms>& terms) {
  BatchTerms out;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (i == 0) {
      out.recon = terms[i].recon;
      out.kl = terms[i].kl;
      out.curvature = terms[i].curvature;
      out.normal = terms[i].normal;
      out.edge = terms[i].edge;
    } else {
      out.recon = ag::add(out.recon, terms[i].recon);
      out.kl = ag::add(out.kl, terms[i].kl);
      out.curvature = ag::add(out.curvature, terms[i].curvature);
      out.normal = ag::add(out.normal, terms[i].normal);
      out.edge = ag::add(out.edge, terms[i].edge);
    }
    out.surface_voxels += terms[i].surface_voxels;
  }
  const double inv = 1.0 / static_cast<double>(terms.size());
  out.recon = ag::scale(out.recon, inv);
  out.kl = ag::scale(out.kl, inv);
  out.curvature = ag::scale(out.curvature, inv);
  out.normal = ag::scale(out.normal, inv);
  out.edge = ag::scale(out.edge, inv);
  return out;
}

LossBreakdown breakdown_of(const BatchTerms& t, const LossWeights& w) {
  return total_loss(t.recon.scalar_value(), t.kl.scalar_value(), t.curvature.scalar_value(),
                    t.normal.scalar_value(), t.edge.scalar_value(), w, t.surface_voxels);
}

LossBreakdown evaluate_split(const TrainConfig& config, const Parameters& params,
                             const std::vector<TrainingSample>& samples) {
  const Model model(config.model, params, nullptr);
  const ag::Tensor eps = ag::Tensor::zeros({config.model.latent_dim});
  double recon = 0.0, kl = 0.0, curv = 0.0, normal = 0.0, edge = 0.0;
  long long voxels = 0;
  for (const auto& sample : samples) {
    const ExampleTerms t =
        compute_objective_terms(model, sample, config.weights, eps, /*force_all_terms=*/false);
    recon += t.recon.scalar_value();
    kl += t.kl.scalar_value();
    curv += t.curvature.scalar_value();
    normal += t.normal.scalar_value();
    edge += t.edge.scalar_value();
    voxels += t.surface_voxels;
  }
  const double inv = 1.0 / static_cast<double>(samples.size());
  return total_loss(recon * inv, kl * inv, curv * inv, normal * inv, edge * inv, config.weights,
                    voxels);
}

std::vector<TrainingSample> load_split(const std::filesystem::path& dataset_dir,
                                       const std::string& split, int expected_n) {
  const auto dir = dataset_dir / split;
  const DatasetManifest manifest = read_manifest(dir);
  if (manifest.grid_n != expected_n) {
    throw ConfigError("dataset grid_n " + std::to_string(manifest.grid_n) +
                      " does not match model grid_n " + std::to_string(expected_n));
  }
  std::vector<TrainingSample> samples;
  samples.reserve(manifest.scene_names.size());
  for (const auto& name : manifest.scene_names) {
    samples.push_back(load_sample(dir, name, manifest.extent));
  }
  if (samples.empty()) {
    throw ConfigError("split " + split + " has no scenes");
  }
  return samples;
}

}  // namespace

RunRecord train(const TrainConfig& config, const std::filesystem::path& dataset_dir,
                const std::filesystem::path& out_dir) {
  config.validate();
  const auto t_start = std::chrono::steady_clock::now();
  std::filesystem::create_directories(out_dir);

  {
    KeyValueFile snapshot = config.to_key_values();
    snapshot.set("data_dir", dataset_dir.string());
    snapshot.save(out_dir / "config.snapshot");
  }

  const std::vector<TrainingSample> train_samples =
      load_split(dataset_dir, "train", config.model.grid_n);
  const std::vector<TrainingSample> val_samples =
      load_split(dataset_dir, "val", config.model.grid_n);

  Rng rng(config.seed);
  Parameters params = init_parameters(config.model, rng);
  AdamState adam_state = AdamState::zeros_like(params);

  RunRecord record;
  record.run_dir = out_dir;
  record.parameter_count = params.scalar_count();
  record.metrics_path = out_dir / "metrics.csv";
  record.checkpoint_path = out_dir / "checkpoint.ckpt";

  std::string csv = LossBreakdown::csv_header() + ",lr\n";
  std::vector<double> val_history;
  Parameters best_params;
  double best_val = std::numeric_limits<double>::infinity();

  const AugmentConfig augment_config{config.augment_flip, config.augment_depth_scale, 0.05};

  std::vector<int> order(train_samples.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < config.epochs && !record.aborted; ++epoch) {
    const double lr = cosine_lr(epoch, config.epochs, config.lr0, config.lr_final);
    rng.shuffle(order);

    double sum_recon = 0.0, sum_kl = 0.0, sum_curv = 0.0, sum_normal = 0.0, sum_edge = 0.0;
    long long sum_voxels = 0;
    int examples_seen = 0;

    try {
      for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
        const std::size_t end = std::min(order.size(), start + config.batch_size);
        ag::Tape tape;
        const Model model(config.model, params, &tape);
        std::vector<ExampleTerms> example_terms;
        example_terms.reserve(end - start);
        for (std::size_t b = start; b < end; ++b) {
          TrainingSample sample = train_samples[static_cast<std::size_t>(order[b])];
          if (config.augment_flip || config.augment_depth_scale) {
            sample = augment(sample, augment_config, rng);
          }
          const ag::Tensor eps = sample_standard_normal(rng, config.model.latent_dim);
          example_terms.push_back(compute_objective_terms(model, sample, config.weights, eps,
                                                          /*force_all_terms=*/false));
        }
        const BatchTerms batch = average_terms(example_terms);
        const LossBreakdown bd = breakdown_of(batch, config.weights);
        if (!std::isfinite(bd.total)) {
          throw NumericError("total: non-finite batch loss " + format_double(bd.total));
        }
        const ag::Tensor total =
            weighted_total(batch.recon, batch.kl, batch.curvature, batch.normal, batch.edge,
                           config.weights);
        const ag::GradientMap grad_map = tape.backward(total);
        GradientVec grads;
        grads.reserve(params.entries.size());
        for (const auto& [name, leaf] : model.params()) {
          const ag::Tensor& g = grad_map.at(leaf);
          grads.emplace_back(g.values().begin(), g.values().end());
        }
        clip_global_norm(grads, config.clip_norm);
        if (config.assert_clip) {
          const double post = global_norm(grads);
          if (!(post <= config.clip_norm + 1e-12)) {
            throw NumericError("post-clip norm " + format_double(post) + " exceeds " +
                               format_double(config.clip_norm));
          }
        }
        adam_step(params, grads, adam_state, lr, config.adam);

        const auto batch_n = static_cast<int>(end - start);
        sum_recon += bd.recon * batch_n;
        sum_kl += bd.kl * batch_n;
        sum_curv += bd.curvature * batch_n;
        sum_normal += bd.normal * batch_n;
        sum_edge += bd.edge * batch_n;
        sum_voxels += bd.surface_voxels;
        examples_seen += batch_n;
      }
    } catch (const NumericError& e) {
      record.aborted = true;
      record.abort_reason = e.what();
      break;
    }

    const double inv = 1.0 / examples_seen;
    EpochMetrics metrics;
    metrics.lr = lr;
    metrics.train = total_loss(sum_recon * inv, sum_kl * inv, sum_curv * inv, sum_normal * inv,
                               sum_edge * inv, config.weights, sum_voxels);
    try {
      metrics.val = evaluate_split(config, params, val_samples);
    } catch (const NumericError& e) {
      record.aborted = true;
      record.abort_reason = std::string("validation: ") + e.what();
      break;
    }
    record.epochs.push_back(metrics);
    record.stopping_epoch = epoch;
    csv += metrics.train.csv_row(epoch + 1, "train") + "," + format_double(lr) + "\n";
    csv += metrics.val.csv_row(epoch + 1, "val") + "," + format_double(lr) + "\n";

    val_history.push_back(metrics.val.total);
    if (metrics.val.total < best_val) {
      best_val = metrics.val.total;
      record.best_epoch = epoch;
      best_params = params.clone();
    }
    const EarlyStopResult stop = early_stop(val_history, config.patience);
    if (stop.stop) break;
  }

  record.best_val_total = best_val;
  write_text_file(record.metrics_path, csv);
  if (record.best_epoch >= 0) {
    save_checkpoint(record.checkpoint_path, config.model, best_params);
  }

  {
    KeyValueFile summary;
    summary.set("ablation", config.ablation_tag);
    summary.set_u64("seed", config.seed);
    summary.set_bool("aborted", record.aborted);
    summary.set("abort_reason", record.abort_reason);
    summary.set_int("epochs_run", static_cast<long long>(record.epochs.size()));
    summary.set_int("best_epoch", record.best_epoch + 1);  // 1-based, matches metrics.csv
    summary.set_double("best_val_total", record.best_val_total);
    summary.set_int("parameter_count", record.parameter_count);
    summary.save(out_dir / "run_summary.txt");
  }

  const auto t_end = std::chrono::steady_clock::now();
  record.wall_seconds = std::chrono::duration<double>(t_end - t_start).count();
  write_text_file(out_dir / "timing.txt",
                  "wall_seconds = " + format_double(record.wall_seconds) + "\n");
  return record;
}

}  // namespace curvox
