#include <benchmark/benchmark.h>

#include "curvox/losses.hpp"
#include "curvox/model.hpp"
#include "curvox/rng.hpp"
#include "curvox/tape.hpp"

namespace {

using namespace curvox;

void BM_AffineForward(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const int n = static_cast<int>(state.range(1));
  Rng rng(11);
  std::vector<double> xv(static_cast<std::size_t>(k));
  std::vector<double> wv(static_cast<std::size_t>(k) * n);
  std::vector<double> bv(static_cast<std::size_t>(n));
  for (auto& v : xv) v = rng.uniform(-1, 1);
  for (auto& v : wv) v = rng.uniform(-1, 1);
  for (auto& v : bv) v = rng.uniform(-1, 1);
  const ag::Tensor x({k}, xv);
  const ag::Tensor w({k, n}, wv);
  const ag::Tensor b({n}, bv);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ag::affine(x, w, b));
  }
}
BENCHMARK(BM_AffineForward)->Args({8192, 256})->Args({256, 4096});

// One full desk-scale training step: forward, backward, no optimizer.
void BM_ModelStep(benchmark::State& state) {
  ModelConfig config;  // 16^3, latent 32
  Rng rng(12);
  Parameters params = init_parameters(config, rng);
  const int v = config.voxel_count();
  std::vector<double> ev(static_cast<std::size_t>(v), 0.0);
  std::vector<double> gt(static_cast<std::size_t>(v), 0.0);
  for (int i = 0; i < v; i += 7) ev[static_cast<std::size_t>(i)] = 1.0;
  for (int i = 0; i < v; i += 3) gt[static_cast<std::size_t>(i)] = 1.0;
  const LossWeights weights;
  const int n = config.grid_n;

  for (auto _ : state) {
    ag::Tape tape;
    const Model model(config, params, &tape);
    const auto [mu, logvar] =
        model.encode(ag::Tensor({n, n, n}, ev), ag::Tensor({n, n, n}, ev));
    const ag::Tensor z = model.reparameterize(mu, logvar, sample_standard_normal(rng, config.latent_dim));
    const auto dec = model.decode(z);
    const ag::Tensor recon = bce(dec.occupancy, ag::Tensor({n, n, n}, gt));
    const ag::Tensor kl = kl_gaussian(mu, logvar);
    const CurvatureTerm ct = curvature_loss(dec.curvature, dec.occupancy, nullptr, n, weights);
    const ag::Tensor total = weighted_total(recon, kl, ct.loss, ag::Tensor::scalar(0.0),
                                            ag::Tensor::scalar(0.0), weights);
    benchmark::DoNotOptimize(tape.backward(total));
  }
}
BENCHMARK(BM_ModelStep)->Unit(benchmark::kMillisecond);

}  // namespace
