#include <cmath>
#include <limits>

#include "curvox/losses.hpp"
#include "curvox/rng.hpp"
#include "curvox/util.hpp"
#include "doctest.h"
#include "gradcheck.hpp"
#include "oracles.hpp"

using namespace curvox;

namespace {

std::vector<double> random_values(Rng& rng, int count, double lo, double hi) {
  std::vector<double> v(static_cast<std::size_t>(count));
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

ag::Tensor grid_tensor(int n, const std::vector<double>& v) { return ag::Tensor({n, n, n}, v); }

}  // namespace

TEST_CASE("bce unit values") {
  const ag::Tensor half = ag::Tensor::full({4, 4, 4}, 0.5);
  const ag::Tensor gt = ag::Tensor::full({4, 4, 4}, 1.0);
  CHECK(std::fabs(bce(half, gt).scalar_value() - std::log(2.0)) <= 1e-9);

  // Saturated but correct predictions stay tiny after clamping.
  const ag::Tensor ones = ag::Tensor::full({3, 3, 3}, 1.0);
  const ag::Tensor zeros = ag::Tensor::full({3, 3, 3}, 0.0);
  CHECK(bce(ones, ones).scalar_value() <= 1.7e-6);
  CHECK(bce(zeros, zeros).scalar_value() <= 1.7e-6);

  CHECK_THROWS_AS((void)bce(half, ones), std::invalid_argument);
}

TEST_CASE("bce matches the summation oracle") {
  Rng rng(31);
  const auto pred = random_values(rng, 64, 0.0, 1.0);
  const auto gt = random_values(rng, 64, 0.0, 1.0);
  const double expected = oracle::bce(pred, gt);
  const double actual = bce(grid_tensor(4, pred), grid_tensor(4, gt)).scalar_value();
  CHECK(std::fabs(actual - expected) <= 1e-12);
}

TEST_CASE("kl unit values") {
  const ag::Tensor z2 = ag::Tensor::zeros({2});
  CHECK(kl_gaussian(z2, z2).scalar_value() == doctest::Approx(0.0));

  const ag::Tensor mu1({1}, {1.0});
  const ag::Tensor lv0({1}, {0.0});
  CHECK(std::fabs(kl_gaussian(mu1, lv0).scalar_value() - 0.5) <= 1e-12);
}

TEST_CASE("kl matches the oracle on a 256-dim vector") {
  Rng rng(32);
  const auto mu = random_values(rng, 256, -2.0, 2.0);
  const auto lv = random_values(rng, 256, -2.0, 2.0);
  const double expected = oracle::kl_gaussian(mu, lv);
  CHECK(std::fabs(kl_gaussian(ag::Tensor({256}, mu), ag::Tensor({256}, lv)).scalar_value() -
                  expected) <= 1e-12);
}

TEST_CASE("kl batch form averages per-element KLs") {
  Rng rng(33);
  const auto mu = random_values(rng, 8, -2.0, 2.0);
  const auto lv = random_values(rng, 8, -2.0, 2.0);
  const double k1 = oracle::kl_gaussian({mu[0], mu[1], mu[2], mu[3]}, {lv[0], lv[1], lv[2], lv[3]});
  const double k2 = oracle::kl_gaussian({mu[4], mu[5], mu[6], mu[7]}, {lv[4], lv[5], lv[6], lv[7]});
  const double batch =
      kl_gaussian(ag::Tensor({2, 4}, mu), ag::Tensor({2, 4}, lv)).scalar_value();
  CHECK(std::fabs(batch - 0.5 * (k1 + k2)) <= 1e-12);
}

TEST_CASE("kl nonnegativity over random draws") {
  Rng rng(34);
  for (int trial = 0; trial < 10000; ++trial) {
    const double mu = rng.uniform(-3.0, 3.0);
    const double lv = rng.uniform(-3.0, 3.0);
    CHECK(kl_gaussian(ag::Tensor({1}, {mu}), ag::Tensor({1}, {lv})).scalar_value() >= 0.0);
  }
}

TEST_CASE("curvature loss is zero when the head matches the target") {
  Rng rng(35);
  const int n = 6;
  const auto occ_values = random_values(rng, n * n * n, 0.0, 1.0);
  const ag::Tensor occ = grid_tensor(n, occ_values);
  const LossWeights weights;
  const ag::Tensor h = laplacian_t(occ, n, Connectivity::kFace6, weights.boundary);
  const CurvatureTerm term = curvature_loss(h, occ, nullptr, n, weights);
  CHECK(term.loss.scalar_value() == 0.0);
  CHECK(term.surface_voxels > 0);
}

TEST_CASE("curvature loss arithmetic on a crafted two-voxel band") {
  const int n = 3;
  // Occupancy: two voxels inside the band, everything else at 0 or 1.
  std::vector<double> occ(27, 0.0);
  occ[4] = 0.5;
  occ[22] = 0.5;
  occ[13] = 1.0;
  const ag::Tensor occ_t = grid_tensor(n, occ);
  const LossWeights weights;
  const ag::Tensor h = laplacian_t(occ_t, n, Connectivity::kFace6, weights.boundary);

  std::vector<double> c(h.values().begin(), h.values().end());
  c[4] += 1.0;   // in-band difference 1
  c[22] += 3.0;  // in-band difference 3
  c[0] += 7.0;   // out of band, must not matter
  const CurvatureTerm term = curvature_loss(grid_tensor(n, c), occ_t, nullptr, n, weights);
  CHECK(term.surface_voxels == 2);
  CHECK(term.loss.scalar_value() == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("curvature loss matches the masked-MSE oracle") {
  Rng rng(36);
  const int n = 8;
  const auto occ = random_values(rng, n * n * n, 0.0, 1.0);
  const auto c = random_values(rng, n * n * n, -1.0, 1.0);
  const LossWeights weights;
  const auto h = oracle::laplacian(occ, n, false);
  const double expected = oracle::masked_curvature_mse(c, h, occ, 0.3, 0.7);
  const CurvatureTerm term =
      curvature_loss(grid_tensor(n, c), grid_tensor(n, occ), nullptr, n, weights);
  CHECK(std::fabs(term.loss.scalar_value() - expected) <= 1e-12);
}

TEST_CASE("curvature loss: empty band is a defined zero") {
  const int n = 3;
  const ag::Tensor occ = ag::Tensor::full({n, n, n}, 1.0);
  const ag::Tensor c = ag::Tensor::zeros({n, n, n});
  const CurvatureTerm term = curvature_loss(c, occ, nullptr, n, LossWeights{});
  CHECK(term.loss.scalar_value() == 0.0);
  CHECK(term.surface_voxels == 0);
}

TEST_CASE("curvature loss ignores out-of-band perturbations bit-exactly") {
  Rng rng(37);
  const int n = 5;
  const auto occ = random_values(rng, n * n * n, 0.0, 1.0);
  auto c = random_values(rng, n * n * n, -1.0, 1.0);
  const LossWeights weights;
  const ag::Tensor occ_t = grid_tensor(n, occ);
  const double before =
      curvature_loss(grid_tensor(n, c), occ_t, nullptr, n, weights).loss.scalar_value();
  const BoolGrid band = surface_mask(occ, n, weights.band_lo, weights.band_hi);
  for (int idx = 0; idx < n * n * n; ++idx) {
    if (!band.get_flat(idx)) c[static_cast<std::size_t>(idx)] += rng.uniform(-5.0, 5.0);
  }
  const double after =
      curvature_loss(grid_tensor(n, c), occ_t, nullptr, n, weights).loss.scalar_value();
  CHECK(before == after);
}

TEST_CASE("curvature loss honors the ground-truth switch and operators") {
  Rng rng(38);
  const int n = 5;
  const auto occ = random_values(rng, n * n * n, 0.0, 1.0);
  const auto gt = random_values(rng, n * n * n, 0.0, 1.0);
  const auto c = random_values(rng, n * n * n, -1.0, 1.0);

  LossWeights from_gt;
  from_gt.curvature_from_ground_truth = true;
  const ag::Tensor gt_t = grid_tensor(n, gt);
  const auto h_gt = oracle::laplacian(gt, n, false);
  const double expected = oracle::masked_curvature_mse(c, h_gt, gt, 0.3, 0.7);
  const CurvatureTerm term =
      curvature_loss(grid_tensor(n, c), grid_tensor(n, occ), &gt_t, n, from_gt);
  CHECK(std::fabs(term.loss.scalar_value() - expected) <= 1e-12);
  CHECK_THROWS_AS(curvature_loss(grid_tensor(n, c), grid_tensor(n, occ), nullptr, n, from_gt),
                  std::invalid_argument);

  LossWeights alt;
  alt.curvature_operator = CurvatureOperator::kGradientMagnitude;
  const auto gm = oracle::gradient_magnitude(occ, n);
  const double expected_alt = oracle::masked_curvature_mse(c, gm, occ, 0.3, 0.7);
  const CurvatureTerm alt_term =
      curvature_loss(grid_tensor(n, c), grid_tensor(n, occ), nullptr, n, alt);
  CHECK(std::fabs(alt_term.loss.scalar_value() - expected_alt) <= 1e-10);

  LossWeights lap26;
  lap26.curvature_operator = CurvatureOperator::kLaplacian26;
  const auto h26 = oracle::laplacian(occ, n, true);
  const double expected26 = oracle::masked_curvature_mse(c, h26, occ, 0.3, 0.7);
  const CurvatureTerm term26 =
      curvature_loss(grid_tensor(n, c), grid_tensor(n, occ), nullptr, n, lap26);
  CHECK(std::fabs(term26.loss.scalar_value() - expected26) <= 1e-12);
}

namespace {

// Ramp occupancy with in-band values and nonzero gradients everywhere.
OccupancyGrid ramp_grid(int n) {
  OccupancyGrid g(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        g.at(i, j, k) = 0.1 + 0.8 * static_cast<double>(i) / (n - 1);
      }
    }
  }
  return g;
}

}  // namespace

TEST_CASE("normal consistency unit values") {
  const int n = 6;
  const OccupancyGrid gt = ramp_grid(n);
  const ag::Tensor gt_t = grid_tensor(n, {gt.values().begin(), gt.values().end()});
  CHECK(std::fabs(normal_consistency_loss(gt_t, gt).scalar_value()) <= 1e-12);

  std::vector<double> inverted(gt.values().begin(), gt.values().end());
  for (double& v : inverted) v = 1.0 - v;
  CHECK(std::fabs(normal_consistency_loss(grid_tensor(n, inverted), gt).scalar_value() - 2.0) <=
        1e-12);
}

TEST_CASE("normal consistency matches the per-voxel oracle") {
  Rng rng(39);
  const int n = 7;
  const auto pred = random_values(rng, n * n * n, 0.0, 1.0);
  const auto gtv = random_values(rng, n * n * n, 0.0, 1.0);
  const OccupancyGrid gt(n, gtv);
  const double expected = oracle::normal_consistency(pred, gtv, n);
  CHECK(std::fabs(normal_consistency_loss(grid_tensor(n, pred), gt).scalar_value() - expected) <=
        1e-10);
}

TEST_CASE("normal consistency: binary gt has an empty band") {
  const int n = 4;
  std::vector<double> gtv(n * n * n, 0.0);
  gtv[0] = 1.0;
  const OccupancyGrid gt(n, gtv);
  const ag::Tensor pred = ag::Tensor::full({n, n, n}, 0.4);
  CHECK(normal_consistency_loss(pred, gt).scalar_value() == 0.0);
}

TEST_CASE("edge preservation unit values and oracle") {
  Rng rng(40);
  const int n = 6;
  const OccupancyGrid gt = ramp_grid(n);
  const ag::Tensor same = grid_tensor(n, {gt.values().begin(), gt.values().end()});
  CHECK(edge_preservation_loss(same, gt).scalar_value() == 0.0);

  // Constant pred vs ramp gt: the oracle computes the expected mean.
  const ag::Tensor flat = ag::Tensor::full({n, n, n}, 0.5);
  const std::vector<double> flat_v(static_cast<std::size_t>(n) * n * n, 0.5);
  const std::vector<double> gt_v(gt.values().begin(), gt.values().end());
  const double expected = oracle::edge_preservation(flat_v, gt_v, n);
  CHECK(std::fabs(edge_preservation_loss(flat, gt).scalar_value() - expected) <= 1e-12);

  const auto pred = random_values(rng, n * n * n, 0.0, 1.0);
  const double expected_rand = oracle::edge_preservation(pred, gt_v, n);
  CHECK(std::fabs(edge_preservation_loss(grid_tensor(n, pred), gt).scalar_value() -
                  expected_rand) <= 1e-12);
}

TEST_CASE("total loss composition") {
  const LossWeights defaults;
  const LossBreakdown bd = total_loss(0.5, 0.4, 0.02, 0.0, 0.0, defaults, 10);
  CHECK(std::fabs(bd.total - 0.5008) <= 1e-12);

  LossWeights baseline;
  baseline.lambda_curv = 0.0;
  const LossBreakdown b2 = total_loss(0.5, 0.4, 0.33, 0.0, 0.0, baseline, 0);
  CHECK(std::fabs(b2.total - (0.5 + 0.001 * 0.4)) <= 1e-15);

  LossWeights multi;
  multi.lambda_normal = 0.05;
  multi.lambda_edge = 0.01;
  const LossBreakdown b3 = total_loss(0.5, 0.4, 0.02, 0.1, 0.2, multi, 0);
  CHECK(std::fabs(b3.total - (0.5 + 0.0004 + 0.0004 + 0.05 * 0.1 + 0.01 * 0.2)) <= 1e-12);

  CHECK_THROWS_AS(total_loss(std::nan(""), 0, 0, 0, 0, defaults, 0), NumericError);
  try {
    total_loss(0.1, std::numeric_limits<double>::infinity(), 0, 0, 0, defaults, 0);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("kl") != std::string::npos);
  }
}

TEST_CASE("weighted_total tensor composition agrees with total_loss") {
  Rng rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    LossWeights w;
    w.beta = rng.uniform(0.0, 0.1);
    w.lambda_curv = rng.uniform(0.0, 0.1);
    w.lambda_normal = rng.uniform(0.0, 0.1);
    w.lambda_edge = rng.uniform(0.0, 0.1);
    const double r = rng.uniform(0.0, 2.0), k = rng.uniform(0.0, 2.0), c = rng.uniform(0.0, 2.0),
                 nn = rng.uniform(0.0, 2.0), e = rng.uniform(0.0, 2.0);
    const ag::Tensor total =
        weighted_total(ag::Tensor::scalar(r), ag::Tensor::scalar(k), ag::Tensor::scalar(c),
                       ag::Tensor::scalar(nn), ag::Tensor::scalar(e), w);
    const LossBreakdown bd = total_loss(r, k, c, nn, e, w, 0);
    CHECK(std::fabs(total.scalar_value() - bd.total) <= 1e-12);
  }
}

TEST_CASE("loss terms are nonnegative on random inputs") {
  Rng rng(42);
  const int n = 5;
  for (int trial = 0; trial < 10; ++trial) {
    const auto pred = random_values(rng, n * n * n, 0.0, 1.0);
    const auto gtv = random_values(rng, n * n * n, 0.0, 1.0);
    const OccupancyGrid gt(n, gtv);
    const ag::Tensor pred_t = grid_tensor(n, pred);
    const ag::Tensor gt_t = grid_tensor(n, gtv);
    CHECK(bce(pred_t, gt_t).scalar_value() >= 0.0);
    CHECK(curvature_loss(pred_t, gt_t, nullptr, n, LossWeights{}).loss.scalar_value() >= 0.0);
    CHECK(normal_consistency_loss(pred_t, gt).scalar_value() >= -1e-12);
    CHECK(edge_preservation_loss(pred_t, gt).scalar_value() >= 0.0);
  }
}

TEST_CASE("loss gradients pass finite-difference checks") {
  Rng rng(43);
  const int n = 4;
  const auto gtv = random_values(rng, n * n * n, 0.0, 1.0);
  const OccupancyGrid gt_grid(n, gtv);
  const ag::Tensor gt = grid_tensor(n, gtv);

  gradcheck::Spec spec{{{n, n, n}}, {random_values(rng, n * n * n, 0.05, 0.95)}};
  CHECK(gradcheck::max_rel_error(
            [&](ag::Tape&, const std::vector<ag::Tensor>& l) { return bce(l[0], gt); }, spec) <
        1e-6);

  gradcheck::Spec kl_spec{{{6}, {6}},
                          {random_values(rng, 6, -1.5, 1.5), random_values(rng, 6, -1.5, 1.5)}};
  CHECK(gradcheck::max_rel_error(
            [&](ag::Tape&, const std::vector<ag::Tensor>& l) { return kl_gaussian(l[0], l[1]); },
            kl_spec) < 1e-6);

  // Curvature term with fixed mask source (gt) so the band is constant
  // under perturbation.
  LossWeights from_gt;
  from_gt.curvature_from_ground_truth = true;
  gradcheck::Spec curv_spec{{{n, n, n}}, {random_values(rng, n * n * n, -0.5, 0.5)}};
  CHECK(gradcheck::max_rel_error(
            [&](ag::Tape&, const std::vector<ag::Tensor>& l) {
              return curvature_loss(l[0], gt, &gt, n, from_gt).loss;
            },
            curv_spec) < 1e-6);

  CHECK(gradcheck::max_rel_error(
            [&](ag::Tape&, const std::vector<ag::Tensor>& l) {
              return normal_consistency_loss(l[0], gt_grid);
            },
            spec) < 1e-5);

  CHECK(gradcheck::max_rel_error(
            [&](ag::Tape&, const std::vector<ag::Tensor>& l) {
              return edge_preservation_loss(l[0], gt_grid);
            },
            spec) < 1e-5);
}

TEST_CASE("loss breakdown CSV row") {
  LossBreakdown bd;
  bd.recon = 0.5;
  bd.kl = 0.25;
  bd.total = 0.50025;
  bd.surface_voxels = 7;
  const std::string row = bd.csv_row(3, "val");
  CHECK(row.rfind("3,val,0.5,0.25,", 0) == 0);
  CHECK(row.find(",7") == row.size() - 2);
  CHECK(LossBreakdown::csv_header() ==
        "epoch,split,recon,kl,curvature,normal,edge,total,surface_voxels");
}
