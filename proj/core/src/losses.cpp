#include "curvox/losses.hpp"

#include <cmath>
#include <stdexcept>

#include "curvox/util.hpp"

namespace curvox {

namespace {

constexpr double kProbClamp = 1e-7;
constexpr double kNormFloor = 1e-8;  // gradient-norm skip threshold
constexpr double kBig = 1e30;

ag::Tensor square(const ag::Tensor& x) { return ag::mul(x, x); }

// Differentiable gradient magnitude with the squared norm clamped at
// kNormFloor^2 so masked-out voxels cannot poison the backward pass with
// inf * 0. `clamped` selects that guard; the edge term uses the raw sqrt.
ag::Tensor gradient_magnitude_t(const ag::Tensor& x, int n, bool clamped) {
  ag::Tensor gx = central_diff_t(x, n, 0);
  ag::Tensor gy = central_diff_t(x, n, 1);
  ag::Tensor gz = central_diff_t(x, n, 2);
  ag::Tensor s = ag::add(ag::add(square(gx), square(gy)), square(gz));
  if (clamped) {
    s = ag::clamp(s, kNormFloor * kNormFloor, kBig);
  }
  return ag::sqrt(s);
}

}  // namespace

std::string to_string(CurvatureOperator op) {
  switch (op) {
    case CurvatureOperator::kLaplacian6: return "laplacian-6";
    case CurvatureOperator::kLaplacian26: return "laplacian-26";
    case CurvatureOperator::kGradientMagnitude: return "gradient-normal-alternative";
  }
  return "?";
}

CurvatureOperator curvature_operator_from_string(const std::string& s) {
  if (s == "laplacian-6") return CurvatureOperator::kLaplacian6;
  if (s == "laplacian-26") return CurvatureOperator::kLaplacian26;
  if (s == "gradient-normal-alternative") return CurvatureOperator::kGradientMagnitude;
  throw ConfigError("unknown curvature operator: " + s);
}

void LossWeights::validate() const {
  if (beta < 0.0 || lambda_curv < 0.0 || lambda_normal < 0.0 || lambda_edge < 0.0) {
    throw ConfigError("loss weights must be >= 0");
  }
  if (!(band_lo >= 0.0 && band_lo < band_hi && band_hi <= 1.0)) {
    throw ConfigError("surface band requires 0 <= lo < hi <= 1");
  }
}

std::string LossBreakdown::csv_header() {
  return "epoch,split,recon,kl,curvature,normal,edge,total,surface_voxels";
}

std::string LossBreakdown::csv_row(int epoch, const std::string& split) const {
  std::string row = std::to_string(epoch) + "," + split;
  for (double v : {recon, kl, curvature, normal, edge, total}) {
    row += "," + format_double(v);
  }
  row += "," + std::to_string(surface_voxels);
  return row;
}

ag::Tensor bce(const ag::Tensor& pred, const ag::Tensor& target) {
  if (!ag::same_shape(pred.shape(), target.shape())) {
    throw std::invalid_argument("bce: shape mismatch " + ag::shape_str(pred.shape()) + " vs " +
                                ag::shape_str(target.shape()));
  }
  const ag::Tensor one = ag::Tensor::scalar(1.0);
  ag::Tensor p = ag::clamp(pred, kProbClamp, 1.0 - kProbClamp);
  ag::Tensor hit = ag::mul(target, ag::log(p));
  ag::Tensor miss = ag::mul(ag::sub(one, target), ag::log(ag::sub(one, p)));
  return ag::scale(ag::mean(ag::add(hit, miss)), -1.0);
}

ag::Tensor kl_gaussian(const ag::Tensor& mu, const ag::Tensor& logvar) {
  if (!ag::same_shape(mu.shape(), logvar.shape())) {
    throw std::invalid_argument("kl_gaussian: shape mismatch " + ag::shape_str(mu.shape()) +
                                " vs " + ag::shape_str(logvar.shape()));
  }
  if (mu.rank() == 1) {
    const ag::Tensor one = ag::Tensor::scalar(1.0);
    ag::Tensor inner =
        ag::sub(ag::sub(ag::add(one, logvar), ag::mul(mu, mu)), ag::exp(logvar));
    return ag::scale(ag::sum(inner), -0.5);
  }
  if (mu.rank() == 2) {
    const int batch = mu.shape()[0];
    ag::Tensor acc;
    for (int b = 0; b < batch; ++b) {
      ag::Tensor row_mu = ag::reshape(ag::slice(mu, 0, b, 1), {mu.shape()[1]});
      ag::Tensor row_lv = ag::reshape(ag::slice(logvar, 0, b, 1), {mu.shape()[1]});
      ag::Tensor kl = kl_gaussian(row_mu, row_lv);
      acc = b == 0 ? kl : ag::add(acc, kl);
    }
    return ag::scale(acc, 1.0 / batch);
  }
  throw std::invalid_argument("kl_gaussian: expected rank 1 or 2, got " +
                              ag::shape_str(mu.shape()));
}

CurvatureTerm curvature_loss(const ag::Tensor& curvature_pred, const ag::Tensor& occupancy_pred,
                             const ag::Tensor* ground_truth, int n, const LossWeights& weights) {
  if (curvature_pred.size() != n * n * n || occupancy_pred.size() != n * n * n) {
    throw std::invalid_argument("curvature_loss: tensors must have n^3 elements");
  }
  const ag::Tensor* reference = &occupancy_pred;
  if (weights.curvature_from_ground_truth) {
    if (ground_truth == nullptr) {
      throw std::invalid_argument("curvature_loss: ground truth requested but not provided");
    }
    reference = ground_truth;
  }

  ag::Tensor target;
  switch (weights.curvature_operator) {
    case CurvatureOperator::kLaplacian6:
      target = laplacian_t(*reference, n, Connectivity::kFace6, weights.boundary);
      break;
    case CurvatureOperator::kLaplacian26:
      target = laplacian_t(*reference, n, Connectivity::kFull26, weights.boundary);
      break;
    case CurvatureOperator::kGradientMagnitude:
      target = gradient_magnitude_t(*reference, n, /*clamped=*/true);
      break;
  }
  if (weights.stop_gradient_target) {
    target = target.detached();
  }

  const BoolGrid band = surface_mask(reference->values(), n, weights.band_lo, weights.band_hi);
  const int count = band.count();
  if (count == 0) {
    return {ag::Tensor::scalar(0.0), 0};
  }
  std::vector<double> mask_values(static_cast<std::size_t>(n) * n * n, 0.0);
  for (int idx = 0; idx < n * n * n; ++idx) {
    if (band.get_flat(idx)) mask_values[static_cast<std::size_t>(idx)] = 1.0;
  }
  ag::Tensor mask(curvature_pred.shape(), std::move(mask_values));
  ag::Tensor diff = ag::sub(curvature_pred, target);
  ag::Tensor masked = ag::mul(square(diff), mask);
  return {ag::scale(ag::sum(masked), 1.0 / count), count};
}

ag::Tensor normal_consistency_loss(const ag::Tensor& pred, const OccupancyGrid& gt,
                                   double band_lo, double band_hi) {
  const int n = gt.n();
  if (pred.size() != n * n * n) {
    throw std::invalid_argument("normal_consistency_loss: shape mismatch");
  }
  const auto gt_grad = central_gradient(gt);
  const BoolGrid band = surface_mask(gt, band_lo, band_hi);

  ag::Tensor px = central_diff_t(pred, n, 0);
  ag::Tensor py = central_diff_t(pred, n, 1);
  ag::Tensor pz = central_diff_t(pred, n, 2);

  // Skip voxels outside the gt band or where either gradient norm is tiny.
  // The pred norm is clamped away from zero before the division so the
  // masked-out voxels stay finite in both passes.
  const int total = n * n * n;
  std::vector<double> mask_values(static_cast<std::size_t>(total), 0.0);
  std::vector<double> gt_unit_x(static_cast<std::size_t>(total), 0.0);
  std::vector<double> gt_unit_y(static_cast<std::size_t>(total), 0.0);
  std::vector<double> gt_unit_z(static_cast<std::size_t>(total), 0.0);
  int count = 0;
  for (int idx = 0; idx < total; ++idx) {
    const auto u = static_cast<std::size_t>(idx);
    const double gx = gt_grad[0].values()[u];
    const double gy = gt_grad[1].values()[u];
    const double gz = gt_grad[2].values()[u];
    const double gt_norm = std::sqrt(gx * gx + gy * gy + gz * gz);
    const double ps = px.at(idx) * px.at(idx) + py.at(idx) * py.at(idx) + pz.at(idx) * pz.at(idx);
    if (!band.get_flat(idx) || gt_norm < kNormFloor || ps < kNormFloor * kNormFloor) {
      continue;
    }
    mask_values[u] = 1.0;
    gt_unit_x[u] = gx / gt_norm;
    gt_unit_y[u] = gy / gt_norm;
    gt_unit_z[u] = gz / gt_norm;
    ++count;
  }
  if (count == 0) {
    return ag::Tensor::scalar(0.0);
  }
  const ag::Shape shape = pred.shape();
  ag::Tensor dot = ag::add(ag::add(ag::mul(px, ag::Tensor(shape, std::move(gt_unit_x))),
                                   ag::mul(py, ag::Tensor(shape, std::move(gt_unit_y)))),
                           ag::mul(pz, ag::Tensor(shape, std::move(gt_unit_z))));
  ag::Tensor pred_norm = gradient_magnitude_t(pred, n, /*clamped=*/true);
  ag::Tensor cosine = ag::div(dot, pred_norm);
  ag::Tensor one_minus = ag::sub(ag::Tensor::scalar(1.0), cosine);
  ag::Tensor masked = ag::mul(one_minus, ag::Tensor(shape, std::move(mask_values)));
  return ag::scale(ag::sum(masked), 1.0 / count);
}

ag::Tensor edge_preservation_loss(const ag::Tensor& pred, const OccupancyGrid& gt) {
  const int n = gt.n();
  if (pred.size() != n * n * n) {
    throw std::invalid_argument("edge_preservation_loss: shape mismatch");
  }
  const CurvatureField gt_mag = gradient_magnitude(gt);
  ag::Tensor gt_mag_t(pred.shape(),
                      std::vector<double>(gt_mag.values().begin(), gt_mag.values().end()));
  // Raw sqrt here: the derivative spikes near flat regions of pred, which is
  // exactly the gradient pathology this term is studied for.
  ag::Tensor pred_mag = gradient_magnitude_t(pred, n, /*clamped=*/false);
  return ag::mean(ag::abs(ag::sub(pred_mag, gt_mag_t)));
}

ag::Tensor weighted_total(const ag::Tensor& recon, const ag::Tensor& kl,
                          const ag::Tensor& curvature, const ag::Tensor& normal,
                          const ag::Tensor& edge, const LossWeights& weights) {
  ag::Tensor total = ag::add(recon, ag::scale(kl, weights.beta));
  total = ag::add(total, ag::scale(curvature, weights.lambda_curv));
  total = ag::add(total, ag::scale(normal, weights.lambda_normal));
  total = ag::add(total, ag::scale(edge, weights.lambda_edge));
  return total;
}

LossBreakdown total_loss(double recon, double kl, double curvature, double normal, double edge,
                         const LossWeights& weights, long long surface_voxels) {
  const struct {
    const char* name;
    double value;
  } components[] = {
      {"recon", recon}, {"kl", kl}, {"curvature", curvature}, {"normal", normal}, {"edge", edge}};
  for (const auto& c : components) {
    if (!std::isfinite(c.value)) {
      throw NumericError(std::string("non-finite loss component: ") + c.name + " = " +
                         format_double(c.value));
    }
  }
  LossBreakdown out;
  out.recon = recon;
  out.kl = kl;
  out.curvature = curvature;
  out.normal = normal;
  out.edge = edge;
  out.surface_voxels = surface_voxels;
  out.total = recon + weights.beta * kl + weights.lambda_curv * curvature +
              weights.lambda_normal * normal + weights.lambda_edge * edge;
  return out;
}

}  // namespace curvox
