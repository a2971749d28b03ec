#include "curvox/optim.hpp"

#include <cmath>
#include <stdexcept>

#include "curvox/util.hpp"

namespace curvox {

double cosine_lr(int t, int total_epochs, double lr0, double lr_final) {
  if (total_epochs <= 0) {
    throw std::invalid_argument("cosine_lr: total epochs must be positive");
  }
  if (t < 0 || t > total_epochs) {
    throw std::invalid_argument("cosine_lr: epoch out of [0, T]");
  }
  const double phase = 3.14159265358979323846 * static_cast<double>(t) / total_epochs;
  return lr_final + 0.5 * (lr0 - lr_final) * (1.0 + std::cos(phase));
}

double global_norm(const GradientVec& grads) {
  double sq = 0.0;
  for (const auto& g : grads) {
    for (double v : g) sq += v * v;
  }
  return std::sqrt(sq);
}

double clip_global_norm(GradientVec& grads, double max_norm) {
  const double norm = global_norm(grads);
  if (!std::isfinite(norm)) {
    throw NumericError("non-finite gradient norm: " + format_double(norm));
  }
  if (norm > max_norm) {
    const double s = max_norm / norm;
    for (auto& g : grads) {
      for (double& v : g) v *= s;
    }
  }
  return norm;
}

AdamState AdamState::zeros_like(const Parameters& params) {
  AdamState state;
  state.m.reserve(params.entries.size());
  state.v.reserve(params.entries.size());
  for (const auto& e : params.entries) {
    state.m.emplace_back(e.values->size(), 0.0);
    state.v.emplace_back(e.values->size(), 0.0);
  }
  return state;
}

void adam_step(Parameters& params, const GradientVec& grads, AdamState& state, double lr,
               const AdamConfig& config) {
  if (!(lr > 0.0)) {
    throw std::invalid_argument("adam_step: learning rate must be positive");
  }
  if (grads.size() != params.entries.size() || state.m.size() != params.entries.size()) {
    throw std::invalid_argument("adam_step: gradient/state layout mismatch");
  }
  state.step += 1;
  const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
  for (std::size_t e = 0; e < params.entries.size(); ++e) {
    auto& p = *params.entries[e].values;
    const auto& g = grads[e];
    auto& m = state.m[e];
    auto& v = state.v[e];
    if (g.size() != p.size()) {
      throw std::invalid_argument("adam_step: gradient size mismatch for " +
                                  params.entries[e].name);
    }
    for (std::size_t i = 0; i < p.size(); ++i) {
      double grad = g[i];
      if (!config.decoupled_weight_decay && config.weight_decay != 0.0) {
        grad += config.weight_decay * p[i];
      }
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * grad;
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * grad * grad;
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      p[i] -= lr * m_hat / (std::sqrt(v_hat) + config.epsilon);
      if (config.decoupled_weight_decay && config.weight_decay != 0.0) {
        p[i] -= lr * config.weight_decay * p[i];
      }
    }
  }
}

EarlyStopResult early_stop(std::span<const double> history, int patience) {
  if (history.empty()) {
    throw std::invalid_argument("early_stop: empty history");
  }
  if (patience < 1) {
    throw std::invalid_argument("early_stop: patience must be >= 1");
  }
  int best = 0;
  for (int i = 1; i < static_cast<int>(history.size()); ++i) {
    if (history[static_cast<std::size_t>(i)] < history[static_cast<std::size_t>(best)]) {
      best = i;
    }
  }
  const int last = static_cast<int>(history.size()) - 1;
  return {last - best >= patience, best};
}

}  // namespace curvox
