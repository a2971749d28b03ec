#include "curvox/model.hpp"

#include <cmath>
#include <stdexcept>

#include "curvox/util.hpp"

namespace curvox {

std::string to_string(Nonlinearity n) {
  return n == Nonlinearity::kRelu ? "relu" : "tanh";
}

Nonlinearity nonlinearity_from_string(const std::string& s) {
  if (s == "relu") return Nonlinearity::kRelu;
  if (s == "tanh") return Nonlinearity::kTanh;
  throw ConfigError("unknown nonlinearity: " + s);
}

void ModelConfig::validate() const {
  if (grid_n < 3) {
    throw ConfigError("model grid_n must be >= 3");
  }
  if (latent_dim < 2) {
    throw ConfigError("latent_dim must be >= 2");
  }
  for (int w : encoder_hidden) {
    if (w < 1) throw ConfigError("encoder hidden widths must be >= 1");
  }
  for (int w : decoder_hidden) {
    if (w < 1) throw ConfigError("decoder hidden widths must be >= 1");
  }
  if (!(logvar_min < logvar_max)) {
    throw ConfigError("logvar bounds must satisfy min < max");
  }
}

namespace {

struct LayerSpec {
  std::string name;
  int fan_in;
  int fan_out;
};

std::vector<LayerSpec> layer_specs(const ModelConfig& c) {
  std::vector<LayerSpec> specs;
  int in = c.observation_size();
  for (std::size_t i = 0; i < c.encoder_hidden.size(); ++i) {
    specs.push_back({"enc" + std::to_string(i), in, c.encoder_hidden[i]});
    in = c.encoder_hidden[i];
  }
  specs.push_back({"enc_gauss", in, 2 * c.latent_dim});
  in = c.latent_dim;
  for (std::size_t i = 0; i < c.decoder_hidden.size(); ++i) {
    specs.push_back({"dec" + std::to_string(i), in, c.decoder_hidden[i]});
    in = c.decoder_hidden[i];
  }
  specs.push_back({"occ_head", in, c.voxel_count()});
  specs.push_back({"curv_head", in, c.voxel_count()});
  return specs;
}

}  // namespace

long long ModelConfig::parameter_count() const {
  long long count = 0;
  for (const auto& s : layer_specs(*this)) {
    count += static_cast<long long>(s.fan_in) * s.fan_out + s.fan_out;
  }
  return count;
}

Parameters::Entry& Parameters::find(const std::string& name) {
  for (auto& e : entries) {
    if (e.name == name) return e;
  }
  throw std::invalid_argument("no parameter named " + name);
}

const Parameters::Entry& Parameters::find(const std::string& name) const {
  for (const auto& e : entries) {
    if (e.name == name) return e;
  }
  throw std::invalid_argument("no parameter named " + name);
}

long long Parameters::scalar_count() const {
  long long count = 0;
  for (const auto& e : entries) count += static_cast<long long>(e.values->size());
  return count;
}

Parameters Parameters::clone() const {
  Parameters out;
  out.entries.reserve(entries.size());
  for (const auto& e : entries) {
    out.entries.push_back({e.name, e.shape, std::make_shared<std::vector<double>>(*e.values)});
  }
  return out;
}

Parameters init_parameters(const ModelConfig& config, Rng& rng) {
  config.validate();
  Parameters params;
  for (const auto& s : layer_specs(config)) {
    const double bound = std::sqrt(6.0 / (s.fan_in + s.fan_out));
    auto w = std::make_shared<std::vector<double>>(
        static_cast<std::size_t>(s.fan_in) * static_cast<std::size_t>(s.fan_out));
    for (double& v : *w) v = rng.uniform(-bound, bound);
    params.entries.push_back({s.name + ".w", {s.fan_in, s.fan_out}, std::move(w)});
    auto b = std::make_shared<std::vector<double>>(static_cast<std::size_t>(s.fan_out), 0.0);
    params.entries.push_back({s.name + ".b", {s.fan_out}, std::move(b)});
  }
  return params;
}

Model::Model(const ModelConfig& config, const Parameters& params, ag::Tape* tape)
    : config_(config) {
  config_.validate();
  leaves_.reserve(params.entries.size());
  for (const auto& e : params.entries) {
    // Leaves share the parameter buffers; the optimizer mutates them only
    // between steps, after the step's tape is dropped.
    ag::Tensor value = ag::Tensor::from_buffer(e.shape, e.values);
    if (tape != nullptr) {
      leaves_.emplace_back(e.name, tape->leaf(value));
    } else {
      leaves_.emplace_back(e.name, value);
    }
  }
}

const ag::Tensor& Model::param(const std::string& name) const {
  for (const auto& [n, t] : leaves_) {
    if (n == name) return t;
  }
  throw std::invalid_argument("no parameter named " + name);
}

namespace {

ag::Tensor apply_nonlinearity(const ag::Tensor& x, Nonlinearity n) {
  return n == Nonlinearity::kRelu ? ag::relu(x) : ag::tanh(x);
}

void reject_nan(const ag::Tensor& t, const char* what) {
  for (int i = 0; i < t.size(); ++i) {
    if (std::isnan(t.at(i))) {
      throw std::invalid_argument(std::string("NaN in ") + what);
    }
  }
}

}  // namespace

std::pair<ag::Tensor, ag::Tensor> Model::encode(const ag::Tensor& evidence,
                                                const ag::Tensor& mask) const {
  const int v = config_.voxel_count();
  if (evidence.size() != v || mask.size() != v) {
    throw std::invalid_argument("encode: observation channels must have n^3 elements");
  }
  reject_nan(evidence, "evidence channel");
  reject_nan(mask, "mask channel");
  ag::Tensor h = ag::concat(ag::reshape(evidence, {v}), ag::reshape(mask, {v}), 0);
  for (std::size_t i = 0; i < config_.encoder_hidden.size(); ++i) {
    const std::string name = "enc" + std::to_string(i);
    h = apply_nonlinearity(ag::affine(h, param(name + ".w"), param(name + ".b")),
                           config_.nonlinearity);
  }
  ag::Tensor gauss = ag::affine(h, param("enc_gauss.w"), param("enc_gauss.b"));
  ag::Tensor mu = ag::slice(gauss, 0, 0, config_.latent_dim);
  ag::Tensor logvar = ag::clamp(ag::slice(gauss, 0, config_.latent_dim, config_.latent_dim),
                                config_.logvar_min, config_.logvar_max);
  return {mu, logvar};
}

ag::Tensor Model::reparameterize(const ag::Tensor& mu, const ag::Tensor& logvar,
                                 const ag::Tensor& eps) const {
  if (!ag::same_shape(mu.shape(), logvar.shape()) || !ag::same_shape(mu.shape(), eps.shape())) {
    throw std::invalid_argument("reparameterize: mu, logvar and eps shapes must match");
  }
  ag::Tensor std_dev = ag::exp(ag::scale(logvar, 0.5));
  return ag::add(mu, ag::mul(std_dev, eps.detached()));
}

Model::Decoded Model::decode(const ag::Tensor& z) const {
  if (z.size() != config_.latent_dim) {
    throw std::invalid_argument("decode: z must have latent_dim elements");
  }
  ag::Tensor h = z;
  for (std::size_t i = 0; i < config_.decoder_hidden.size(); ++i) {
    const std::string name = "dec" + std::to_string(i);
    h = apply_nonlinearity(ag::affine(h, param(name + ".w"), param(name + ".b")),
                           config_.nonlinearity);
  }
  const int n = config_.grid_n;
  ag::Tensor occ =
      ag::reshape(ag::sigmoid(ag::affine(h, param("occ_head.w"), param("occ_head.b"))), {n, n, n});
  ag::Tensor curv =
      ag::reshape(ag::affine(h, param("curv_head.w"), param("curv_head.b")), {n, n, n});
  return {occ, curv};
}

ag::Tensor sample_standard_normal(Rng& rng, int dim) {
  std::vector<double> values(static_cast<std::size_t>(dim));
  for (double& v : values) v = rng.normal();
  return ag::Tensor({dim}, std::move(values));
}

}  // namespace curvox
