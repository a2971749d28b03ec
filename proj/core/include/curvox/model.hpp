#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "curvox/rng.hpp"
#include "curvox/tape.hpp"

namespace curvox {

enum class Nonlinearity { kRelu, kTanh };

std::string to_string(Nonlinearity n);
Nonlinearity nonlinearity_from_string(const std::string& s);

struct ModelConfig {
  int grid_n = 16;
  int latent_dim = 32;
  std::vector<int> encoder_hidden = {256, 128};
  std::vector<int> decoder_hidden = {128, 256};
  Nonlinearity nonlinearity = Nonlinearity::kRelu;
  double logvar_min = -20.0;
  double logvar_max = 20.0;

  int voxel_count() const { return grid_n * grid_n * grid_n; }
  int observation_size() const { return 2 * voxel_count(); }
  void validate() const;
  long long parameter_count() const;
};

// Named parameter tensors in a fixed order (encoder, decoder trunk, then
// the two distinct output heads). Buffers are shared with the tape leaves
// during a step, so the optimizer updates them in place between steps.
struct Parameters {
  struct Entry {
    std::string name;
    ag::Shape shape;
    std::shared_ptr<std::vector<double>> values;
  };
  std::vector<Entry> entries;

  Entry& find(const std::string& name);
  const Entry& find(const std::string& name) const;
  long long scalar_count() const;
  Parameters clone() const;
};

// Xavier-uniform weights (+-sqrt(6/(fan_in+fan_out))), zero biases.
Parameters init_parameters(const ModelConfig& config, Rng& rng);

// One step's view of the model: parameters bound as leaves on `tape`, or
// used detached when tape is null (pure evaluation).
class Model {
 public:
  Model(const ModelConfig& config, const Parameters& params, ag::Tape* tape);

  // Observation enters as two flat N^3 channels: sparse occupancy evidence
  // and validity mask. Rejects NaN inputs. Returns (mu, logvar) with logvar
  // clamped to the configured bounds.
  std::pair<ag::Tensor, ag::Tensor> encode(const ag::Tensor& evidence,
                                           const ag::Tensor& mask) const;

  // z = mu + exp(logvar/2) * eps. eps is a detached standard-normal draw,
  // so gradients flow to mu and logvar only.
  ag::Tensor reparameterize(const ag::Tensor& mu, const ag::Tensor& logvar,
                            const ag::Tensor& eps) const;

  struct Decoded {
    ag::Tensor occupancy;  // sigmoid output in (0,1), shape [n,n,n]
    ag::Tensor curvature;  // linear head, shape [n,n,n]
  };
  Decoded decode(const ag::Tensor& z) const;

  const ag::Tensor& param(const std::string& name) const;
  const std::vector<std::pair<std::string, ag::Tensor>>& params() const { return leaves_; }
  const ModelConfig& config() const { return config_; }

 private:
  ModelConfig config_;
  std::vector<std::pair<std::string, ag::Tensor>> leaves_;
};

// Detached standard-normal vector for reparameterization.
ag::Tensor sample_standard_normal(Rng& rng, int dim);

}  // namespace curvox
