#include "curvox/tensor.hpp"

#include <sstream>
#include <stdexcept>

namespace curvox::ag {

int shape_size(const Shape& shape) {
  if (shape.size() > 5) {
    throw std::invalid_argument("tensor rank limited to 5 axes, got " + shape_str(shape));
  }
  long long n = 1;
  for (int d : shape) {
    if (d <= 0) {
      throw std::invalid_argument("non-positive extent in shape " + shape_str(shape));
    }
    n *= d;
  }
  return static_cast<int>(n);
}

std::string shape_str(const Shape& shape) {
  std::ostringstream ss;
  ss << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) ss << ",";
    ss << shape[i];
  }
  ss << "]";
  return ss.str();
}

bool same_shape(const Shape& a, const Shape& b) { return a == b; }

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)),
      values_(std::make_shared<std::vector<double>>(std::move(values))) {
  const int n = shape_size(shape_);
  if (n != static_cast<int>(values_->size())) {
    throw std::invalid_argument("value count " + std::to_string(values_->size()) +
                                " does not match shape " + shape_str(shape_));
  }
}

Tensor Tensor::zeros(Shape shape) {
  const int n = shape_size(shape);
  return Tensor(std::move(shape), std::vector<double>(static_cast<std::size_t>(n), 0.0));
}

Tensor Tensor::full(Shape shape, double value) {
  const int n = shape_size(shape);
  return Tensor(std::move(shape), std::vector<double>(static_cast<std::size_t>(n), value));
}

Tensor Tensor::scalar(double value) { return Tensor({1}, {value}); }

Tensor Tensor::from_buffer(Shape shape, std::shared_ptr<std::vector<double>> values) {
  if (!values) {
    throw std::invalid_argument("from_buffer: null buffer");
  }
  const int n = shape_size(shape);
  if (n != static_cast<int>(values->size())) {
    throw std::invalid_argument("value count " + std::to_string(values->size()) +
                                " does not match shape " + shape_str(shape));
  }
  Tensor t;
  t.shape_ = std::move(shape);
  t.values_ = std::move(values);
  return t;
}

double Tensor::scalar_value() const {
  if (size() != 1) {
    throw std::invalid_argument("scalar_value() on tensor of shape " + shape_str(shape_));
  }
  return (*values_)[0];
}

Tensor Tensor::detached() const {
  Tensor t;
  t.shape_ = shape_;
  t.values_ = values_;
  return t;
}

}  // namespace curvox::ag
