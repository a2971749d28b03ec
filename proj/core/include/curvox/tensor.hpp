#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace curvox::ag {

class Tape;

// Up to 5 axes, row-major, last axis fastest.
using Shape = std::vector<int>;

int shape_size(const Shape& shape);
std::string shape_str(const Shape& shape);
bool same_shape(const Shape& a, const Shape& b);

// Dense 64-bit float tensor. Value buffers are shared between copies; a
// tensor produced by an op is never mutated afterwards. A tensor attached
// to a tape carries the recording tape and its node id; a detached tensor
// has no node id.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> values);

  static Tensor zeros(Shape shape);
  static Tensor full(Shape shape, double value);
  static Tensor scalar(double value);
  // Adopts an existing buffer without copying. The caller must not mutate
  // the buffer while any tape recorded against it is still in use.
  static Tensor from_buffer(Shape shape, std::shared_ptr<std::vector<double>> values);

  const Shape& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int size() const { return static_cast<int>(values_ ? values_->size() : 0); }
  bool defined() const { return values_ != nullptr; }

  std::span<const double> values() const { return {values_->data(), values_->size()}; }
  const double* data() const { return values_->data(); }
  double* mutable_data() { return values_->data(); }
  const std::shared_ptr<std::vector<double>>& buffer() const { return values_; }

  double at(int i) const { return (*values_)[static_cast<std::size_t>(i)]; }
  // Requires size() == 1.
  double scalar_value() const;

  bool attached() const { return node_ >= 0; }
  int node() const { return node_; }
  Tape* tape() const { return tape_; }

  // Same buffer, no tape association.
  Tensor detached() const;

 private:
  friend class Tape;
  Shape shape_;
  std::shared_ptr<std::vector<double>> values_;
  Tape* tape_ = nullptr;
  int node_ = -1;
};

}  // namespace curvox::ag
