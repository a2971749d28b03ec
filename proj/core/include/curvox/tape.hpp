#pragma once

#include <functional>
#include <map>
#include <span>
#include <vector>

#include "curvox/tensor.hpp"

namespace curvox::ag {

class Tape;

// View handed to an op's backward rule. Gradients accumulate additively:
// rules must use `+=` into grad_in buffers.
class OpGrads {
 public:
  int input_count() const;
  std::span<const double> grad_out() const;
  std::span<const double> input(int i) const;
  std::span<const double> output() const;
  // Accumulation buffer for input i, or an empty span when that input was
  // detached (constant) and receives no gradient.
  std::span<double> grad_in(int i);

 private:
  friend class Tape;
  OpGrads(Tape* tape, int node_id, std::vector<std::vector<double>>* grads)
      : tape_(tape), node_id_(node_id), grads_(grads) {}
  Tape* tape_;
  int node_id_;
  std::vector<std::vector<double>>* grads_;
};

using BackwardFn = std::function<void(OpGrads&)>;

// Gradient of a scalar loss with respect to every leaf on the tape. Leaves
// with no path to the loss map to exact-zero tensors.
class GradientMap {
 public:
  const Tensor& at_node(int node_id) const;
  const Tensor& at(const Tensor& leaf) const { return at_node(leaf.node()); }
  bool contains(int node_id) const { return grads_.count(node_id) > 0; }
  std::size_t size() const { return grads_.size(); }

 private:
  friend class Tape;
  std::map<int, Tensor> grads_;
};

// Reverse-mode tape. Confined to one thread; operations append in
// topological order (inputs always precede their consumers), and backward
// sweeps the recorded list once in reverse.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Register a leaf (parameter or model input) whose gradient backward()
  // reports. Adopts the tensor's buffer (no copy).
  Tensor leaf(const Tensor& value);
  Tensor leaf(Shape shape, std::vector<double> values);

  // Record an op. Inputs may be attached (to this tape) or detached;
  // detached inputs are constants and receive no gradient.
  Tensor record(const char* name, std::vector<Tensor> inputs, Shape out_shape,
                std::vector<double> out_values, BackwardFn backward);

  // Gradient of a scalar loss on this tape with respect to all leaves.
  GradientMap backward(const Tensor& loss);

  int node_count() const { return static_cast<int>(nodes_.size()); }
  const std::vector<int>& leaf_ids() const { return leaf_ids_; }

 private:
  friend class OpGrads;
  struct Node {
    const char* name;
    std::vector<int> parents;  // -1 where the input was detached
    std::vector<Tensor> inputs;
    Tensor output;
    BackwardFn backward;  // null for leaves
  };
  std::vector<Node> nodes_;
  std::vector<int> leaf_ids_;
};

// ---- Forward ops -----------------------------------------------------
//
// Shapes must match exactly except for scalar-with-tensor broadcasting in
// the elementwise binary ops (one operand of size 1). Mixing tensors from
// two different tapes is rejected.

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
// Rejects non-positive denominator entries (clamp first if needed).
Tensor div(const Tensor& a, const Tensor& b);

// [m,k] x [k,n] -> [m,n]
Tensor matmul(const Tensor& a, const Tensor& b);
// x: [k] or [m,k]; w: [k,n]; bias: [n]
Tensor affine(const Tensor& x, const Tensor& w, const Tensor& bias);

Tensor sigmoid(const Tensor& x);
Tensor relu(const Tensor& x);
Tensor tanh(const Tensor& x);
// Input clamped above at 700 so the result stays finite.
Tensor exp(const Tensor& x);
// Rejects non-positive values.
Tensor log(const Tensor& x);
// Rejects negative values. The derivative at 0 is infinite; callers that
// must stay finite should clamp away from 0 first.
Tensor sqrt(const Tensor& x);
Tensor abs(const Tensor& x);
Tensor clamp(const Tensor& x, double lo, double hi);

Tensor sum(const Tensor& x);   // -> [1]
Tensor mean(const Tensor& x);  // -> [1]
Tensor scale(const Tensor& x, double c);

Tensor reshape(const Tensor& x, Shape shape);
Tensor slice(const Tensor& x, int axis, int start, int len);
Tensor concat(const Tensor& a, const Tensor& b, int axis);

}  // namespace curvox::ag
