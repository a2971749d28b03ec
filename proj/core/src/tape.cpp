#include "curvox/tape.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "curvox/util.hpp"

namespace curvox::ag {

namespace {

[[noreturn]] void shape_error(const char* op, const Shape& a, const Shape& b) {
  throw std::invalid_argument(std::string(op) + ": shape mismatch " + shape_str(a) +
                              " vs " + shape_str(b));
}

// The single tape all attached inputs agree on, or null when every input is
// detached (pure evaluation, nothing recorded).
Tape* common_tape(std::initializer_list<const Tensor*> inputs) {
  Tape* tape = nullptr;
  for (const Tensor* t : inputs) {
    if (!t->attached()) continue;
    if (tape == nullptr) {
      tape = t->tape();
    } else if (tape != t->tape()) {
      throw std::invalid_argument("operands recorded on different tapes");
    }
  }
  return tape;
}

Tensor finish(const char* name, Tape* tape, std::vector<Tensor> inputs, Shape out_shape,
              std::vector<double> out_values, BackwardFn backward) {
  if (tape == nullptr) {
    return Tensor(std::move(out_shape), std::move(out_values));
  }
  return tape->record(name, std::move(inputs), std::move(out_shape), std::move(out_values),
                      std::move(backward));
}

Tensor unary_op(const char* name, const Tensor& x, double (*f)(double),
                double (*dydx)(double x, double y)) {
  Tape* tape = common_tape({&x});
  const int n = x.size();
  std::vector<double> out(static_cast<std::size_t>(n));
  const double* xv = x.data();
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = f(xv[i]);
  return finish(name, tape, {x}, x.shape(), std::move(out), [dydx](OpGrads& g) {
    auto gi = g.grad_in(0);
    if (gi.empty()) return;
    auto go = g.grad_out();
    auto in = g.input(0);
    auto y = g.output();
    for (std::size_t i = 0; i < go.size(); ++i) gi[i] += go[i] * dydx(in[i], y[i]);
  });
}

// Elementwise binary op with scalar-with-tensor broadcasting: either side
// may have size 1, in which case it is applied against every element of the
// other; the scalar side's gradient accumulates over all positions.
Tensor binary_op(const char* name, const Tensor& a, const Tensor& b, double (*f)(double, double),
                 void (*df)(double g, double av, double bv, double* da, double* db)) {
  const bool a_scalar = a.size() == 1;
  const bool b_scalar = b.size() == 1;
  if (!a_scalar && !b_scalar && !same_shape(a.shape(), b.shape())) {
    shape_error(name, a.shape(), b.shape());
  }
  Tape* tape = common_tape({&a, &b});
  const Shape& out_shape = a_scalar && !b_scalar ? b.shape() : a.shape();
  const int n = shape_size(out_shape);
  std::vector<double> out(static_cast<std::size_t>(n));
  const double* av = a.data();
  const double* bv = b.data();
  for (int i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = f(av[a_scalar ? 0 : i], bv[b_scalar ? 0 : i]);
  }
  return finish(name, tape, {a, b}, out_shape, std::move(out),
                [f, df, a_scalar, b_scalar](OpGrads& g) {
                  auto ga = g.grad_in(0);
                  auto gb = g.grad_in(1);
                  auto go = g.grad_out();
                  auto av2 = g.input(0);
                  auto bv2 = g.input(1);
                  for (std::size_t i = 0; i < go.size(); ++i) {
                    double da = 0.0, db = 0.0;
                    df(go[i], av2[a_scalar ? 0 : i], bv2[b_scalar ? 0 : i], &da, &db);
                    if (!ga.empty()) ga[a_scalar ? 0 : i] += da;
                    if (!gb.empty()) gb[b_scalar ? 0 : i] += db;
                  }
                });
}

}  // namespace

// ---- OpGrads ----------------------------------------------------------

int OpGrads::input_count() const {
  return static_cast<int>(tape_->nodes_[static_cast<std::size_t>(node_id_)].inputs.size());
}

std::span<const double> OpGrads::grad_out() const {
  const auto& g = (*grads_)[static_cast<std::size_t>(node_id_)];
  return {g.data(), g.size()};
}

std::span<const double> OpGrads::input(int i) const {
  return tape_->nodes_[static_cast<std::size_t>(node_id_)].inputs[static_cast<std::size_t>(i)]
      .values();
}

std::span<const double> OpGrads::output() const {
  return tape_->nodes_[static_cast<std::size_t>(node_id_)].output.values();
}

std::span<double> OpGrads::grad_in(int i) {
  const auto& node = tape_->nodes_[static_cast<std::size_t>(node_id_)];
  const int pid = node.parents[static_cast<std::size_t>(i)];
  if (pid < 0) return {};
  auto& buf = (*grads_)[static_cast<std::size_t>(pid)];
  if (buf.empty()) {
    buf.assign(static_cast<std::size_t>(node.inputs[static_cast<std::size_t>(i)].size()), 0.0);
  }
  return {buf.data(), buf.size()};
}

// ---- GradientMap --------------------------------------------------------

const Tensor& GradientMap::at_node(int node_id) const {
  auto it = grads_.find(node_id);
  if (it == grads_.end()) {
    throw std::invalid_argument("no gradient recorded for node " + std::to_string(node_id) +
                                " (not a leaf of this tape?)");
  }
  return it->second;
}

// ---- Tape ---------------------------------------------------------------

Tensor Tape::leaf(const Tensor& value) {
  if (value.attached()) {
    throw std::invalid_argument("leaf() requires a detached tensor");
  }
  Tensor t = value.detached();
  t.tape_ = this;
  t.node_ = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{"leaf", {}, {}, t, nullptr});
  leaf_ids_.push_back(t.node_);
  return t;
}

Tensor Tape::leaf(Shape shape, std::vector<double> values) {
  return leaf(Tensor(std::move(shape), std::move(values)));
}

Tensor Tape::record(const char* name, std::vector<Tensor> inputs, Shape out_shape,
                    std::vector<double> out_values, BackwardFn backward) {
  std::vector<int> parents;
  parents.reserve(inputs.size());
  for (const Tensor& in : inputs) {
    if (in.attached() && in.tape() != this) {
      throw std::invalid_argument("input recorded on a different tape");
    }
    parents.push_back(in.attached() ? in.node() : -1);
  }
  Tensor out(std::move(out_shape), std::move(out_values));
  out.tape_ = this;
  out.node_ = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{name, std::move(parents), std::move(inputs), out, std::move(backward)});
  return out;
}

GradientMap Tape::backward(const Tensor& loss) {
  if (!loss.attached() || loss.tape() != this) {
    throw std::invalid_argument("backward: loss is not recorded on this tape");
  }
  if (loss.size() != 1) {
    throw std::invalid_argument("backward: loss must be scalar, got shape " +
                                shape_str(loss.shape()));
  }
  std::vector<std::vector<double>> grads(nodes_.size());
  grads[static_cast<std::size_t>(loss.node())] = {1.0};
  for (int id = loss.node(); id >= 0; --id) {
    auto& node = nodes_[static_cast<std::size_t>(id)];
    if (grads[static_cast<std::size_t>(id)].empty() || !node.backward) continue;
    OpGrads ctx(this, id, &grads);
    node.backward(ctx);
  }
  GradientMap result;
  for (int id : leaf_ids_) {
    auto& buf = grads[static_cast<std::size_t>(id)];
    const Tensor& value = nodes_[static_cast<std::size_t>(id)].output;
    if (buf.empty()) {
      result.grads_.emplace(id, Tensor::zeros(value.shape()));
    } else {
      result.grads_.emplace(id, Tensor(value.shape(), std::move(buf)));
    }
  }
  return result;
}

// ---- Elementwise ops ------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b) {
  return binary_op(
      "add", a, b, [](double x, double y) { return x + y; },
      [](double g, double, double, double* da, double* db) {
        *da = g;
        *db = g;
      });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary_op(
      "sub", a, b, [](double x, double y) { return x - y; },
      [](double g, double, double, double* da, double* db) {
        *da = g;
        *db = -g;
      });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary_op(
      "mul", a, b, [](double x, double y) { return x * y; },
      [](double g, double x, double y, double* da, double* db) {
        *da = g * y;
        *db = g * x;
      });
}

Tensor div(const Tensor& a, const Tensor& b) {
  const double* bv = b.data();
  for (int i = 0; i < b.size(); ++i) {
    if (!(bv[i] > 0.0)) {
      throw curvox::NumericError("div: non-positive denominator " +
                                 curvox::format_double(bv[i]) + " at index " + std::to_string(i) +
                                 " (clamp inputs first)");
    }
  }
  return binary_op(
      "div", a, b, [](double x, double y) { return x / y; },
      [](double g, double x, double y, double* da, double* db) {
        *da = g / y;
        *db = -g * x / (y * y);
      });
}

Tensor sigmoid(const Tensor& x) {
  return unary_op(
      "sigmoid", x,
      [](double v) {
        if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor relu(const Tensor& x) {
  return unary_op(
      "relu", x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor tanh(const Tensor& x) {
  return unary_op(
      "tanh", x, [](double v) { return std::tanh(v); },
      [](double, double y) { return 1.0 - y * y; });
}

Tensor exp(const Tensor& x) {
  return unary_op(
      "exp", x, [](double v) { return std::exp(v > 700.0 ? 700.0 : v); },
      [](double v, double y) { return v > 700.0 ? 0.0 : y; });
}

Tensor log(const Tensor& x) {
  const double* xv = x.data();
  for (int i = 0; i < x.size(); ++i) {
    if (!(xv[i] > 0.0)) {
      throw curvox::NumericError("log: non-positive input " + curvox::format_double(xv[i]) +
                                 " at index " + std::to_string(i) + " (clamp inputs first)");
    }
  }
  return unary_op(
      "log", x, [](double v) { return std::log(v); },
      [](double v, double) { return 1.0 / v; });
}

Tensor sqrt(const Tensor& x) {
  const double* xv = x.data();
  for (int i = 0; i < x.size(); ++i) {
    if (xv[i] < 0.0) {
      throw curvox::NumericError("sqrt: negative input " + curvox::format_double(xv[i]) +
                                 " at index " + std::to_string(i));
    }
  }
  return unary_op(
      "sqrt", x, [](double v) { return std::sqrt(v); },
      [](double, double y) { return 0.5 / y; });
}

Tensor abs(const Tensor& x) {
  return unary_op(
      "abs", x, [](double v) { return std::fabs(v); },
      [](double v, double) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
}

Tensor clamp(const Tensor& x, double lo, double hi) {
  if (!(lo < hi)) {
    throw std::invalid_argument("clamp: lo must be < hi");
  }
  Tape* tape = common_tape({&x});
  const int n = x.size();
  std::vector<double> out(static_cast<std::size_t>(n));
  const double* xv = x.data();
  for (int i = 0; i < n; ++i) {
    const double v = xv[i];
    out[static_cast<std::size_t>(i)] = v < lo ? lo : (v > hi ? hi : v);
  }
  return finish("clamp", tape, {x}, x.shape(), std::move(out), [lo, hi](OpGrads& g) {
    auto gi = g.grad_in(0);
    if (gi.empty()) return;
    auto go = g.grad_out();
    auto in = g.input(0);
    for (std::size_t i = 0; i < go.size(); ++i) {
      if (in[i] > lo && in[i] < hi) gi[i] += go[i];
    }
  });
}

Tensor scale(const Tensor& x, double c) {
  if (!std::isfinite(c)) {
    throw std::invalid_argument("scale: non-finite constant");
  }
  Tape* tape = common_tape({&x});
  const int n = x.size();
  std::vector<double> out(static_cast<std::size_t>(n));
  const double* xv = x.data();
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = c * xv[i];
  return finish("scale", tape, {x}, x.shape(), std::move(out), [c](OpGrads& g) {
    auto gi = g.grad_in(0);
    if (gi.empty()) return;
    auto go = g.grad_out();
    for (std::size_t i = 0; i < go.size(); ++i) gi[i] += c * go[i];
  });
}

// ---- Matrix ops -----------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.shape()[1] != b.shape()[0]) {
    shape_error("matmul", a.shape(), b.shape());
  }
  const int m = a.shape()[0];
  const int k = a.shape()[1];
  const int n = b.shape()[1];
  Tape* tape = common_tape({&a, &b});
  std::vector<double> out(static_cast<std::size_t>(m) * static_cast<std::size_t>(n), 0.0);
  const double* av = a.data();
  const double* bv = b.data();
  for (int i = 0; i < m; ++i) {
    for (int p = 0; p < k; ++p) {
      const double x = av[i * k + p];
      const double* brow = bv + p * n;
      double* orow = out.data() + i * n;
      for (int j = 0; j < n; ++j) orow[j] += x * brow[j];
    }
  }
  return finish("matmul", tape, {a, b}, {m, n}, std::move(out), [m, k, n](OpGrads& g) {
    auto ga = g.grad_in(0);
    auto gb = g.grad_in(1);
    auto go = g.grad_out();
    auto av2 = g.input(0);
    auto bv2 = g.input(1);
    if (!ga.empty()) {
      // dA = G * B^T
      for (int i = 0; i < m; ++i) {
        for (int p = 0; p < k; ++p) {
          double acc = 0.0;
          const double* grow = go.data() + i * n;
          const double* brow = bv2.data() + p * n;
          for (int j = 0; j < n; ++j) acc += grow[j] * brow[j];
          ga[static_cast<std::size_t>(i * k + p)] += acc;
        }
      }
    }
    if (!gb.empty()) {
      // dB = A^T * G
      for (int i = 0; i < m; ++i) {
        for (int p = 0; p < k; ++p) {
          const double x = av2[static_cast<std::size_t>(i * k + p)];
          const double* grow = go.data() + i * n;
          double* brow = gb.data() + p * n;
          for (int j = 0; j < n; ++j) brow[j] += x * grow[j];
        }
      }
    }
  });
}

Tensor affine(const Tensor& x, const Tensor& w, const Tensor& bias) {
  if (w.rank() != 2) {
    throw std::invalid_argument("affine: weight must be rank 2, got " + shape_str(w.shape()));
  }
  const int k = w.shape()[0];
  const int n = w.shape()[1];
  const bool vector_input = x.rank() == 1;
  if ((vector_input && x.shape()[0] != k) || (!vector_input && (x.rank() != 2 || x.shape()[1] != k))) {
    shape_error("affine", x.shape(), w.shape());
  }
  if (bias.rank() != 1 || bias.shape()[0] != n) {
    shape_error("affine", bias.shape(), Shape{n});
  }
  const int m = vector_input ? 1 : x.shape()[0];
  Tape* tape = common_tape({&x, &w, &bias});
  std::vector<double> out(static_cast<std::size_t>(m) * static_cast<std::size_t>(n));
  const double* xv = x.data();
  const double* wv = w.data();
  const double* bv = bias.data();
  for (int i = 0; i < m; ++i) {
    double* orow = out.data() + i * n;
    for (int j = 0; j < n; ++j) orow[j] = bv[j];
    for (int p = 0; p < k; ++p) {
      const double v = xv[i * k + p];
      const double* wrow = wv + p * n;
      for (int j = 0; j < n; ++j) orow[j] += v * wrow[j];
    }
  }
  Shape out_shape = vector_input ? Shape{n} : Shape{m, n};
  return finish("affine", tape, {x, w, bias}, std::move(out_shape), std::move(out),
                [m, k, n](OpGrads& g) {
                  auto gx = g.grad_in(0);
                  auto gw = g.grad_in(1);
                  auto gb = g.grad_in(2);
                  auto go = g.grad_out();
                  auto xv2 = g.input(0);
                  auto wv2 = g.input(1);
                  if (!gx.empty()) {
                    for (int i = 0; i < m; ++i) {
                      const double* grow = go.data() + i * n;
                      for (int p = 0; p < k; ++p) {
                        double acc = 0.0;
                        const double* wrow = wv2.data() + p * n;
                        for (int j = 0; j < n; ++j) acc += grow[j] * wrow[j];
                        gx[static_cast<std::size_t>(i * k + p)] += acc;
                      }
                    }
                  }
                  if (!gw.empty()) {
                    for (int i = 0; i < m; ++i) {
                      const double* grow = go.data() + i * n;
                      for (int p = 0; p < k; ++p) {
                        const double v = xv2[static_cast<std::size_t>(i * k + p)];
                        double* wrow = gw.data() + p * n;
                        for (int j = 0; j < n; ++j) wrow[j] += v * grow[j];
                      }
                    }
                  }
                  if (!gb.empty()) {
                    for (int i = 0; i < m; ++i) {
                      const double* grow = go.data() + i * n;
                      for (int j = 0; j < n; ++j) gb[static_cast<std::size_t>(j)] += grow[j];
                    }
                  }
                });
}

// ---- Reductions and views ---------------------------------------------------

Tensor sum(const Tensor& x) {
  Tape* tape = common_tape({&x});
  double acc = 0.0;
  const double* xv = x.data();
  for (int i = 0; i < x.size(); ++i) acc += xv[i];
  return finish("sum", tape, {x}, {1}, {acc}, [](OpGrads& g) {
    auto gi = g.grad_in(0);
    if (gi.empty()) return;
    const double go = g.grad_out()[0];
    for (std::size_t i = 0; i < gi.size(); ++i) gi[i] += go;
  });
}

Tensor mean(const Tensor& x) {
  Tape* tape = common_tape({&x});
  double acc = 0.0;
  const double* xv = x.data();
  const int n = x.size();
  for (int i = 0; i < n; ++i) acc += xv[i];
  return finish("mean", tape, {x}, {1}, {acc / n}, [n](OpGrads& g) {
    auto gi = g.grad_in(0);
    if (gi.empty()) return;
    const double go = g.grad_out()[0] / n;
    for (std::size_t i = 0; i < gi.size(); ++i) gi[i] += go;
  });
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_size(shape) != x.size()) {
    shape_error("reshape", x.shape(), shape);
  }
  Tape* tape = common_tape({&x});
  std::vector<double> out(x.values().begin(), x.values().end());
  return finish("reshape", tape, {x}, std::move(shape), std::move(out), [](OpGrads& g) {
    auto gi = g.grad_in(0);
    if (gi.empty()) return;
    auto go = g.grad_out();
    for (std::size_t i = 0; i < go.size(); ++i) gi[i] += go[i];
  });
}

namespace {

void slice_extents(const Shape& shape, int axis, int* outer, int* inner) {
  *outer = 1;
  *inner = 1;
  for (int d = 0; d < axis; ++d) *outer *= shape[static_cast<std::size_t>(d)];
  for (int d = axis + 1; d < static_cast<int>(shape.size()); ++d) {
    *inner *= shape[static_cast<std::size_t>(d)];
  }
}

}  // namespace

Tensor slice(const Tensor& x, int axis, int start, int len) {
  if (axis < 0 || axis >= x.rank()) {
    throw std::invalid_argument("slice: axis " + std::to_string(axis) + " out of range for " +
                                shape_str(x.shape()));
  }
  const int extent = x.shape()[static_cast<std::size_t>(axis)];
  if (start < 0 || len <= 0 || start + len > extent) {
    throw std::invalid_argument("slice: range [" + std::to_string(start) + "," +
                                std::to_string(start + len) + ") out of bounds for extent " +
                                std::to_string(extent));
  }
  int outer = 1, inner = 1;
  slice_extents(x.shape(), axis, &outer, &inner);
  Tape* tape = common_tape({&x});
  std::vector<double> out(static_cast<std::size_t>(outer) * len * inner);
  const double* xv = x.data();
  for (int o = 0; o < outer; ++o) {
    const double* src = xv + (static_cast<std::size_t>(o) * extent + start) * inner;
    double* dst = out.data() + static_cast<std::size_t>(o) * len * inner;
    for (int i = 0; i < len * inner; ++i) dst[i] = src[i];
  }
  Shape out_shape = x.shape();
  out_shape[static_cast<std::size_t>(axis)] = len;
  return finish("slice", tape, {x}, std::move(out_shape), std::move(out),
                [outer, inner, extent, start, len](OpGrads& g) {
                  auto gi = g.grad_in(0);
                  if (gi.empty()) return;
                  auto go = g.grad_out();
                  for (int o = 0; o < outer; ++o) {
                    double* dst = gi.data() + (static_cast<std::size_t>(o) * extent + start) * inner;
                    const double* src = go.data() + static_cast<std::size_t>(o) * len * inner;
                    for (int i = 0; i < len * inner; ++i) dst[i] += src[i];
                  }
                });
}

Tensor concat(const Tensor& a, const Tensor& b, int axis) {
  if (a.rank() != b.rank() || axis < 0 || axis >= a.rank()) {
    shape_error("concat", a.shape(), b.shape());
  }
  for (int d = 0; d < a.rank(); ++d) {
    if (d != axis && a.shape()[static_cast<std::size_t>(d)] != b.shape()[static_cast<std::size_t>(d)]) {
      shape_error("concat", a.shape(), b.shape());
    }
  }
  const int ma = a.shape()[static_cast<std::size_t>(axis)];
  const int mb = b.shape()[static_cast<std::size_t>(axis)];
  int outer = 1, inner = 1;
  slice_extents(a.shape(), axis, &outer, &inner);
  Tape* tape = common_tape({&a, &b});
  std::vector<double> out(static_cast<std::size_t>(outer) * (ma + mb) * inner);
  const double* av = a.data();
  const double* bv = b.data();
  for (int o = 0; o < outer; ++o) {
    double* dst = out.data() + static_cast<std::size_t>(o) * (ma + mb) * inner;
    const double* sa = av + static_cast<std::size_t>(o) * ma * inner;
    const double* sb = bv + static_cast<std::size_t>(o) * mb * inner;
    for (int i = 0; i < ma * inner; ++i) dst[i] = sa[i];
    for (int i = 0; i < mb * inner; ++i) dst[ma * inner + i] = sb[i];
  }
  Shape out_shape = a.shape();
  out_shape[static_cast<std::size_t>(axis)] = ma + mb;
  return finish("concat", tape, {a, b}, std::move(out_shape), std::move(out),
                [outer, inner, ma, mb](OpGrads& g) {
                  auto ga = g.grad_in(0);
                  auto gb = g.grad_in(1);
                  auto go = g.grad_out();
                  for (int o = 0; o < outer; ++o) {
                    const double* src = go.data() + static_cast<std::size_t>(o) * (ma + mb) * inner;
                    if (!ga.empty()) {
                      double* dst = ga.data() + static_cast<std::size_t>(o) * ma * inner;
                      for (int i = 0; i < ma * inner; ++i) dst[i] += src[i];
                    }
                    if (!gb.empty()) {
                      double* dst = gb.data() + static_cast<std::size_t>(o) * mb * inner;
                      for (int i = 0; i < mb * inner; ++i) dst[i] += src[ma * inner + i];
                    }
                  }
                });
}

}  // namespace curvox::ag
