#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace curvox {

// N^3 scalar field, row-major with i outermost and k fastest.
class ScalarGrid {
 public:
  ScalarGrid() = default;
  explicit ScalarGrid(int n, double fill = 0.0);
  ScalarGrid(int n, std::vector<double> values);

  int n() const { return n_; }
  int size() const { return n_ * n_ * n_; }
  int index(int i, int j, int k) const { return (i * n_ + j) * n_ + k; }

  double at(int i, int j, int k) const { return values_[static_cast<std::size_t>(index(i, j, k))]; }
  double& at(int i, int j, int k) { return values_[static_cast<std::size_t>(index(i, j, k))]; }

  std::span<const double> values() const { return {values_.data(), values_.size()}; }
  std::vector<double>& mutable_values() { return values_; }
  std::vector<double> take_values() && { return std::move(values_); }

 protected:
  int n_ = 0;
  std::vector<double> values_;
};

// Occupancy field: values in [0,1], resolution >= 3 (the Laplacian needs an
// interior). Covers a cubic volume `extent` meters on a side.
class OccupancyGrid : public ScalarGrid {
 public:
  OccupancyGrid() = default;
  explicit OccupancyGrid(int n, double fill = 0.0, double extent = 3.0);
  OccupancyGrid(int n, std::vector<double> values, double extent = 3.0);

  double extent() const { return extent_; }
  double voxel_size() const { return extent_ / n_; }

  // Throws if any value leaves [0,1] (after direct mutation).
  void validate() const;

 private:
  double extent_ = 3.0;
};

// Discrete curvature / gradient values; sign unbounded.
class CurvatureField : public ScalarGrid {
 public:
  CurvatureField() = default;
  explicit CurvatureField(int n, double fill = 0.0) : ScalarGrid(n, fill) {}
  CurvatureField(int n, std::vector<double> values) : ScalarGrid(n, std::move(values)) {}
};

class BoolGrid {
 public:
  BoolGrid() = default;
  explicit BoolGrid(int n, bool fill = false)
      : n_(n), values_(static_cast<std::size_t>(n) * n * n, fill ? 1 : 0) {}

  int n() const { return n_; }
  int size() const { return n_ * n_ * n_; }
  int index(int i, int j, int k) const { return (i * n_ + j) * n_ + k; }

  bool get(int i, int j, int k) const { return values_[static_cast<std::size_t>(index(i, j, k))] != 0; }
  void set(int i, int j, int k, bool v) { values_[static_cast<std::size_t>(index(i, j, k))] = v ? 1 : 0; }
  bool get_flat(int idx) const { return values_[static_cast<std::size_t>(idx)] != 0; }
  void set_flat(int idx, bool v) { values_[static_cast<std::size_t>(idx)] = v ? 1 : 0; }

  int count() const;
  std::span<const std::uint8_t> raw() const { return {values_.data(), values_.size()}; }

 private:
  int n_ = 0;
  std::vector<std::uint8_t> values_;
};

}  // namespace curvox
