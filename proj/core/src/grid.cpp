#include "curvox/grid.hpp"

#include <stdexcept>
#include <string>

#include "curvox/util.hpp"

namespace curvox {

namespace {

std::size_t cube(int n) {
  return static_cast<std::size_t>(n) * static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
}

}  // namespace

ScalarGrid::ScalarGrid(int n, double fill) : n_(n), values_(cube(n), fill) {
  if (n < 1) {
    throw std::invalid_argument("grid resolution must be positive, got " + std::to_string(n));
  }
}

ScalarGrid::ScalarGrid(int n, std::vector<double> values) : n_(n), values_(std::move(values)) {
  if (n < 1) {
    throw std::invalid_argument("grid resolution must be positive, got " + std::to_string(n));
  }
  if (values_.size() != cube(n)) {
    throw std::invalid_argument("grid value count " + std::to_string(values_.size()) +
                                " does not match n^3 for n=" + std::to_string(n));
  }
}

OccupancyGrid::OccupancyGrid(int n, double fill, double extent)
    : ScalarGrid(n, fill), extent_(extent) {
  if (n < 3) {
    throw std::invalid_argument("occupancy grid resolution must be >= 3, got " + std::to_string(n));
  }
  if (fill < 0.0 || fill > 1.0) {
    throw std::invalid_argument("occupancy fill value outside [0,1]: " + format_double(fill));
  }
}

OccupancyGrid::OccupancyGrid(int n, std::vector<double> values, double extent)
    : ScalarGrid(n, std::move(values)), extent_(extent) {
  if (n < 3) {
    throw std::invalid_argument("occupancy grid resolution must be >= 3, got " + std::to_string(n));
  }
  validate();
}

void OccupancyGrid::validate() const {
  for (double v : values_) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw std::invalid_argument("occupancy value outside [0,1]: " + format_double(v));
    }
  }
}

int BoolGrid::count() const {
  int c = 0;
  for (auto v : values_) c += v != 0;
  return c;
}

}  // namespace curvox
