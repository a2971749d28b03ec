#pragma once

#include <filesystem>

#include "curvox/grid.hpp"

namespace curvox {

// Grid file format VXG1: magic bytes "VXG1", one unsigned 32-bit
// little-endian N, then N^3 little-endian 32-bit floats in row-major
// (k fastest) order. Readers reject wrong magic, non-finite values, or
// values outside [-1e6, 1e6].
void write_vxg(const std::filesystem::path& path, const ScalarGrid& grid);
ScalarGrid read_vxg(const std::filesystem::path& path);

}  // namespace curvox
