#include "curvox/vxg_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>

#include "curvox/util.hpp"

namespace curvox {

namespace {

void put_u32le(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xff));
}

std::uint32_t get_u32le(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

void write_vxg(const std::filesystem::path& path, const ScalarGrid& grid) {
  const auto n = static_cast<std::uint32_t>(grid.n());
  std::vector<std::uint8_t> buf;
  buf.reserve(8 + grid.values().size() * 4);
  buf.insert(buf.end(), {'V', 'X', 'G', '1'});
  put_u32le(buf, n);
  for (double v : grid.values()) {
    const auto f = static_cast<float>(v);
    put_u32le(buf, std::bit_cast<std::uint32_t>(f));
  }
  write_binary_file(path, buf.data(), buf.size());
}

ScalarGrid read_vxg(const std::filesystem::path& path) {
  const auto buf = read_binary_file(path);
  if (buf.size() < 8 || std::memcmp(buf.data(), "VXG1", 4) != 0) {
    throw IoError("not a VXG1 file: " + path.string());
  }
  const std::uint32_t n = get_u32le(buf.data() + 4);
  const std::size_t count = static_cast<std::size_t>(n) * n * n;
  if (buf.size() != 8 + 4 * count) {
    throw IoError("VXG1 size mismatch in " + path.string());
  }
  std::vector<double> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    const float f = std::bit_cast<float>(get_u32le(buf.data() + 8 + 4 * i));
    if (!std::isfinite(f) || f < -1e6f || f > 1e6f) {
      throw IoError("VXG1 value out of range in " + path.string());
    }
    values[i] = static_cast<double>(f);
  }
  return {static_cast<int>(n), std::move(values)};
}

}  // namespace curvox
