#pragma once

#include <cstdint>
#include <vector>

#include "trauma/errors.hpp"
#include "trauma/rng.hpp"

namespace trauma {

// Dense 3D grid, C-order depth-major: index = (z * height + y) * width + x.
template <typename T>
struct Grid3 {
  std::int64_t depth = 0;
  std::int64_t height = 0;
  std::int64_t width = 0;
  std::vector<T> data;

  Grid3() = default;
  Grid3(std::int64_t d, std::int64_t h, std::int64_t w, T fill = T{})
      : depth(d), height(h), width(w),
        data(static_cast<std::size_t>(d * h * w), fill) {}

  std::int64_t size() const { return depth * height * width; }

  T& at(std::int64_t z, std::int64_t y, std::int64_t x) {
    return data[static_cast<std::size_t>((z * height + y) * width + x)];
  }
  T at(std::int64_t z, std::int64_t y, std::int64_t x) const {
    return data[static_cast<std::size_t>((z * height + y) * width + x)];
  }

  bool same_shape(const Grid3& o) const {
    return depth == o.depth && height == o.height && width == o.width;
  }
};

using Volume = Grid3<double>;
using MaskVolume = Grid3<std::uint8_t>;

// Inclusive voxel ranges on the three axes.
struct Box3 {
  std::int64_t z0 = 0, z1 = 0, y0 = 0, y1 = 0, x0 = 0, x1 = 0;

  std::int64_t depth() const { return z1 - z0 + 1; }
  std::int64_t height() const { return y1 - y0 + 1; }
  std::int64_t width() const { return x1 - x0 + 1; }
};

// Source index per destination index for nearest-index resampling of an axis
// of `src` samples down/up to `dst` samples. Endpoints map to endpoints; a
// single destination sample takes the middle source index.
inline std::vector<std::int64_t> nearest_indices(std::int64_t src,
                                                 std::int64_t dst) {
  if (src < 1 || dst < 1) throw contract_error("nearest_indices: empty axis");
  std::vector<std::int64_t> idx(static_cast<std::size_t>(dst));
  if (dst == 1) {
    idx[0] = round_index(static_cast<double>(src - 1) / 2.0);
    return idx;
  }
  for (std::int64_t i = 0; i < dst; ++i) {
    idx[static_cast<std::size_t>(i)] = round_index(
        static_cast<double>(i) * static_cast<double>(src - 1) /
        static_cast<double>(dst - 1));
  }
  return idx;
}

}  // namespace trauma
