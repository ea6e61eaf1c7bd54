#pragma once

#include <compare>
#include <cstdint>

#include <Eigen/Dense>

namespace wasabi {

// Per-pixel class ids, row-major. rows() = image height, cols() = width.
using LabelMap =
    Eigen::Matrix<std::int32_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Binary per-class mask, same layout as LabelMap.
using Mask =
    Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Integer pixel coordinate. Ordering is lexicographic (row, col), which is
// the row-major scan order used for every deterministic tie-break.
struct Pixel {
  int row = 0;
  int col = 0;

  friend auto operator<=>(const Pixel&, const Pixel&) = default;
};

}  // namespace wasabi
