// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "led/tensor.hpp"

namespace led {

/// File-system failures (open/read/write) across the IO layer. Processes map
/// these to exit code 3.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PgmImage {
  Index rows = 0, cols = 0;
  std::vector<std::uint8_t> pixels;  // row-major

  std::uint8_t at(Index r, Index c) const {
    return pixels[static_cast<std::size_t>(r * cols + c)];
  }
};

/// Binary portable graymap (P5, maxval 255). `values` is row-major
/// [rows * cols], mapped linearly from [0, max(values)] to [0, 255]; a
/// non-positive maximum writes an all-black image.
void write_pgm(const std::string& path, const Eigen::ArrayXd& values, Index rows, Index cols);

/// Reference P5 reader (maxval must be 255); used to round-trip emitted files.
PgmImage read_pgm(const std::string& path);

/// Renders `density` over the box [lo0,hi0] x [lo1,hi1] at `res` x `res` cell
/// centers and writes a P5 graymap. Row 0 is the top of the box (greatest
/// dim-1 coordinate); column 0 the least dim-0 coordinate. The callback maps
/// points [n, 2] to non-negative densities [n] and is invoked in row batches.
/// Throws std::invalid_argument if res < 1 or res > 2048.
void emit_density_map(const std::function<Eigen::ArrayXd(const Tensor&)>& density, double lo0,
                      double hi0, double lo1, double hi1, Index res, const std::string& path);

}  // namespace led
