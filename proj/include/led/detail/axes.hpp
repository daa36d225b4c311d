// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <stdexcept>

#include "led/tensor.hpp"

namespace led::detail {

using MatRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct AxisDims {
  Index lead, n, trail;
};

// Row-major decomposition around one axis: flat = (l * n + j) * trail + t.
inline AxisDims axis_dims(const Shape& s, int axis) {
  if (axis < 0 || axis >= static_cast<int>(s.size()))
    throw std::invalid_argument("reduce: axis " + std::to_string(axis) + " out of range for " + shape_str(s));
  AxisDims d{1, s[static_cast<std::size_t>(axis)], 1};
  for (int i = 0; i < axis; ++i) d.lead *= s[static_cast<std::size_t>(i)];
  for (std::size_t i = static_cast<std::size_t>(axis) + 1; i < s.size(); ++i) d.trail *= s[i];
  return d;
}

// `b` may broadcast over `a` if it is scalar or its shape is a trailing
// suffix of a's shape (equal shapes included).
inline bool broadcastable(const Shape& a, const Shape& b) {
  if (shape_size(b) == 1) return true;
  if (b.size() > a.size()) return false;
  for (std::size_t i = 0; i < b.size(); ++i)
    if (b[b.size() - 1 - i] != a[a.size() - 1 - i]) return false;
  return true;
}

}  // namespace led::detail
