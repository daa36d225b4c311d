// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <functional>
#include <vector>

#include "led/rng.hpp"
#include "led/tensor.hpp"

namespace led {

/// Piecewise-constant probability density on a 1D interval or 2D box,
/// normalized cell masses. 2D cells are stored row-major: cell (i, j) at
/// i * res[1] + j, with i indexing dimension 0.
struct GridDensity {
  Index dims = 2;
  std::array<double, 2> lo{0.0, 0.0};
  std::array<double, 2> hi{1.0, 1.0};
  std::array<Index, 2> res{0, 0};
  Eigen::ArrayXd mass;

  static GridDensity from_function(const std::function<double(double)>& f, double lo, double hi,
                                   Index n);
  static GridDensity from_function(const std::function<double(double, double)>& f, double lo0,
                                   double hi0, double lo1, double hi1, Index n0, Index n1);
  static GridDensity uniform2d(double lo0, double hi0, double lo1, double hi1, Index n0, Index n1);

  double width(Index d) const { return (hi[static_cast<std::size_t>(d)] - lo[static_cast<std::size_t>(d)]) / static_cast<double>(res[static_cast<std::size_t>(d)]); }
  double center(Index d, Index i) const { return lo[static_cast<std::size_t>(d)] + (static_cast<double>(i) + 0.5) * width(d); }
  double cell_area() const { return dims == 1 ? width(0) : width(0) * width(1); }
  Index cells() const { return dims == 1 ? res[0] : res[0] * res[1]; }

  /// Throws std::invalid_argument unless mass is non-negative, sums to 1
  /// within 1e-12, and the geometry is coherent.
  void validate() const;
};

/// The autoregressive conditional-CDF map y_1 = F(x_1), y_2 = F(x_2 | x_1's
/// cell), tabulated at cell edges and interpolated linearly within cells.
/// Triangular by construction and monotone in each coordinate.
struct ConditionalCdfTransform {
  GridDensity density;             // carries the box geometry
  Eigen::ArrayXd f1;               // res[0] + 1 edge values, 0 -> 1
  std::vector<Eigen::ArrayXd> f2;  // per dim-0 cell, res[1] + 1 edge values (2D only)
};

/// Builds the transform; a conditioning slice with zero mass violates the
/// positivity assumption and throws std::domain_error.
ConditionalCdfTransform fit_conditional_cdfs(const GridDensity& density);

/// samples: [n, dims] points inside the closed box (outside throws
/// std::invalid_argument) -> [n, dims] points in [0,1]^dims, strictly interior
/// for interior inputs under a positive density.
Tensor transform_samples(const ConditionalCdfTransform& t, const Tensor& samples);

/// y: [n, dims] in (0,1)^dims (closed endpoints allowed; outside [0,1] throws
/// std::invalid_argument) -> x in the box, the sequential inverse-CDF lookup.
Tensor invert_transform(const ConditionalCdfTransform& t, const Tensor& y);

/// n i.i.d. draws from the grid density via uniform draws pushed through the
/// inverse transform (uniform over cell interiors, matching the density).
Tensor sample_density(const ConditionalCdfTransform& t, Index n, Rng& rng);

}  // namespace led
