// SPDX-License-Identifier: Apache-2.0
#include "led/grid_density.hpp"

#include <cmath>
#include <stdexcept>

namespace led {
namespace {

void normalize(Eigen::ArrayXd& mass) {
  for (Index i = 0; i < mass.size(); ++i) {
    if (!std::isfinite(mass[i]) || mass[i] < 0.0)
      throw std::invalid_argument("GridDensity: density evaluations must be finite and >= 0");
  }
  const double total = mass.sum();
  if (total <= 0.0) throw std::invalid_argument("GridDensity: density has zero total mass");
  mass /= total;
}

// Locate x on dimension d: cell index in [0, res) and the fraction through it.
std::pair<Index, double> locate(const GridDensity& g, Index d, double x) {
  const double w = g.width(d);
  const double t = (x - g.lo[static_cast<std::size_t>(d)]) / w;
  Index cell = static_cast<Index>(std::floor(t));
  if (cell < 0) cell = 0;
  if (cell >= g.res[static_cast<std::size_t>(d)]) cell = g.res[static_cast<std::size_t>(d)] - 1;
  double frac = t - static_cast<double>(cell);
  if (frac < 0.0) frac = 0.0;
  if (frac > 1.0) frac = 1.0;
  return {cell, frac};
}

double interp_edges(const Eigen::ArrayXd& edges, Index cell, double frac) {
  return edges[cell] + frac * (edges[cell + 1] - edges[cell]);
}

// Inverse of the piecewise-linear edge table at level y in [0,1]: returns the
// cell index and fraction. Flat (zero-mass) segments resolve to the cell start.
std::pair<Index, double> inv_edges(const Eigen::ArrayXd& edges, double y) {
  // Binary search for the first edge >= y.
  Index lo = 0, hi = edges.size() - 1;
  while (hi - lo > 1) {
    const Index mid = (lo + hi) / 2;
    if (edges[mid] < y)
      lo = mid;
    else
      hi = mid;
  }
  const double seg = edges[hi] - edges[lo];
  const double frac = seg > 0.0 ? (y - edges[lo]) / seg : 0.0;
  return {lo, std::min(std::max(frac, 0.0), 1.0)};
}

Eigen::ArrayXd cumulative_edges(const Eigen::ArrayXd& cells) {
  Eigen::ArrayXd edges(cells.size() + 1);
  edges[0] = 0.0;
  for (Index i = 0; i < cells.size(); ++i) edges[i + 1] = edges[i] + cells[i];
  const double total = edges[cells.size()];
  if (total > 0.0) edges /= total;
  edges[cells.size()] = 1.0;
  return edges;
}

void check_point_in_box(const GridDensity& g, double v, Index d) {
  if (v < g.lo[static_cast<std::size_t>(d)] || v > g.hi[static_cast<std::size_t>(d)])
    throw std::invalid_argument("transform_samples: sample outside the density's box");
}

}  // namespace

GridDensity GridDensity::from_function(const std::function<double(double)>& f, double lo, double hi,
                                       Index n) {
  if (n < 1 || !(hi > lo)) throw std::invalid_argument("GridDensity: bad 1D geometry");
  GridDensity g;
  g.dims = 1;
  g.lo = {lo, 0.0};
  g.hi = {hi, 1.0};
  g.res = {n, 1};
  g.mass.resize(n);
  for (Index i = 0; i < n; ++i) g.mass[i] = f(g.center(0, i));
  normalize(g.mass);
  return g;
}

GridDensity GridDensity::from_function(const std::function<double(double, double)>& f, double lo0,
                                       double hi0, double lo1, double hi1, Index n0, Index n1) {
  if (n0 < 1 || n1 < 1 || !(hi0 > lo0) || !(hi1 > lo1))
    throw std::invalid_argument("GridDensity: bad 2D geometry");
  GridDensity g;
  g.dims = 2;
  g.lo = {lo0, lo1};
  g.hi = {hi0, hi1};
  g.res = {n0, n1};
  g.mass.resize(n0 * n1);
  for (Index i = 0; i < n0; ++i)
    for (Index j = 0; j < n1; ++j) g.mass[i * n1 + j] = f(g.center(0, i), g.center(1, j));
  normalize(g.mass);
  return g;
}

GridDensity GridDensity::uniform2d(double lo0, double hi0, double lo1, double hi1, Index n0,
                                   Index n1) {
  return from_function([](double, double) { return 1.0; }, lo0, hi0, lo1, hi1, n0, n1);
}

void GridDensity::validate() const {
  if (dims != 1 && dims != 2) throw std::invalid_argument("GridDensity: dims must be 1 or 2");
  for (Index d = 0; d < dims; ++d) {
    if (!(hi[static_cast<std::size_t>(d)] > lo[static_cast<std::size_t>(d)]) || res[static_cast<std::size_t>(d)] < 1)
      throw std::invalid_argument("GridDensity: bad box or resolution");
  }
  if (mass.size() != cells()) throw std::invalid_argument("GridDensity: mass size mismatch");
  double total = 0.0;
  for (Index i = 0; i < mass.size(); ++i) {
    if (!(mass[i] >= 0.0)) throw std::invalid_argument("GridDensity: negative cell mass");
    total += mass[i];
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("GridDensity: mass must sum to 1 within 1e-12");
}

ConditionalCdfTransform fit_conditional_cdfs(const GridDensity& density) {
  density.validate();
  ConditionalCdfTransform t;
  t.density = density;
  if (density.dims == 1) {
    t.f1 = cumulative_edges(density.mass);
    return t;
  }
  const Index n0 = density.res[0], n1 = density.res[1];
  Eigen::ArrayXd marginal(n0);
  for (Index i = 0; i < n0; ++i)
    marginal[i] = density.mass.segment(i * n1, n1).sum();
  for (Index i = 0; i < n0; ++i) {
    if (marginal[i] <= 0.0)
      throw std::domain_error(
          "fit_conditional_cdfs: zero-mass conditioning slice (density must be positive)");
  }
  t.f1 = cumulative_edges(marginal);
  t.f2.reserve(static_cast<std::size_t>(n0));
  for (Index i = 0; i < n0; ++i)
    t.f2.push_back(cumulative_edges(density.mass.segment(i * n1, n1)));
  return t;
}

Tensor transform_samples(const ConditionalCdfTransform& t, const Tensor& samples) {
  const GridDensity& g = t.density;
  if (samples.rank() != 2 || samples.dim(1) != g.dims)
    throw std::invalid_argument("transform_samples: samples must be [n, dims]");
  const Index n = samples.dim(0);
  Eigen::ArrayXd out(n * g.dims);
  for (Index r = 0; r < n; ++r) {
    const double x0 = samples.at(r, 0);
    check_point_in_box(g, x0, 0);
    const auto [c0, f0] = locate(g, 0, x0);
    out[r * g.dims + 0] = interp_edges(t.f1, c0, f0);
    if (g.dims == 2) {
      const double x1 = samples.at(r, 1);
      check_point_in_box(g, x1, 1);
      const auto [c1, f1] = locate(g, 1, x1);
      out[r * g.dims + 1] = interp_edges(t.f2[static_cast<std::size_t>(c0)], c1, f1);
    }
  }
  return Tensor(Shape{n, g.dims}, std::move(out));
}

Tensor invert_transform(const ConditionalCdfTransform& t, const Tensor& y) {
  const GridDensity& g = t.density;
  if (y.rank() != 2 || y.dim(1) != g.dims)
    throw std::invalid_argument("invert_transform: y must be [n, dims]");
  const Index n = y.dim(0);
  Eigen::ArrayXd out(n * g.dims);
  for (Index r = 0; r < n; ++r) {
    const double y0 = y.at(r, 0);
    if (y0 < 0.0 || y0 > 1.0) throw std::invalid_argument("invert_transform: y outside [0,1]");
    const auto [c0, f0] = inv_edges(t.f1, y0);
    out[r * g.dims + 0] = g.lo[0] + (static_cast<double>(c0) + f0) * g.width(0);
    if (g.dims == 2) {
      const double y1 = y.at(r, 1);
      if (y1 < 0.0 || y1 > 1.0) throw std::invalid_argument("invert_transform: y outside [0,1]");
      const auto [c1, f1] = inv_edges(t.f2[static_cast<std::size_t>(c0)], y1);
      out[r * g.dims + 1] = g.lo[1] + (static_cast<double>(c1) + f1) * g.width(1);
    }
  }
  return Tensor(Shape{n, g.dims}, std::move(out));
}

Tensor sample_density(const ConditionalCdfTransform& t, Index n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("sample_density: n must be positive");
  const Index d = t.density.dims;
  Eigen::ArrayXd u(n * d);
  for (Index i = 0; i < u.size(); ++i) u[i] = rng.uniform();
  return invert_transform(t, Tensor(Shape{n, d}, std::move(u)));
}

}  // namespace led
