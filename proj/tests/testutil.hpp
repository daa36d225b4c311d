#pragma once

// Shared numerical oracles for the test suites: central finite differences for
// gradients and Jacobians, relative error with an absolute floor, and simple
// quadrature helpers.  Everything here is independent of the tape machinery:
// finite differences only ever call a black-box evaluation function.

#include <cmath>
#include <functional>
#include <stdexcept>

#include <Eigen/Dense>

#include "led/tensor.hpp"

namespace led::test {

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max({1.0, std::abs(got), std::abs(want)});
}

// Central-difference gradient of a scalar function with respect to the values
// of `p`.  `eval` must recompute the function from the *current* values of p;
// the tensor is restored to its original contents before returning.
inline Eigen::ArrayXd fd_gradient(Tensor& p, const std::function<double()>& eval,
                                  double h = 1e-5) {
  const Eigen::ArrayXd saved = p.values();
  Eigen::ArrayXd grad(saved.size());
  for (Eigen::Index i = 0; i < saved.size(); ++i) {
    Eigen::ArrayXd bumped = saved;
    bumped[i] = saved[i] + h;
    p.assign(bumped);
    const double fp = eval();
    bumped[i] = saved[i] - h;
    p.assign(bumped);
    const double fm = eval();
    grad[i] = (fp - fm) / (2.0 * h);
  }
  p.assign(saved);
  return grad;
}

// Central-difference Jacobian of a vector-valued map R^n -> R^m.
inline Eigen::MatrixXd fd_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& x, double h = 1e-6) {
  const Eigen::VectorXd y0 = f(x);
  Eigen::MatrixXd jac(y0.size(), x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    Eigen::VectorXd xp = x;
    xp[j] += h;
    Eigen::VectorXd xm = x;
    xm[j] -= h;
    jac.col(j) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return jac;
}

inline double max_abs_rel_err(const Eigen::ArrayXd& got, const Eigen::ArrayXd& want) {
  if (got.size() != want.size()) throw std::invalid_argument("size mismatch in max_abs_rel_err");
  double worst = 0.0;
  for (Eigen::Index i = 0; i < got.size(); ++i) worst = std::max(worst, rel_err(got[i], want[i]));
  return worst;
}

// Midpoint-rule integral of a density over [lo,hi]^2 on an n-by-n grid.
inline double integrate2d(const std::function<double(double, double)>& f, double lo, double hi,
                          int n) {
  const double step = (hi - lo) / n;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = lo + (i + 0.5) * step;
    for (int j = 0; j < n; ++j) {
      const double y = lo + (j + 0.5) * step;
      total += f(x, y);
    }
  }
  return total * step * step;
}

// Midpoint-rule integral over [lo,hi] in one dimension.
inline double integrate1d(const std::function<double(double)>& f, double lo, double hi, int n) {
  const double step = (hi - lo) / n;
  double total = 0.0;
  for (int i = 0; i < n; ++i) total += f(lo + (i + 0.5) * step);
  return total * step;
}

}  // namespace led::test
