// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

namespace led {

/// Standard normal CDF.
double normal_cdf(double x);

/// One-sample Kolmogorov-Smirnov statistic against Uniform(0,1):
/// sup_u |F_n(u) - u|. Input need not be sorted.
double ks_uniform(Eigen::ArrayXd samples);

/// Sample Pearson correlation coefficient.
double pearson_correlation(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y);

/// Plug-in mutual information (nats) from a bins-by-bins histogram of (x, y)
/// over [lo,hi]^2; out-of-range points are clamped to the edge bins.
double binned_mutual_information(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y, int bins,
                                 double lo, double hi);

}  // namespace led
