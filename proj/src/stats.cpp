// SPDX-License-Identifier: Apache-2.0
#include "led/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace led {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double ks_uniform(Eigen::ArrayXd samples) {
  const Eigen::Index n = samples.size();
  if (n < 1) throw std::invalid_argument("ks_uniform: need at least one sample");
  std::sort(samples.data(), samples.data() + n);
  double d = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = samples[i];
    d = std::max(d, u - static_cast<double>(i) / static_cast<double>(n));
    d = std::max(d, static_cast<double>(i + 1) / static_cast<double>(n) - u);
  }
  return d;
}

double pearson_correlation(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("pearson_correlation: need two equal-length samples");
  const double mx = x.mean(), my = y.mean();
  const Eigen::ArrayXd dx = x - mx, dy = y - my;
  const double denom = std::sqrt(dx.square().sum() * dy.square().sum());
  if (denom == 0.0) throw std::invalid_argument("pearson_correlation: zero variance");
  return (dx * dy).sum() / denom;
}

double binned_mutual_information(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y, int bins,
                                 double lo, double hi) {
  if (x.size() != y.size() || x.size() < 1)
    throw std::invalid_argument("binned_mutual_information: need equal-length samples");
  if (bins < 2 || !(hi > lo)) throw std::invalid_argument("binned_mutual_information: bad bins/range");
  const double w = (hi - lo) / bins;
  const auto bin_of = [&](double v) {
    int b = static_cast<int>(std::floor((v - lo) / w));
    return std::min(std::max(b, 0), bins - 1);
  };
  Eigen::MatrixXd joint = Eigen::MatrixXd::Zero(bins, bins);
  for (Eigen::Index i = 0; i < x.size(); ++i) joint(bin_of(x[i]), bin_of(y[i])) += 1.0;
  joint /= static_cast<double>(x.size());
  const Eigen::VectorXd px = joint.rowwise().sum();
  const Eigen::VectorXd py = joint.colwise().sum();
  double mi = 0.0;
  for (int i = 0; i < bins; ++i)
    for (int j = 0; j < bins; ++j) {
      const double p = joint(i, j);
      if (p > 0.0) mi += p * std::log(p / (px[i] * py[j]));
    }
  return mi;
}

}  // namespace led
