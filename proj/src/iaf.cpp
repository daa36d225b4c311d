// SPDX-License-Identifier: Apache-2.0
#include "led/iaf.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "led/ops.hpp"

namespace led {

IafLayer IafLayer::init(Index d, const std::vector<Index>& hidden, Activation act, Rng& rng,
                        bool reversed, Init mode, bool parallel_is_forward) {
  IafLayer layer;
  layer.parallel_is_forward = parallel_is_forward;
  const double floor = layer.sigma_floor;
  // sigmoid(b) + floor == 1 exactly at b = log((1 - floor) / floor).
  const double s_bias = mode == Init::kIdentity ? std::log((1.0 - floor) / floor) : 0.0;
  const std::vector<int> degrees = reversed ? reversed_degrees(d) : natural_degrees(d);
  layer.cond = MadeConditioner::init(degrees, hidden, act, rng, s_bias);
  return layer;
}

std::pair<Tensor, Tensor> IafLayer::parallel_apply(const Tensor& zp) const {
  auto [mu, s] = cond(zp);
  Tensor sigma = add(led::sigmoid(s), Tensor::scalar(sigma_floor));
  Tensor z = add(mul(zp, sigma), mu);
  Tensor log_det = sum(led::log(sigma), 1);
  return {z, log_det};
}

std::pair<Tensor, Tensor> IafLayer::sequential_invert(const Tensor& z) const {
  const Index d = dim();
  if (z.rank() != 2 || z.dim(1) != d)
    throw std::invalid_argument("IafLayer: expected [batch, " + std::to_string(d) + "], got " +
                                shape_str(z.shape()));

  std::vector<int> order(cond.degrees.input);
  std::sort(order.begin(), order.end());
  order.erase(std::unique(order.begin(), order.end()), order.end());

  // Solve one degree per pass. Coordinates of the current degree take the
  // solved value (z - mu)/sigma; the conditioner only reads coordinates of
  // strictly smaller degree, which earlier passes already recovered. Built
  // from tensor ops so the solve participates in reverse-mode gradients.
  Tensor zp = z;
  for (int deg : order) {
    auto [mu, s] = cond(zp);
    const Tensor sigma = add(led::sigmoid(s), Tensor::scalar(sigma_floor));
    const Tensor cand = div(sub(z, mu), sigma);
    Eigen::ArrayXd take(d);
    for (Index i = 0; i < d; ++i)
      take[i] = cond.degrees.input[static_cast<std::size_t>(i)] == deg ? 1.0 : 0.0;
    Eigen::ArrayXd keep = 1.0 - take;
    zp = add(mul(cand, Tensor(Shape{d}, std::move(take))),
             mul(zp, Tensor(Shape{d}, std::move(keep))));
  }

  // Log-det of the inverse map from a final pass over the recovered input.
  auto [mu_f, s_f] = cond(zp);
  (void)mu_f;
  const Tensor sigma = add(led::sigmoid(s_f), Tensor::scalar(sigma_floor));
  return {zp, neg(sum(led::log(sigma), 1))};
}

}  // namespace led
