// SPDX-License-Identifier: Apache-2.0
#include "led/coupling.hpp"

#include <stdexcept>

#include "led/ops.hpp"

namespace led {

CouplingLayer CouplingLayer::init(const MaskSpec& mask, const std::vector<Index>& hidden,
                                  Activation act, Rng& rng) {
  if (hidden.empty()) throw std::invalid_argument("CouplingLayer: need at least one hidden size");
  CouplingLayer layer;
  layer.mask = mask;
  layer.act = act;
  std::vector<Index> trunk_sizes;
  trunk_sizes.push_back(mask.dim);
  trunk_sizes.insert(trunk_sizes.end(), hidden.begin(), hidden.end());
  layer.trunk = Mlp::make(trunk_sizes, act, rng);
  layer.scale_head = DenseLayer::zeros(hidden.back(), mask.dim);
  layer.shift_head = DenseLayer::zeros(hidden.back(), mask.dim);
  layer.scale_bound = Tensor::scalar(1.0);
  return layer;
}

std::pair<Tensor, Tensor> CouplingLayer::scale_shift(const Tensor& x) const {
  if (x.rank() != 2 || x.dim(1) != mask.dim)
    throw std::invalid_argument("CouplingLayer: expected [batch, " + std::to_string(mask.dim) +
                                "], got " + shape_str(x.shape()));
  const Tensor bits(Shape{mask.dim}, mask.bits);
  Tensor h = activate(act, trunk(mul(x, bits)));
  Tensor s = mul(led::tanh(scale_head(h)), scale_bound);
  Tensor t = shift_head(h);
  return {s, t};
}

std::pair<Tensor, Tensor> CouplingLayer::forward(const Tensor& x) const {
  auto [s, t] = scale_shift(x);
  const Tensor bits(Shape{mask.dim}, mask.bits);
  const Tensor anti(Shape{mask.dim}, 1.0 - mask.bits);
  Tensor y = add(mul(x, bits), mul(add(mul(x, led::exp(s)), t), anti));
  Tensor log_det = sum(mul(s, anti), 1);
  return {y, log_det};
}

std::pair<Tensor, Tensor> CouplingLayer::inverse(const Tensor& y) const {
  // The conditioner reads only masked-in coordinates, which forward passes
  // through unchanged, so s(b.*y) == s(b.*x) and the inverse is one pass.
  auto [s, t] = scale_shift(y);
  const Tensor bits(Shape{mask.dim}, mask.bits);
  const Tensor anti(Shape{mask.dim}, 1.0 - mask.bits);
  Tensor x = add(mul(y, bits), mul(mul(sub(y, t), led::exp(neg(s))), anti));
  Tensor log_det = neg(sum(mul(s, anti), 1));
  return {x, log_det};
}

void CouplingLayer::append_params(const std::string& prefix, std::vector<NamedParam>& out) {
  trunk.append_params(prefix + ".trunk", out);
  scale_head.append_params(prefix + ".scale", out);
  shift_head.append_params(prefix + ".shift", out);
  out.push_back({prefix + ".bound", &scale_bound});
}

}  // namespace led
