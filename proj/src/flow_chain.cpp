// SPDX-License-Identifier: Apache-2.0
#include "led/flow_chain.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "led/ops.hpp"

namespace led {

namespace {

void check_batch(const Tensor& x, Index dim, const char* who) {
  if (x.rank() != 2 || x.dim(1) != dim)
    throw std::invalid_argument(std::string(who) + ": expected [batch, " + std::to_string(dim) +
                                "], got " + shape_str(x.shape()));
}

// logit u with log-det sum(-log u - log(1-u)); domain error off (0,1).
std::pair<Tensor, Tensor> logit_fwd(const Tensor& u) {
  const Tensor one = Tensor::scalar(1.0);
  Tensor lu = led::log(u);
  Tensor l1u = led::log(add(neg(u), one));
  Tensor y = sub(lu, l1u);
  Tensor ld = neg(sum(add(lu, l1u), 1));
  return {y, ld};
}

// sigmoid y with log-det sum(log s'(y)) = sum(-softplus(y) - softplus(-y)).
std::pair<Tensor, Tensor> sigmoid_fwd(const Tensor& y) {
  Tensor u = led::sigmoid(y);
  Tensor ld = neg(sum(add(led::softplus(y), led::softplus(neg(y))), 1));
  return {u, ld};
}

std::pair<Tensor, Tensor> box_fwd(const AffineBoxLayer& l, const Tensor& u) {
  const Index d = l.lo.size();
  const Tensor lo(Shape{d}, l.lo);
  const Tensor width(Shape{d}, l.width);
  Tensor x = add(mul(u, width), lo);
  const double ld_val = l.width.log().sum();
  Tensor ld = Tensor::full({u.dim(0)}, ld_val);
  return {x, ld};
}

std::pair<Tensor, Tensor> box_inv(const AffineBoxLayer& l, const Tensor& x) {
  const Index d = l.lo.size();
  const Tensor lo(Shape{d}, l.lo);
  const Tensor width(Shape{d}, l.width);
  Tensor u = div(sub(x, lo), width);
  const double ld_val = -l.width.log().sum();
  Tensor ld = Tensor::full({x.dim(0)}, ld_val);
  return {u, ld};
}

std::pair<Tensor, Tensor> layer_forward(const FlowLayer& layer, const Tensor& x) {
  return std::visit(
      [&](const auto& l) -> std::pair<Tensor, Tensor> {
        using L = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<L, CouplingLayer> || std::is_same_v<L, IafLayer>)
          return l.forward(x);
        else if constexpr (std::is_same_v<L, LogitLayer>)
          return logit_fwd(x);
        else if constexpr (std::is_same_v<L, SigmoidLayer>)
          return sigmoid_fwd(x);
        else
          return box_fwd(l, x);
      },
      layer);
}

std::pair<Tensor, Tensor> layer_inverse(const FlowLayer& layer, const Tensor& y) {
  return std::visit(
      [&](const auto& l) -> std::pair<Tensor, Tensor> {
        using L = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<L, CouplingLayer> || std::is_same_v<L, IafLayer>)
          return l.inverse(y);
        else if constexpr (std::is_same_v<L, LogitLayer>)
          return sigmoid_fwd(y);
        else if constexpr (std::is_same_v<L, SigmoidLayer>)
          return logit_fwd(y);
        else
          return box_inv(l, y);
      },
      layer);
}

}  // namespace

std::pair<Tensor, Tensor> FlowChain::forward(const Tensor& z0) const {
  check_batch(z0, dim, "FlowChain::forward");
  if (layers.empty()) return {z0, Tensor::zeros({z0.dim(0)})};
  Tensor x = z0;
  Tensor ld;
  bool first = true;
  for (const FlowLayer& layer : layers) {
    auto [y, l] = layer_forward(layer, x);
    x = y;
    ld = first ? l : add(ld, l);
    first = false;
  }
  return {x, ld};
}

std::pair<Tensor, Tensor> FlowChain::inverse(const Tensor& z) const {
  check_batch(z, dim, "FlowChain::inverse");
  if (layers.empty()) return {z, Tensor::zeros({z.dim(0)})};
  Tensor x = z;
  Tensor ld;
  bool first = true;
  for (auto it = layers.rbegin(); it != layers.rend(); ++it) {
    auto [y, l] = layer_inverse(*it, x);
    x = y;
    ld = first ? l : add(ld, l);
    first = false;
  }
  return {x, ld};
}

Tensor FlowChain::base_log_density(const Tensor& z0) const {
  check_batch(z0, dim, "FlowChain::base_log_density");
  if (base == BaseKind::kStandardNormal) {
    const double c = -0.5 * static_cast<double>(dim) * std::log(2.0 * std::numbers::pi);
    return add(mul(sum(mul(z0, z0), 1), Tensor::scalar(-0.5)), Tensor::scalar(c));
  }
  // Closed box: a saturated sigmoid upstream can land exactly on 0 or 1.
  if ((z0.values() < 0.0).any() || (z0.values() > 1.0).any())
    throw std::domain_error("FlowChain: point outside the uniform base's unit box");
  return Tensor::zeros({z0.dim(0)});
}

Tensor FlowChain::log_density(const Tensor& z) const {
  if (layers.empty()) return base_log_density(z);
  auto [z0, ld] = inverse(z);
  return add(base_log_density(z0), ld);
}

Tensor FlowChain::sample_base(Index n, Rng& rng) const {
  if (n < 1) throw std::invalid_argument("FlowChain::sample_base: n must be >= 1");
  Eigen::ArrayXd v(n * dim);
  if (base == BaseKind::kStandardNormal)
    for (Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
  else
    for (Index i = 0; i < v.size(); ++i) v[i] = rng.uniform();
  return Tensor(Shape{n, dim}, std::move(v));
}

Tensor FlowChain::sample(Index n, Rng& rng) const {
  Tensor z0 = sample_base(n, rng);
  if (layers.empty()) return z0;
  return forward(z0).first;
}

void FlowChain::append_params(const std::string& prefix, std::vector<NamedParam>& out) {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const std::string p = prefix + ".l" + std::to_string(i);
    std::visit(
        [&](auto& l) {
          using L = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<L, CouplingLayer> || std::is_same_v<L, IafLayer>)
            l.append_params(p, out);
        },
        layers[i]);
  }
}

FlowChain make_nvp_chain(Index dim, Index n_layers, const std::vector<Index>& hidden,
                         Activation act, Rng& mask_rng, Rng& init_rng, MaskKind kind,
                         std::optional<std::pair<Index, Index>> spatial) {
  FlowChain chain;
  chain.dim = dim;
  chain.base = BaseKind::kStandardNormal;
  MaskSpec mask;
  for (Index k = 0; k < n_layers; ++k) {
    mask = k == 0 ? make_mask(dim, kind, mask_rng, spatial) : complement(mask);
    chain.layers.emplace_back(CouplingLayer::init(mask, hidden, act, init_rng));
  }
  return chain;
}

FlowChain make_iaf_chain(Index dim, Index n_layers, const std::vector<Index>& hidden,
                         Activation act, Rng& init_rng, IafLayer::Init init_mode,
                         bool parallel_is_forward) {
  FlowChain chain;
  chain.dim = dim;
  chain.base = BaseKind::kStandardNormal;
  for (Index k = 0; k < n_layers; ++k) {
    chain.layers.emplace_back(IafLayer::init(dim, hidden, act, init_rng, /*reversed=*/k % 2 == 1,
                                             init_mode, parallel_is_forward));
  }
  return chain;
}

}  // namespace led
