// SPDX-License-Identifier: Apache-2.0
#include "led/nica.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "led/adam.hpp"

namespace led {

FlowChain make_nica_chain(const GridDensity& target, Index n_layers,
                          const std::vector<Index>& hidden, Activation act, Rng& init_rng) {
  target.validate();
  if (target.dims != 2) throw std::invalid_argument("make_nica_chain: target must be 2D");
  // Parallel pass = sampling (base -> data), sequential solve = density pass.
  // The density pass divides by sigma = sigmoid(s) + 1e-4 < 1, so it can
  // sharpen the flat base onto peaked targets; the opposite orientation only
  // contracts and its best fit never concentrates past the base.
  FlowChain inner = make_iaf_chain(2, n_layers, hidden, act, init_rng, IafLayer::Init::kIdentity,
                                   /*parallel_is_forward=*/true);
  FlowChain chain;
  chain.dim = 2;
  chain.base = BaseKind::kUniformUnitBox;
  chain.layers.reserve(inner.layers.size() + 3);
  chain.layers.emplace_back(LogitLayer{});
  for (auto& l : inner.layers) chain.layers.push_back(std::move(l));
  chain.layers.emplace_back(SigmoidLayer{});
  AffineBoxLayer box;
  box.lo = Eigen::ArrayXd(2);
  box.width = Eigen::ArrayXd(2);
  for (Index d = 0; d < 2; ++d) {
    box.lo[d] = target.lo[static_cast<std::size_t>(d)];
    box.width[d] = target.hi[static_cast<std::size_t>(d)] - target.lo[static_cast<std::size_t>(d)];
  }
  chain.layers.emplace_back(std::move(box));
  return chain;
}

double grid_quadrature_kl(const GridDensity& target, const FlowChain& model) {
  target.validate();
  if (target.dims != 2) throw std::invalid_argument("grid_quadrature_kl: target must be 2D");
  const Index n0 = target.res[0], n1 = target.res[1];
  const double area = target.cell_area();
  Eigen::ArrayXd centers(n0 * n1 * 2);
  for (Index i = 0; i < n0; ++i)
    for (Index j = 0; j < n1; ++j) {
      centers[(i * n1 + j) * 2 + 0] = target.center(0, i);
      centers[(i * n1 + j) * 2 + 1] = target.center(1, j);
    }
  const Tensor log_q = model.log_density(Tensor(Shape{n0 * n1, 2}, std::move(centers)));
  double kl = 0.0;
  for (Index c = 0; c < n0 * n1; ++c) {
    const double p = target.mass[c];
    if (p > 0.0) kl += p * (std::log(p / area) - log_q.at(c));
  }
  return kl;
}

NicaDemoResult iaf_universality_demo(const GridDensity& target, Index n_layers,
                                     const NicaTrainConfig& cfg, Rng& rng) {
  if (cfg.n_train < 1 || cfg.batch < 1 || cfg.epochs < 0 || cfg.kl_every < 1)
    throw std::invalid_argument("iaf_universality_demo: bad training config");
  const ConditionalCdfTransform cdf = fit_conditional_cdfs(target);
  Rng sample_rng = rng.substream(1);
  Rng init_rng = rng.substream(2);
  Rng order_rng = rng.substream(3);

  const Tensor train = sample_density(cdf, cfg.n_train, sample_rng);

  NicaDemoResult res;
  res.chain = make_nica_chain(target, n_layers, cfg.hidden, cfg.act, init_rng);
  std::vector<NamedParam> named;
  res.chain.append_params("flow", named);
  auto params = param_pointers(named);
  AdamState state = AdamState::init(params);
  AdamHyper hyper;
  hyper.lr = cfg.lr;

  res.kl_trace.push_back(grid_quadrature_kl(target, res.chain));
  if (params.empty()) return res;  // no trainable layers: the trace is the init KL

  std::vector<Index> order(static_cast<std::size_t>(cfg.n_train));
  std::iota(order.begin(), order.end(), Index{0});
  for (Index epoch = 1; epoch <= cfg.epochs; ++epoch) {
    order_rng.shuffle(order);
    for (Index start = 0; start < cfg.n_train; start += cfg.batch) {
      const Index b = std::min(cfg.batch, cfg.n_train - start);
      Eigen::ArrayXd xb(b * 2);
      for (Index i = 0; i < b; ++i)
        xb.segment(i * 2, 2) = train.values().segment(order[static_cast<std::size_t>(start + i)] * 2, 2);
      Tape tape;
      ParamScope scope(tape, params);
      const Tensor loss = neg(mean(res.chain.log_density(Tensor(Shape{b, 2}, std::move(xb)))));
      const Gradients grads = tape.backward(loss);
      adam_step(params, grads, state, hyper);
    }
    if (epoch % cfg.kl_every == 0 || epoch == cfg.epochs)
      res.kl_trace.push_back(grid_quadrature_kl(target, res.chain));
  }
  return res;
}

}  // namespace led
