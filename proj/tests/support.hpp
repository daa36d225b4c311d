#pragma once

// Helpers shared by the flow/MADE test suites and the acceptance runner:
// randomizing zero-initialized conditioner heads (so layers are not the
// identity), and the block-degree construction that makes an IAF layer and a
// coupling layer compute the same transform.

#include <cmath>
#include <vector>

#include "led/coupling.hpp"
#include "led/iaf.hpp"
#include "led/rng.hpp"

namespace led::test {

inline void randomize_dense(DenseLayer& layer, Rng& rng, double scale) {
  layer.w.assign(Tensor::randn(layer.w.shape(), rng, scale).values());
  layer.b.assign(Tensor::randn(layer.b.shape(), rng, scale).values());
}

/// Gives a freshly initialized (identity) coupling layer nonzero heads.
inline void randomize_coupling(CouplingLayer& layer, Rng& rng, double scale = 0.3) {
  randomize_dense(layer.scale_head, rng, scale);
  randomize_dense(layer.shift_head, rng, scale);
}

/// Gives a freshly initialized MADE conditioner nonzero heads (the masks are
/// applied at evaluation time, so dense randomization is fine).
inline void randomize_made_heads(MadeConditioner& cond, Rng& rng, double scale = 0.5) {
  randomize_dense(cond.mu_head, rng, scale);
  randomize_dense(cond.s_head, rng, scale);
}

/// An IAF layer with block degrees (first half degree 1, second half degree 2)
/// and a coupling layer built to compute the same map:
///   - shared trunk weights; the IAF masks zero exactly the rows the coupling
///     layer's input masking zeroes, so hidden activations agree bit-for-bit;
///   - shared shift head, so shifts agree bit-for-bit;
///   - constant scale heads (bias only): the IAF's degree-1 block gets
///     sigma = 1 (identity), and the coupling layer's raw-scale bias is
///     atanh(log sigma_B) with bound 1 so exp(tanh(.)) reproduces sigma_B.
struct BlockEquivalentPair {
  IafLayer iaf;
  CouplingLayer coupling;
};

inline BlockEquivalentPair make_block_equivalent_pair(Index d, Index hidden_width, Rng& rng) {
  const Index half = d / 2;
  const double floor = 1e-4;
  const double beta = 0.4;  // sigma_B = sigmoid(beta) + floor, inside (1/e, e)
  const double sigma_b = 1.0 / (1.0 + std::exp(-beta)) + floor;
  const double ident_bias = std::log((1.0 - floor) / floor);

  std::vector<int> degrees(static_cast<std::size_t>(d), 2);
  for (Index i = 0; i < half; ++i) degrees[static_cast<std::size_t>(i)] = 1;

  BlockEquivalentPair pair;

  // IAF side: one hidden layer, all units degree 1.
  Rng wrng = rng.substream(1);
  IafLayer& iaf = pair.iaf;
  iaf.cond.act = Activation::kRelu;
  iaf.cond.degrees.input = degrees;
  iaf.cond.degrees.hidden = {std::vector<int>(static_cast<std::size_t>(hidden_width), 1)};
  iaf.cond.hidden_layers = {DenseLayer::init(d, hidden_width, wrng)};
  iaf.cond.hidden_masks = {
      Tensor(Shape{d, hidden_width},
             made_mask(degrees, iaf.cond.degrees.hidden[0], /*strict=*/false))};
  iaf.cond.mu_head = DenseLayer::zeros(hidden_width, d);
  Rng hrng = rng.substream(2);
  randomize_dense(iaf.cond.mu_head, hrng, 0.5);
  {  // degree-1 outputs must shift by exactly zero
    Eigen::ArrayXd mb = iaf.cond.mu_head.b.values();
    for (Index i = 0; i < half; ++i) mb[i] = 0.0;
    iaf.cond.mu_head.b.assign(std::move(mb));
  }
  iaf.cond.s_head = DenseLayer::zeros(hidden_width, d);
  {
    Eigen::ArrayXd sb = Eigen::ArrayXd::Constant(d, beta);
    for (Index i = 0; i < half; ++i) sb[i] = ident_bias;
    iaf.cond.s_head.b.assign(std::move(sb));
  }
  iaf.cond.out_mask =
      Tensor(Shape{hidden_width, d}, made_mask(iaf.cond.degrees.hidden[0], degrees,
                                               /*strict=*/true));

  // Coupling side: mask passes the degree-1 block through.
  CouplingLayer& c = pair.coupling;
  c.mask.dim = d;
  c.mask.kind = MaskKind::kRandomHalf;
  c.mask.bits = Eigen::ArrayXd::Zero(d);
  for (Index i = 0; i < half; ++i) c.mask.bits[i] = 1.0;
  c.act = Activation::kRelu;
  c.trunk.act = Activation::kRelu;
  c.trunk.layers = {DenseLayer{iaf.cond.hidden_layers[0].w, iaf.cond.hidden_layers[0].b}};
  c.shift_head = DenseLayer{iaf.cond.mu_head.w, iaf.cond.mu_head.b};
  c.scale_head = DenseLayer::zeros(hidden_width, d);
  {
    Eigen::ArrayXd sb = Eigen::ArrayXd::Constant(d, std::atanh(std::log(sigma_b)));
    c.scale_head.b.assign(std::move(sb));
  }
  c.scale_bound = Tensor::scalar(1.0);
  return pair;
}

}  // namespace led::test
