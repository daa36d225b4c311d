// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <utility>
#include <vector>

#include "led/masks.hpp"
#include "led/nn.hpp"

namespace led {

/// Affine coupling layer (Real-NVP style). With mask b,
///   forward:  y = b .* x + (1-b) .* (x .* exp(s(b.*x)) + t(b.*x))
///   log_det  = sum over masked-out coordinates of s(b.*x)
/// where s and t come from a shared MLP trunk with separate linear heads, and
/// the raw scale output is squashed through tanh and multiplied by a learnable
/// per-layer bound so early training cannot produce runaway log-scales.
/// Zero-initialized heads make the layer start as the identity.
struct CouplingLayer {
  MaskSpec mask;
  Mlp trunk;               // dim -> hidden (pre-activation output)
  DenseLayer scale_head;   // hidden -> dim, raw log-scale
  DenseLayer shift_head;   // hidden -> dim
  Tensor scale_bound;      // scalar, learnable
  Activation act = Activation::kRelu;

  /// Conditioner trunk of shape dim -> hidden..., heads zero-initialized
  /// (identity start), scale bound initialized to 1.
  static CouplingLayer init(const MaskSpec& mask, const std::vector<Index>& hidden,
                            Activation act, Rng& rng);

  /// x: [batch, dim] -> (y, log_det[batch]).
  std::pair<Tensor, Tensor> forward(const Tensor& x) const;
  /// y: [batch, dim] -> (x, log_det_of_inverse[batch]); exact analytic inverse.
  std::pair<Tensor, Tensor> inverse(const Tensor& y) const;

  /// Per-coordinate log-scale and shift given the full input (mask applied
  /// internally): both [batch, dim].
  std::pair<Tensor, Tensor> scale_shift(const Tensor& x) const;

  Index dim() const { return mask.dim; }
  void append_params(const std::string& prefix, std::vector<NamedParam>& out);
};

}  // namespace led
