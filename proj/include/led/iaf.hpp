// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <utility>
#include <vector>

#include "led/made.hpp"

namespace led {

/// Inverse autoregressive flow layer. The parallel direction computes, in one
/// conditioner pass,
///   z_i = z'_i * sigma_i(z'_{<i}) + mu_i(z'_{<i}),   sigma = sigmoid(s) + 1e-4
/// with log-det = sum_i log sigma_i; the degrees live in the conditioner. The
/// opposite direction solves the same equations degree-by-degree (one
/// conditioner pass per distinct input degree) and is also differentiable.
///
/// `parallel_is_forward` selects which physical direction a FlowChain treats
/// as "forward" (base -> data): posterior flows sample in parallel; a
/// density-estimation chain samples in parallel and evaluates sequentially.
/// Note the scale cap: sigma < 1 + 1e-4, so the parallel map contracts and
/// the sequential solve expands. A chain whose density pass must sharpen the
/// base (concentrate mass) needs the sequential direction on that pass.
struct IafLayer {
  MadeConditioner cond;
  double sigma_floor = 1e-4;
  bool parallel_is_forward = true;

  enum class Init {
    kZero,      // all heads zero: z = (sigmoid(0) + floor) * z'
    kIdentity,  // scale-head bias solves sigmoid(b) + floor = 1: z = z' to ~1e-16
  };

  static IafLayer init(Index d, const std::vector<Index>& hidden, Activation act, Rng& rng,
                       bool reversed, Init mode, bool parallel_is_forward = true);

  /// One conditioner pass; differentiable. z': [batch, d] -> (z, log_det[batch]).
  std::pair<Tensor, Tensor> parallel_apply(const Tensor& zp) const;

  /// Sequential solve z'_i = (z_i - mu_i(z'_{<i})) / sigma_i(z'_{<i}) in degree
  /// order; differentiable. Returns (z', log_det_of_inverse[batch]).
  std::pair<Tensor, Tensor> sequential_invert(const Tensor& z) const;

  /// Chain-facing orientation (see parallel_is_forward).
  std::pair<Tensor, Tensor> forward(const Tensor& x) const {
    return parallel_is_forward ? parallel_apply(x) : sequential_invert(x);
  }
  std::pair<Tensor, Tensor> inverse(const Tensor& y) const {
    return parallel_is_forward ? sequential_invert(y) : parallel_apply(y);
  }

  Index dim() const { return cond.dim(); }
  void append_params(const std::string& prefix, std::vector<NamedParam>& out) {
    cond.append_params(prefix, out);
  }
};

}  // namespace led
