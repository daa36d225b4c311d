// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "led/tape.hpp"
#include "led/tensor.hpp"

namespace led {

struct AdamHyper {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Per-parameter first/second moment estimates plus the shared step counter.
struct AdamState {
  std::vector<Eigen::ArrayXd> m, v;
  long t = 0;

  static AdamState init(const std::vector<Tensor*>& params);
};

/// One bias-corrected Adam ascent-by-negated-gradient step: params move
/// against `grads`. Deterministic; shapes of params, grads and state agree.
void adam_step(const std::vector<Tensor*>& params, const std::vector<const Eigen::ArrayXd*>& grads,
               AdamState& state, const AdamHyper& hyper);

/// Convenience overload pulling gradients out of a backward result.
void adam_step(const std::vector<Tensor*>& params, const Gradients& grads, AdamState& state,
               const AdamHyper& hyper);

}  // namespace led
