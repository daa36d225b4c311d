// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <utility>
#include <vector>

#include "led/nn.hpp"

namespace led {

/// Autoregressive degrees for a masked network: one degree per input
/// coordinate and one per hidden unit. Connectivity masks derived from these
/// degrees make output i a function of exactly the inputs with degree < i.
struct DegreeAssignment {
  std::vector<int> input;                // degree of each input coordinate
  std::vector<std::vector<int>> hidden;  // per hidden layer, per unit
};

/// Identity ordering degrees 1..d, or the reversed ordering d..1 (successive
/// IAF layers alternate so no coordinate is always last).
std::vector<int> natural_degrees(Index d);
std::vector<int> reversed_degrees(Index d);

/// Hidden degrees drawn uniformly from [1, d-1] (from the mask-choice
/// stream), fixed at construction; degenerate d = 1 uses degree 1.
DegreeAssignment assign_degrees(const std::vector<int>& input_degrees,
                                const std::vector<Index>& hidden_sizes, Rng& rng);

/// Connectivity mask in the (in, out) row-major layout of DenseLayer weights:
/// entry [j, k] = 1 iff out_deg[k] >= in_deg[j], or strictly > when `strict`
/// (the output-layer rule).
Eigen::ArrayXd made_mask(const std::vector<int>& in_deg, const std::vector<int>& out_deg,
                         bool strict);

/// MADE conditioner: masked MLP emitting a shift head mu and a raw-scale head
/// s, each of the input dimension. (mu_i, s_i) depend only on inputs with
/// degree strictly below degree(i); all other Jacobian entries are exactly
/// zero by mask construction.
struct MadeConditioner {
  DegreeAssignment degrees;
  std::vector<DenseLayer> hidden_layers;
  std::vector<Tensor> hidden_masks;  // constants, aligned with hidden_layers
  DenseLayer mu_head, s_head;
  Tensor out_mask;  // strict-rule mask shared by both heads
  Activation act = Activation::kRelu;

  /// Random hidden weights (He-scaled, masked), zero-initialized heads; the
  /// raw-scale head bias starts at `s_bias` uniformly.
  static MadeConditioner init(const std::vector<int>& input_degrees,
                              const std::vector<Index>& hidden_sizes, Activation act, Rng& rng,
                              double s_bias = 0.0);

  /// z: [batch, d] -> (mu, s_raw), both [batch, d].
  std::pair<Tensor, Tensor> operator()(const Tensor& z) const;

  Index dim() const { return static_cast<Index>(degrees.input.size()); }
  void append_params(const std::string& prefix, std::vector<NamedParam>& out);
};

}  // namespace led
