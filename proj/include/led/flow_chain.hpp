// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "led/coupling.hpp"
#include "led/iaf.hpp"

namespace led {

enum class BaseKind { kStandardNormal, kUniformUnitBox };

/// Fixed (parameter-free) invertible layers used to move between R^d and
/// boxes: logit : (0,1)^d -> R^d, sigmoid : R^d -> (0,1)^d, and the affine map
/// (0,1)^d -> prod_i (lo_i, lo_i + width_i).
struct LogitLayer {};
struct SigmoidLayer {};
struct AffineBoxLayer {
  Eigen::ArrayXd lo, width;  // width > 0 per coordinate
};

using FlowLayer = std::variant<CouplingLayer, IafLayer, LogitLayer, SigmoidLayer, AffineBoxLayer>;

/// Ordered invertible layers over a base density. Forward maps base draws z0
/// to the modeled space (sampling direction); inverse runs the chain backwards
/// (density direction):
///   log p(z) = log p_base(inverse(z)) + log|d inverse / d z|.
/// Both passes return the accumulated log-Jacobian-determinant of the applied
/// direction, so log_det(forward at x) == -log_det(inverse at forward(x)).
struct FlowChain {
  Index dim = 0;
  BaseKind base = BaseKind::kStandardNormal;
  std::vector<FlowLayer> layers;

  bool empty() const { return layers.empty(); }

  /// z0: [batch, dim] -> (z, log_det[batch]).
  std::pair<Tensor, Tensor> forward(const Tensor& z0) const;
  /// z: [batch, dim] -> (z0, log_det_of_inverse[batch]).
  std::pair<Tensor, Tensor> inverse(const Tensor& z) const;

  /// log p_base; standard normal everywhere, uniform is zero inside the unit
  /// box and a domain error outside.
  Tensor base_log_density(const Tensor& z0) const;
  /// log p(z) by running the inverse chain; differentiable in z and params.
  Tensor log_density(const Tensor& z) const;

  Tensor sample_base(Index n, Rng& rng) const;
  /// Forward-push of base draws; evaluation-only when the chain holds layers
  /// whose forward is a sequential direction.
  Tensor sample(Index n, Rng& rng) const;

  void append_params(const std::string& prefix, std::vector<NamedParam>& out);
};

/// Stack of `n_layers` coupling layers with complement-alternated masks; the
/// first mask is drawn per `kind` (random_half from the mask-choice stream, or
/// checkerboard, optionally spatial).
FlowChain make_nvp_chain(Index dim, Index n_layers, const std::vector<Index>& hidden,
                         Activation act, Rng& mask_rng, Rng& init_rng, MaskKind kind,
                         std::optional<std::pair<Index, Index>> spatial = std::nullopt);

/// Stack of IAF layers with orderings reversed between successive layers.
FlowChain make_iaf_chain(Index dim, Index n_layers, const std::vector<Index>& hidden,
                         Activation act, Rng& init_rng, IafLayer::Init init_mode,
                         bool parallel_is_forward = true);

}  // namespace led
