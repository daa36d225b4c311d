// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <utility>

#include "led/rng.hpp"
#include "led/tensor.hpp"

namespace led {

enum class MaskKind { kRandomHalf, kCheckerboard, kComplement };

/// Binary coordinate mask for coupling layers. Masked-in coordinates
/// (bits == 1) pass through unchanged and condition the transform of the
/// masked-out coordinates (bits == 0).
struct MaskSpec {
  Index dim = 0;
  Eigen::ArrayXd bits;  // entries in {0.0, 1.0}
  MaskKind kind = MaskKind::kRandomHalf;

  Index ones() const { return static_cast<Index>(bits.sum()); }
};

/// Complemented mask: bits flipped, so consecutive coupling layers transform
/// every coordinate.
MaskSpec complement(const MaskSpec& m);

/// Builds a mask over `dim` coordinates.
///  - kRandomHalf: exactly floor(dim/2) ones at positions drawn from `rng`
///    (callers pass the mask-choice stream).
///  - kCheckerboard: bit i = i mod 2 for flat layouts; with `spatial`
///    = (rows, cols), bit at (r, c) = (r + c) mod 2, flattened row-major.
/// dim must be >= 2 (and match rows*cols when spatial is given).
MaskSpec make_mask(Index dim, MaskKind kind, Rng& rng,
                   std::optional<std::pair<Index, Index>> spatial = std::nullopt);

}  // namespace led
