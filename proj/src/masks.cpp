// SPDX-License-Identifier: Apache-2.0
#include "led/masks.hpp"

#include <numeric>
#include <stdexcept>
#include <vector>

namespace led {

MaskSpec complement(const MaskSpec& m) {
  MaskSpec out;
  out.dim = m.dim;
  out.bits = 1.0 - m.bits;
  out.kind = MaskKind::kComplement;
  return out;
}

MaskSpec make_mask(Index dim, MaskKind kind, Rng& rng,
                   std::optional<std::pair<Index, Index>> spatial) {
  if (dim < 2) throw std::invalid_argument("make_mask: dim must be >= 2");
  if (kind == MaskKind::kComplement)
    throw std::invalid_argument("make_mask: complement masks derive from an existing mask");

  MaskSpec m;
  m.dim = dim;
  m.kind = kind;
  m.bits = Eigen::ArrayXd::Zero(dim);

  if (kind == MaskKind::kRandomHalf) {
    // Exactly floor(dim/2) ones at uniformly chosen positions.
    std::vector<Index> idx(static_cast<std::size_t>(dim));
    std::iota(idx.begin(), idx.end(), Index{0});
    rng.shuffle(idx);
    for (Index i = 0; i < dim / 2; ++i) m.bits[idx[static_cast<std::size_t>(i)]] = 1.0;
    return m;
  }

  if (spatial) {
    const auto [rows, cols] = *spatial;
    if (rows * cols != dim)
      throw std::invalid_argument("make_mask: spatial shape does not cover dim");
    for (Index r = 0; r < rows; ++r)
      for (Index c = 0; c < cols; ++c) m.bits[r * cols + c] = static_cast<double>((r + c) % 2);
  } else {
    for (Index i = 0; i < dim; ++i) m.bits[i] = static_cast<double>(i % 2);
  }
  return m;
}

}  // namespace led
