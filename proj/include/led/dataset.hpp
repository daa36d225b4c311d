// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "led/rng.hpp"
#include "led/tensor.hpp"

namespace led {

/// Strict `.amat` loader: one example per line, exactly `expect_dim`
/// space-separated tokens, each "0" or "1" optionally written with a decimal
/// point ("1.", "0.000"). The whole file is parsed and the line count checked
/// against `expect_rows`; `keep_rows >= 0` stores only the first rows (the
/// rest are still validated). Errors name the file and 1-based line.
Tensor load_amat(const std::string& path, Index expect_dim, Index expect_rows,
                 Index keep_rows = -1);

/// Writes a binary tensor (entries exactly 0 or 1) in the same format, one
/// line per row, single-space separated "0"/"1" tokens.
void write_amat(const std::string& path, const Tensor& x);

struct MnistSplits {
  Tensor train, valid, test;  // [n, 784] binary
};

inline constexpr Index kMnistDim = 784;
inline constexpr Index kMnistTrainRows = 50000;
inline constexpr Index kMnistValidRows = 10000;
inline constexpr Index kMnistTestRows = 10000;

/// Loads binarized_mnist_{train,valid,test}.amat from `dir`, asserting the
/// canonical 50000/10000/10000 x 784 layout. keep_* < 0 keeps everything.
MnistSplits load_binarized_mnist(const std::string& dir, Index keep_train = -1,
                                 Index keep_valid = -1, Index keep_test = -1);

/// Writes the three canonical files to `dir` with synthetic stochastically
/// binarized digit images: per class, a fixed stroke glyph jittered in
/// position, scale, rotation, and stroke width, then each pixel sampled
/// Bernoulli(stroke intensity). Deterministic in `seed`; examples cycle
/// through the ten classes. `rows_override` (testing hook) shrinks the three
/// line counts; the default writes the canonical sizes.
void generate_synthetic_mnist(const std::string& dir, std::uint64_t seed,
                              const std::array<Index, 3>& rows_override = {kMnistTrainRows,
                                                                           kMnistValidRows,
                                                                           kMnistTestRows});

/// Isotropic 2D Gaussian mixture used by the toy experiment.
struct ToyMixture {
  std::vector<std::array<double, 2>> means{{-2.0, 0.0}, {2.0, 0.0}, {0.0, -2.0}, {0.0, 2.0}};
  std::vector<double> sigmas{0.6, 0.6, 0.6, 0.6};
  std::vector<double> weights{0.25, 0.25, 0.25, 0.25};

  std::size_t components() const { return means.size(); }
  /// Throws std::invalid_argument on mismatched sizes, non-positive sigmas,
  /// negative weights, or weights not summing to 1 within 1e-9.
  void validate() const;
};

/// n i.i.d. draws, [n, 2]. Per draw: one uniform picks the component by
/// cumulative weight, then two normals scale onto it.
Tensor toy_mixture_sample(const ToyMixture& mix, Index n, Rng& rng);

double toy_mixture_log_density(const ToyMixture& mix, double x0, double x1);
/// x: [n, 2] -> [n] log densities.
Eigen::ArrayXd toy_mixture_log_density(const ToyMixture& mix, const Tensor& x);

}  // namespace led
