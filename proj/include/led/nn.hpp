// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "led/ops.hpp"
#include "led/rng.hpp"

namespace led {

enum class Activation { kRelu, kTanh, kElu };

Tensor activate(Activation act, const Tensor& x);
Activation activation_from_name(const std::string& name);
std::string activation_name(Activation act);

struct NamedParam {
  std::string name;
  Tensor* tensor;
};

struct DenseLayer {
  Tensor w;  // (in, out)
  Tensor b;  // (out,)

  /// He-scaled normal weights from the init stream, zero biases.
  static DenseLayer init(Index in, Index out, Rng& rng);
  static DenseLayer zeros(Index in, Index out);

  Tensor operator()(const Tensor& x) const { return add(matmul(x, w), b); }

  Index fan_in() const { return w.dim(0); }
  Index fan_out() const { return w.dim(1); }
  void append_params(const std::string& prefix, std::vector<NamedParam>& out);
};

/// Plain fully connected stack; activation between layers, linear output.
struct Mlp {
  std::vector<DenseLayer> layers;
  Activation act = Activation::kRelu;

  static Mlp make(const std::vector<Index>& sizes, Activation act, Rng& rng, bool zero_output = false);

  Tensor operator()(Tensor x) const;
  void append_params(const std::string& prefix, std::vector<NamedParam>& out);
};

std::vector<Tensor*> param_pointers(const std::vector<NamedParam>& named);

}  // namespace led
