// SPDX-License-Identifier: Apache-2.0
#include "led/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace led {

Tensor activate(Activation act, const Tensor& x) {
  switch (act) {
    case Activation::kRelu:
      return relu(x);
    case Activation::kTanh:
      return tanh(x);
    case Activation::kElu:
      return elu(x);
  }
  throw std::logic_error("activate: unknown activation");
}

Activation activation_from_name(const std::string& name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  if (name == "elu") return Activation::kElu;
  throw std::invalid_argument("unknown activation '" + name + "'");
}

std::string activation_name(Activation act) {
  switch (act) {
    case Activation::kRelu:
      return "relu";
    case Activation::kTanh:
      return "tanh";
    case Activation::kElu:
      return "elu";
  }
  return "?";
}

DenseLayer DenseLayer::init(Index in, Index out, Rng& rng) {
  DenseLayer l;
  l.w = Tensor::randn({in, out}, rng, std::sqrt(2.0 / static_cast<double>(in)));
  l.b = Tensor::zeros({out});
  return l;
}

DenseLayer DenseLayer::zeros(Index in, Index out) {
  DenseLayer l;
  l.w = Tensor::zeros({in, out});
  l.b = Tensor::zeros({out});
  return l;
}

void DenseLayer::append_params(const std::string& prefix, std::vector<NamedParam>& out) {
  out.push_back({prefix + ".w", &w});
  out.push_back({prefix + ".b", &b});
}

Mlp Mlp::make(const std::vector<Index>& sizes, Activation act, Rng& rng, bool zero_output) {
  if (sizes.size() < 2) throw std::invalid_argument("Mlp::make: need at least input and output sizes");
  Mlp m;
  m.act = act;
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    const bool last = i + 2 == sizes.size();
    m.layers.push_back(last && zero_output ? DenseLayer::zeros(sizes[i], sizes[i + 1])
                                           : DenseLayer::init(sizes[i], sizes[i + 1], rng));
  }
  return m;
}

Tensor Mlp::operator()(Tensor x) const {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    x = layers[i](x);
    if (i + 1 < layers.size()) x = activate(act, x);
  }
  return x;
}

void Mlp::append_params(const std::string& prefix, std::vector<NamedParam>& out) {
  for (std::size_t i = 0; i < layers.size(); ++i) layers[i].append_params(prefix + "." + std::to_string(i), out);
}

std::vector<Tensor*> param_pointers(const std::vector<NamedParam>& named) {
  std::vector<Tensor*> out;
  out.reserve(named.size());
  for (const auto& p : named) out.push_back(p.tensor);
  return out;
}

}  // namespace led
