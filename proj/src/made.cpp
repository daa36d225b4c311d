// SPDX-License-Identifier: Apache-2.0
#include "led/made.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "led/ops.hpp"

namespace led {

std::vector<int> natural_degrees(Index d) {
  std::vector<int> deg(static_cast<std::size_t>(d));
  std::iota(deg.begin(), deg.end(), 1);
  return deg;
}

std::vector<int> reversed_degrees(Index d) {
  std::vector<int> deg = natural_degrees(d);
  std::reverse(deg.begin(), deg.end());
  return deg;
}

DegreeAssignment assign_degrees(const std::vector<int>& input_degrees,
                                const std::vector<Index>& hidden_sizes, Rng& rng) {
  if (input_degrees.empty()) throw std::invalid_argument("assign_degrees: no input degrees");
  const int max_deg = *std::max_element(input_degrees.begin(), input_degrees.end());
  const int hi = std::max(1, max_deg - 1);
  DegreeAssignment deg;
  deg.input = input_degrees;
  for (Index width : hidden_sizes) {
    if (width < 1) throw std::invalid_argument("assign_degrees: hidden size must be >= 1");
    std::vector<int> layer(static_cast<std::size_t>(width));
    for (int& v : layer) v = 1 + static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(hi)));
    deg.hidden.push_back(std::move(layer));
  }
  return deg;
}

Eigen::ArrayXd made_mask(const std::vector<int>& in_deg, const std::vector<int>& out_deg,
                         bool strict) {
  const Index in = static_cast<Index>(in_deg.size());
  const Index out = static_cast<Index>(out_deg.size());
  Eigen::ArrayXd mask(in * out);
  for (Index j = 0; j < in; ++j)
    for (Index k = 0; k < out; ++k) {
      const bool connected = strict ? out_deg[static_cast<std::size_t>(k)] >
                                          in_deg[static_cast<std::size_t>(j)]
                                    : out_deg[static_cast<std::size_t>(k)] >=
                                          in_deg[static_cast<std::size_t>(j)];
      mask[j * out + k] = connected ? 1.0 : 0.0;
    }
  return mask;
}

MadeConditioner MadeConditioner::init(const std::vector<int>& input_degrees,
                                      const std::vector<Index>& hidden_sizes, Activation act,
                                      Rng& rng, double s_bias) {
  if (hidden_sizes.empty())
    throw std::invalid_argument("MadeConditioner: need at least one hidden layer");
  MadeConditioner c;
  c.act = act;
  c.degrees = assign_degrees(input_degrees, hidden_sizes, rng);
  const Index d = c.dim();

  const std::vector<int>* prev = &c.degrees.input;
  Index prev_width = d;
  for (std::size_t l = 0; l < c.degrees.hidden.size(); ++l) {
    const std::vector<int>& cur = c.degrees.hidden[l];
    c.hidden_layers.push_back(DenseLayer::init(prev_width, hidden_sizes[l], rng));
    c.hidden_masks.emplace_back(Shape{prev_width, hidden_sizes[l]},
                                made_mask(*prev, cur, /*strict=*/false));
    prev = &cur;
    prev_width = hidden_sizes[l];
  }

  c.mu_head = DenseLayer::zeros(prev_width, d);
  c.s_head = DenseLayer::zeros(prev_width, d);
  if (s_bias != 0.0) {
    c.s_head.b.assign(Eigen::ArrayXd::Constant(d, s_bias));
  }
  c.out_mask = Tensor(Shape{prev_width, d}, made_mask(*prev, c.degrees.input, /*strict=*/true));
  return c;
}

std::pair<Tensor, Tensor> MadeConditioner::operator()(const Tensor& z) const {
  if (z.rank() != 2 || z.dim(1) != dim())
    throw std::invalid_argument("MadeConditioner: expected [batch, " + std::to_string(dim()) +
                                "], got " + shape_str(z.shape()));
  Tensor h = z;
  for (std::size_t l = 0; l < hidden_layers.size(); ++l) {
    const DenseLayer& lay = hidden_layers[l];
    h = activate(act, add(matmul(h, mul(lay.w, hidden_masks[l])), lay.b));
  }
  Tensor mu = add(matmul(h, mul(mu_head.w, out_mask)), mu_head.b);
  Tensor s = add(matmul(h, mul(s_head.w, out_mask)), s_head.b);
  return {mu, s};
}

void MadeConditioner::append_params(const std::string& prefix, std::vector<NamedParam>& out) {
  for (std::size_t l = 0; l < hidden_layers.size(); ++l)
    hidden_layers[l].append_params(prefix + ".h" + std::to_string(l), out);
  mu_head.append_params(prefix + ".mu", out);
  s_head.append_params(prefix + ".s", out);
}

}  // namespace led
