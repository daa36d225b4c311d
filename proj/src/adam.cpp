// SPDX-License-Identifier: Apache-2.0
#include "led/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace led {

AdamState AdamState::init(const std::vector<Tensor*>& params) {
  AdamState s;
  s.m.reserve(params.size());
  s.v.reserve(params.size());
  for (const Tensor* p : params) {
    s.m.push_back(Eigen::ArrayXd::Zero(p->size()));
    s.v.push_back(Eigen::ArrayXd::Zero(p->size()));
  }
  return s;
}

void adam_step(const std::vector<Tensor*>& params, const std::vector<const Eigen::ArrayXd*>& grads,
               AdamState& state, const AdamHyper& hyper) {
  if (params.size() != grads.size() || params.size() != state.m.size())
    throw std::invalid_argument("adam_step: params/grads/state sizes disagree");
  state.t += 1;
  const double c1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Eigen::ArrayXd& g = *grads[i];
    if (g.size() != params[i]->size()) throw std::invalid_argument("adam_step: gradient shape mismatch");
    state.m[i] = hyper.beta1 * state.m[i] + (1.0 - hyper.beta1) * g;
    state.v[i] = hyper.beta2 * state.v[i] + (1.0 - hyper.beta2) * g.square();
    Eigen::ArrayXd mhat = state.m[i] / c1;
    Eigen::ArrayXd vhat = state.v[i] / c2;
    params[i]->assign(params[i]->values() - hyper.lr * mhat / (vhat.sqrt() + hyper.eps));
  }
}

void adam_step(const std::vector<Tensor*>& params, const Gradients& grads, AdamState& state,
               const AdamHyper& hyper) {
  std::vector<const Eigen::ArrayXd*> g;
  g.reserve(params.size());
  for (const Tensor* p : params) g.push_back(&grads.at(*p));
  adam_step(params, g, state, hyper);
}

}  // namespace led
