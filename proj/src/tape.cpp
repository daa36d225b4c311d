// SPDX-License-Identifier: Apache-2.0
#include "led/tape.hpp"

#include <cmath>
#include <stdexcept>

#include "led/detail/axes.hpp"

namespace led {

using Eigen::ArrayXd;

const ArrayXd& Gradients::at(const Tensor& t) const {
  if (t.tape() != tape_ || t.node() < 0) throw std::logic_error("Gradients::at: tensor not on this tape");
  auto id = static_cast<std::size_t>(t.node());
  if (id >= has_.size() || !has_[id])
    throw std::logic_error("Gradients::at: no gradient for node " + std::to_string(t.node()));
  return adj_[id];
}

bool Gradients::contains(const Tensor& t) const {
  if (t.tape() != tape_ || t.node() < 0) return false;
  auto id = static_cast<std::size_t>(t.node());
  return id < has_.size() && has_[id];
}

double Gradients::norm() const {
  double s = 0.0;
  for (std::size_t i = 0; i < adj_.size(); ++i)
    if (has_[i] && tape_->node(static_cast<int>(i)).is_param) s += adj_[i].square().sum();
  return std::sqrt(s);
}

int Tape::emit(TapeNode n) {
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

Tensor Tape::wrap(int id) const {
  const TapeNode& n = nodes_[static_cast<std::size_t>(id)];
  Tensor t;
  t.shape_ = n.shape;
  t.values_ = n.value;
  t.tape_ = const_cast<Tape*>(this);
  t.node_ = id;
  return t;
}

int Tape::ensure_recorded(const Tensor& t) {
  if (t.tape() == this) return t.node();
  if (t.tape() != nullptr) throw std::logic_error("Tape: tensor belongs to a different tape");
  TapeNode n;
  n.op = OpKind::kLeaf;
  n.shape = t.shape();
  n.value = t.storage();
  return emit(std::move(n));
}

Tensor Tape::param(const Tensor& t) {
  TapeNode n;
  n.op = OpKind::kLeaf;
  n.shape = t.shape();
  n.value = t.storage();
  n.requires_grad = true;
  n.is_param = true;
  return wrap(emit(std::move(n)));
}

Tensor Tape::constant(const Tensor& t) {
  return wrap(ensure_recorded(t));
}

void Tape::watch(Tensor& t) {
  if (t.tape() == this) return;
  if (t.tape() != nullptr) throw std::logic_error("Tape::watch: tensor already bound elsewhere");
  TapeNode n;
  n.op = OpKind::kLeaf;
  n.shape = t.shape();
  n.value = t.storage();
  n.requires_grad = true;
  n.is_param = true;
  t.node_ = emit(std::move(n));
  t.tape_ = this;
}

void Tape::unbind(Tensor& t) {
  t.tape_ = nullptr;
  t.node_ = -1;
}

namespace {

ArrayXd tile_like(const ArrayXd& b, Index total) {
  if (b.size() == total) return b;
  ArrayXd out(total);
  if (b.size() == 1) {
    out.setConstant(b[0]);
    return out;
  }
  for (Index r = 0; r < total / b.size(); ++r) out.segment(r * b.size(), b.size()) = b;
  return out;
}

// Collapses `g` (size = multiple of bsize) back to bsize by summing the
// leading copies; the adjoint of a trailing-dimension broadcast.
ArrayXd reduce_to(const ArrayXd& g, Index bsize) {
  if (g.size() == bsize) return g;
  ArrayXd out = ArrayXd::Zero(bsize);
  if (bsize == 1) {
    out[0] = g.sum();
    return out;
  }
  for (Index r = 0; r < g.size() / bsize; ++r) out += g.segment(r * bsize, bsize);
  return out;
}

}  // namespace

Gradients Tape::backward(const Tensor& loss) const {
  if (loss.tape() != this) throw std::logic_error("backward: loss is not recorded on this tape");
  if (loss.size() != 1) throw std::logic_error("backward: loss must be a scalar, got " + shape_str(loss.shape()));

  const int top = loss.node();
  std::vector<ArrayXd> adj(nodes_.size());
  std::vector<bool> has(nodes_.size(), false);
  adj[static_cast<std::size_t>(top)] = ArrayXd::Ones(1);
  has[static_cast<std::size_t>(top)] = true;

  auto acc = [&](int id, ArrayXd contrib) {
    if (id < 0 || !nodes_[static_cast<std::size_t>(id)].requires_grad) return;
    auto i = static_cast<std::size_t>(id);
    if (!has[i]) {
      adj[i] = std::move(contrib);
      has[i] = true;
    } else {
      adj[i] += contrib;
    }
  };

  for (int i = top; i >= 0; --i) {
    const auto ui = static_cast<std::size_t>(i);
    if (!has[ui] || !nodes_[ui].requires_grad) continue;
    const TapeNode& n = nodes_[ui];
    if (n.op == OpKind::kLeaf) continue;
    const ArrayXd& g = adj[ui];
    const ArrayXd& out = *n.value;
    const ArrayXd& a = *nodes_[static_cast<std::size_t>(n.lhs)].value;

    switch (n.op) {
      case OpKind::kAdd: {
        const ArrayXd& b = *nodes_[static_cast<std::size_t>(n.rhs)].value;
        acc(n.lhs, g);
        acc(n.rhs, reduce_to(g, b.size()));
        break;
      }
      case OpKind::kSub: {
        const ArrayXd& b = *nodes_[static_cast<std::size_t>(n.rhs)].value;
        acc(n.lhs, g);
        acc(n.rhs, -reduce_to(g, b.size()));
        break;
      }
      case OpKind::kMul: {
        const ArrayXd& b = *nodes_[static_cast<std::size_t>(n.rhs)].value;
        acc(n.lhs, g * tile_like(b, g.size()));
        acc(n.rhs, reduce_to(g * a, b.size()));
        break;
      }
      case OpKind::kDiv: {
        const ArrayXd& b = *nodes_[static_cast<std::size_t>(n.rhs)].value;
        acc(n.lhs, g / tile_like(b, g.size()));
        acc(n.rhs, -reduce_to(g * out, b.size()) / b);
        break;
      }
      case OpKind::kNeg:
        acc(n.lhs, -g);
        break;
      case OpKind::kExp:
        acc(n.lhs, g * out);
        break;
      case OpKind::kLog:
        acc(n.lhs, g / a);
        break;
      case OpKind::kTanh:
        acc(n.lhs, g * (1.0 - out.square()));
        break;
      case OpKind::kSigmoid:
        acc(n.lhs, g * out * (1.0 - out));
        break;
      case OpKind::kRelu:
        acc(n.lhs, (a > 0.0).select(g, 0.0));
        break;
      case OpKind::kElu:
        acc(n.lhs, (a > 0.0).select(g, g * (out + 1.0)));
        break;
      case OpKind::kSoftplus:
        acc(n.lhs, g * (1.0 / (1.0 + (-a).exp())));
        break;
      case OpKind::kClamp:
        acc(n.lhs, (a > n.lo && a < n.hi).select(g, 0.0));
        break;
      case OpKind::kMatMul: {
        const ArrayXd& b = *nodes_[static_cast<std::size_t>(n.rhs)].value;
        const TapeNode& ln = nodes_[static_cast<std::size_t>(n.lhs)];
        const Index m = ln.shape[0], k = ln.shape[1], c = n.shape[1];
        Eigen::Map<const detail::MatRM> A(a.data(), m, k), B(b.data(), k, c), G(g.data(), m, c);
        ArrayXd ga(m * k), gb(k * c);
        Eigen::Map<detail::MatRM>(ga.data(), m, k) = G * B.transpose();
        Eigen::Map<detail::MatRM>(gb.data(), k, c) = A.transpose() * G;
        acc(n.lhs, std::move(ga));
        acc(n.rhs, std::move(gb));
        break;
      }
      case OpKind::kSum:
      case OpKind::kMean: {
        const auto& in_shape = nodes_[static_cast<std::size_t>(n.lhs)].shape;
        ArrayXd contrib(a.size());
        if (n.axis < 0) {
          contrib.setConstant(g[0]);
          if (n.op == OpKind::kMean) contrib /= static_cast<double>(a.size());
        } else {
          const auto d = detail::axis_dims(in_shape, n.axis);
          const double scale = n.op == OpKind::kMean ? 1.0 / static_cast<double>(d.n) : 1.0;
          for (Index l = 0; l < d.lead; ++l)
            for (Index j = 0; j < d.n; ++j)
              contrib.segment((l * d.n + j) * d.trail, d.trail) = scale * g.segment(l * d.trail, d.trail);
        }
        acc(n.lhs, std::move(contrib));
        break;
      }
      case OpKind::kLogSumExp: {
        const auto& in_shape = nodes_[static_cast<std::size_t>(n.lhs)].shape;
        ArrayXd contrib(a.size());
        if (n.axis < 0) {
          contrib = g[0] * (a - out[0]).exp();
        } else {
          const auto d = detail::axis_dims(in_shape, n.axis);
          for (Index l = 0; l < d.lead; ++l)
            for (Index j = 0; j < d.n; ++j)
              contrib.segment((l * d.n + j) * d.trail, d.trail) =
                  g.segment(l * d.trail, d.trail) *
                  (a.segment((l * d.n + j) * d.trail, d.trail) - out.segment(l * d.trail, d.trail)).exp();
        }
        acc(n.lhs, std::move(contrib));
        break;
      }
      case OpKind::kLeaf:
        break;
    }
  }

  Gradients grads;
  grads.tape_ = this;
  // A parameter with no path to the loss has gradient exactly zero.
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].is_param && !has[i]) {
      adj[i] = ArrayXd::Zero(nodes_[i].value->size());
      has[i] = true;
    }
  }
  grads.adj_ = std::move(adj);
  grads.has_ = std::move(has);
  return grads;
}

ParamScope::ParamScope(Tape& tape, std::vector<Tensor*> params) : params_(std::move(params)) {
  for (Tensor* t : params_) tape.watch(*t);
}

ParamScope::~ParamScope() {
  for (Tensor* t : params_) Tape::unbind(*t);
}

}  // namespace led
