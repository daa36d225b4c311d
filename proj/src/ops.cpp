// SPDX-License-Identifier: Apache-2.0
#include "led/ops.hpp"

#include <cmath>
#include <stdexcept>

#include "led/detail/axes.hpp"

namespace led {

using Eigen::ArrayXd;

namespace {

Tape* joint_tape(const Tensor& a, const Tensor* b = nullptr) {
  Tape* ta = a.tape();
  Tape* tb = b ? b->tape() : nullptr;
  if (ta && tb && ta != tb) throw std::logic_error("ops: operands recorded on different tapes");
  return ta ? ta : tb;
}

Tensor finish_unary(OpKind op, const Tensor& a, Shape shape, ArrayXd out, double lo = 0, double hi = 0,
                    int axis = -1) {
  Tape* tp = joint_tape(a);
  if (!tp) return Tensor(std::move(shape), std::move(out));
  TapeNode n;
  n.op = op;
  n.lhs = tp->ensure_recorded(a);
  n.shape = std::move(shape);
  n.value = std::make_shared<const ArrayXd>(std::move(out));
  n.lo = lo;
  n.hi = hi;
  n.axis = axis;
  n.requires_grad = tp->node(n.lhs).requires_grad;
  return tp->wrap(tp->emit(std::move(n)));
}

Tensor finish_binary(OpKind op, const Tensor& a, const Tensor& b, Shape shape, ArrayXd out) {
  Tape* tp = joint_tape(a, &b);
  if (!tp) return Tensor(std::move(shape), std::move(out));
  TapeNode n;
  n.op = op;
  n.lhs = tp->ensure_recorded(a);
  n.rhs = tp->ensure_recorded(b);
  n.shape = std::move(shape);
  n.value = std::make_shared<const ArrayXd>(std::move(out));
  n.requires_grad = tp->node(n.lhs).requires_grad || tp->node(n.rhs).requires_grad;
  return tp->wrap(tp->emit(std::move(n)));
}

void check_broadcast(const char* op, const Tensor& a, const Tensor& b) {
  if (!detail::broadcastable(a.shape(), b.shape()))
    throw std::invalid_argument(std::string(op) + ": shape " + shape_str(b.shape()) +
                                " does not broadcast over " + shape_str(a.shape()));
}

template <typename F>
ArrayXd bcast(const ArrayXd& a, const ArrayXd& b, F&& f) {
  if (a.size() == b.size()) return f(a, b);
  if (b.size() == 1) return f(a, ArrayXd::Constant(a.size(), b[0]));
  ArrayXd out(a.size());
  const Index bs = b.size();
  for (Index r = 0; r < a.size() / bs; ++r) out.segment(r * bs, bs) = f(a.segment(r * bs, bs), b);
  return out;
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  check_broadcast("add", a, b);
  return finish_binary(OpKind::kAdd, a, b, a.shape(),
                       bcast(a.values(), b.values(), [](const auto& x, const auto& y) -> ArrayXd { return x + y; }));
}

Tensor sub(const Tensor& a, const Tensor& b) {
  check_broadcast("sub", a, b);
  return finish_binary(OpKind::kSub, a, b, a.shape(),
                       bcast(a.values(), b.values(), [](const auto& x, const auto& y) -> ArrayXd { return x - y; }));
}

Tensor mul(const Tensor& a, const Tensor& b) {
  check_broadcast("mul", a, b);
  return finish_binary(OpKind::kMul, a, b, a.shape(),
                       bcast(a.values(), b.values(), [](const auto& x, const auto& y) -> ArrayXd { return x * y; }));
}

Tensor div(const Tensor& a, const Tensor& b) {
  check_broadcast("div", a, b);
  if ((b.values() == 0.0).any()) throw std::domain_error("div: zero divisor");
  return finish_binary(OpKind::kDiv, a, b, a.shape(),
                       bcast(a.values(), b.values(), [](const auto& x, const auto& y) -> ArrayXd { return x / y; }));
}

Tensor neg(const Tensor& a) { return finish_unary(OpKind::kNeg, a, a.shape(), -a.values()); }

Tensor exp(const Tensor& a) { return finish_unary(OpKind::kExp, a, a.shape(), a.values().exp()); }

Tensor log(const Tensor& a) {
  if ((a.values() <= 0.0).any()) throw std::domain_error("log: non-positive input");
  return finish_unary(OpKind::kLog, a, a.shape(), a.values().log());
}

Tensor tanh(const Tensor& a) { return finish_unary(OpKind::kTanh, a, a.shape(), a.values().tanh()); }

Tensor sigmoid(const Tensor& a) {
  return finish_unary(OpKind::kSigmoid, a, a.shape(), 1.0 / (1.0 + (-a.values()).exp()));
}

Tensor relu(const Tensor& a) {
  return finish_unary(OpKind::kRelu, a, a.shape(), a.values().max(0.0));
}

Tensor elu(const Tensor& a) {
  const ArrayXd& v = a.values();
  return finish_unary(OpKind::kElu, a, a.shape(), (v > 0.0).select(v, v.exp() - 1.0));
}

Tensor softplus(const Tensor& a) {
  // max(x,0) + log1p(exp(-|x|)), exact and overflow-free
  const ArrayXd& v = a.values();
  ArrayXd out = v.max(0.0) + (-v.abs()).exp().log1p();
  return finish_unary(OpKind::kSoftplus, a, a.shape(), std::move(out));
}

Tensor clamp(const Tensor& a, double lo, double hi) {
  if (!(lo < hi)) throw std::invalid_argument("clamp: lo must be < hi");
  return finish_unary(OpKind::kClamp, a, a.shape(), a.values().max(lo).min(hi), lo, hi);
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2)
    throw std::invalid_argument("matmul: expects rank-2 tensors, got " + shape_str(a.shape()) + " and " +
                                shape_str(b.shape()));
  if (a.dim(1) != b.dim(0))
    throw std::invalid_argument("matmul: inner dimensions disagree, " + shape_str(a.shape()) + " vs " +
                                shape_str(b.shape()));
  const Index m = a.dim(0), k = a.dim(1), c = b.dim(1);
  ArrayXd out(m * c);
  Eigen::Map<detail::MatRM>(out.data(), m, c) = Eigen::Map<const detail::MatRM>(a.values().data(), m, k) *
                                                Eigen::Map<const detail::MatRM>(b.values().data(), k, c);
  return finish_binary(OpKind::kMatMul, a, b, {m, c}, std::move(out));
}

namespace {

Shape drop_axis(const Shape& s, int axis) {
  Shape out;
  for (int i = 0; i < static_cast<int>(s.size()); ++i)
    if (i != axis) out.push_back(s[static_cast<std::size_t>(i)]);
  return out;
}

Tensor reduce_all(OpKind op, const Tensor& a) {
  const ArrayXd& v = a.values();
  double r = 0;
  switch (op) {
    case OpKind::kSum:
      r = v.sum();
      break;
    case OpKind::kMean:
      r = v.mean();
      break;
    case OpKind::kLogSumExp: {
      double m = v.maxCoeff();
      r = m + std::log((v - m).exp().sum());
      break;
    }
    default:
      break;
  }
  return finish_unary(op, a, {}, ArrayXd::Constant(1, r), 0, 0, -1);
}

Tensor reduce_axis(OpKind op, const Tensor& a, int axis) {
  const auto d = detail::axis_dims(a.shape(), axis);
  const ArrayXd& v = a.values();
  ArrayXd out = ArrayXd::Zero(d.lead * d.trail);
  if (op == OpKind::kLogSumExp) {
    ArrayXd mx = ArrayXd::Constant(d.lead * d.trail, -std::numeric_limits<double>::infinity());
    for (Index l = 0; l < d.lead; ++l)
      for (Index j = 0; j < d.n; ++j)
        mx.segment(l * d.trail, d.trail) =
            mx.segment(l * d.trail, d.trail).max(v.segment((l * d.n + j) * d.trail, d.trail));
    for (Index l = 0; l < d.lead; ++l)
      for (Index j = 0; j < d.n; ++j)
        out.segment(l * d.trail, d.trail) +=
            (v.segment((l * d.n + j) * d.trail, d.trail) - mx.segment(l * d.trail, d.trail)).exp();
    out = mx + out.log();
  } else {
    for (Index l = 0; l < d.lead; ++l)
      for (Index j = 0; j < d.n; ++j)
        out.segment(l * d.trail, d.trail) += v.segment((l * d.n + j) * d.trail, d.trail);
    if (op == OpKind::kMean) out /= static_cast<double>(d.n);
  }
  return finish_unary(op, a, drop_axis(a.shape(), axis), std::move(out), 0, 0, axis);
}

}  // namespace

Tensor sum(const Tensor& a) { return reduce_all(OpKind::kSum, a); }
Tensor sum(const Tensor& a, int axis) { return reduce_axis(OpKind::kSum, a, axis); }
Tensor mean(const Tensor& a) { return reduce_all(OpKind::kMean, a); }
Tensor mean(const Tensor& a, int axis) { return reduce_axis(OpKind::kMean, a, axis); }
Tensor logsumexp(const Tensor& a) { return reduce_all(OpKind::kLogSumExp, a); }
Tensor logsumexp(const Tensor& a, int axis) { return reduce_axis(OpKind::kLogSumExp, a, axis); }

}  // namespace led
