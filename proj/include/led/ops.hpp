// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "led/tape.hpp"
#include "led/tensor.hpp"

namespace led {

// Elementwise operations over tensors. Binary ops accept equal shapes or a
// right operand that is scalar / a trailing suffix of the left shape; the
// result takes the left shape. When any input is on a tape the result is
// recorded and differentiable; otherwise these are plain value computations.

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);  // right operand must be nonzero everywhere
Tensor neg(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);  // domain error on non-positive entries
Tensor tanh(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor elu(const Tensor& a);
Tensor softplus(const Tensor& a);
Tensor clamp(const Tensor& a, double lo, double hi);

/// Standard matrix product over rank-2 tensors; gradients flow to both sides.
Tensor matmul(const Tensor& a, const Tensor& b);

// Reductions. Without an axis they collapse to a rank-0 scalar; with an axis
// that dimension is removed. logsumexp uses the max-subtraction form.
Tensor sum(const Tensor& a);
Tensor sum(const Tensor& a, int axis);
Tensor mean(const Tensor& a);
Tensor mean(const Tensor& a, int axis);
Tensor logsumexp(const Tensor& a);
Tensor logsumexp(const Tensor& a, int axis);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator/(const Tensor& a, const Tensor& b) { return div(a, b); }
inline Tensor operator-(const Tensor& a) { return neg(a); }

}  // namespace led
