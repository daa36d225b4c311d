// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <initializer_list>
#include <memory>
#include <vector>

namespace led {

class Rng;
class Tape;

using Index = Eigen::Index;
using Shape = std::vector<Index>;

Index shape_size(const Shape& s);
std::string shape_str(const Shape& s);

/// Dense 64-bit-float tensor with a flat row-major value array and optional
/// membership in a computation tape. Values are immutable once constructed;
/// "mutation" (parameter updates) replaces the value array.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, Eigen::ArrayXd values);

  static Tensor zeros(const Shape& shape);
  static Tensor full(const Shape& shape, double v);
  static Tensor scalar(double v) { return full({}, v); }
  static Tensor from(const Shape& shape, std::initializer_list<double> v);
  static Tensor from(const Shape& shape, const std::vector<double>& v);
  /// i.i.d. standard normal entries drawn in flat order.
  static Tensor randn(const Shape& shape, Rng& rng, double scale = 1.0);

  const Shape& shape() const { return shape_; }
  Index rank() const { return static_cast<Index>(shape_.size()); }
  Index dim(Index i) const { return shape_[static_cast<std::size_t>(i)]; }
  Index size() const { return values_ ? values_->size() : 0; }
  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

  const Eigen::ArrayXd& values() const { return *values_; }
  const std::shared_ptr<const Eigen::ArrayXd>& storage() const { return values_; }
  /// Scalar access; requires size() == 1.
  double value() const;
  double at(Index flat) const { return (*values_)[flat]; }
  /// Rank-2 access, row-major.
  double at(Index r, Index c) const { return (*values_)[r * shape_[1] + c]; }

  /// Replaces the value array (used by optimizers); drops tape membership.
  void assign(Eigen::ArrayXd values);

  bool on_tape() const { return tape_ != nullptr; }
  Tape* tape() const { return tape_; }
  int node() const { return node_; }

  bool all_finite() const { return values_ && values_->isFinite().all(); }

 private:
  Shape shape_;
  std::shared_ptr<const Eigen::ArrayXd> values_;
  Tape* tape_ = nullptr;
  int node_ = -1;

  friend class Tape;
};

}  // namespace led
