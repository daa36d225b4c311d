// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <vector>

#include "led/tensor.hpp"

namespace led {

enum class OpKind : std::uint8_t {
  kLeaf,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kNeg,
  kExp,
  kLog,
  kTanh,
  kSigmoid,
  kRelu,
  kElu,
  kSoftplus,
  kClamp,
  kMatMul,
  kSum,
  kMean,
  kLogSumExp,
};

/// One recorded operation. Inputs are node ids that always precede the node
/// itself (append-only recording), so a single reverse sweep is a valid
/// reverse-topological traversal.
struct TapeNode {
  OpKind op = OpKind::kLeaf;
  int lhs = -1;
  int rhs = -1;
  Shape shape;
  std::shared_ptr<const Eigen::ArrayXd> value;
  double lo = 0.0, hi = 0.0;  // clamp bounds
  int axis = -1;              // reductions; -1 means reduce all
  bool requires_grad = false;
  bool is_param = false;
};

/// Gradient map produced by Tape::backward: one adjoint array per
/// grad-requiring node, addressed through the tensors that were recorded.
class Gradients {
 public:
  const Eigen::ArrayXd& at(const Tensor& t) const;
  bool contains(const Tensor& t) const;
  double norm() const;

 private:
  friend class Tape;
  const Tape* tape_ = nullptr;
  std::vector<Eigen::ArrayXd> adj_;
  std::vector<bool> has_;
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Records `t`'s values as a gradient-requiring leaf and returns the
  /// on-tape tensor.
  Tensor param(const Tensor& t);

  /// Records a leaf that does not require gradients.
  Tensor constant(const Tensor& t);

  /// Binds an existing tensor onto the tape in place, as a parameter leaf.
  void watch(Tensor& t);
  /// Severs the tensor from this tape (values are kept).
  static void unbind(Tensor& t);

  /// Reverse accumulation from a scalar loss. Gradients exist for every node
  /// with requires_grad on a path to the loss; parameters disconnected from
  /// the loss get explicit zero gradients. May be called repeatedly, with
  /// different losses, on one tape.
  Gradients backward(const Tensor& loss) const;

  int size() const { return static_cast<int>(nodes_.size()); }
  const TapeNode& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }

  /// Recording interface used by the ops layer.
  int emit(TapeNode n);
  Tensor wrap(int id) const;
  int ensure_recorded(const Tensor& t);

 private:
  std::vector<TapeNode> nodes_;
};

/// Binds a parameter set onto a tape for the duration of a scope; unbinding on
/// destruction keeps the owning modules usable after the tape dies.
class ParamScope {
 public:
  ParamScope(Tape& tape, std::vector<Tensor*> params);
  ~ParamScope();
  ParamScope(const ParamScope&) = delete;
  ParamScope& operator=(const ParamScope&) = delete;

 private:
  std::vector<Tensor*> params_;
};

}  // namespace led
