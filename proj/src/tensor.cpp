// SPDX-License-Identifier: Apache-2.0
#include "led/tensor.hpp"

#include <sstream>
#include <stdexcept>

#include "led/rng.hpp"

namespace led {

Index shape_size(const Shape& s) {
  Index n = 1;
  for (Index d : s) n *= d;
  return n;
}

std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "x" : "") << s[i];
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape shape, Eigen::ArrayXd values) : shape_(std::move(shape)) {
  if (shape_size(shape_) != values.size())
    throw std::invalid_argument("Tensor: shape " + shape_str(shape_) + " does not match " +
                                std::to_string(values.size()) + " values");
  for (Index d : shape_)
    if (d <= 0) throw std::invalid_argument("Tensor: non-positive dimension in " + shape_str(shape_));
  values_ = std::make_shared<const Eigen::ArrayXd>(std::move(values));
}

Tensor Tensor::zeros(const Shape& shape) {
  return Tensor(shape, Eigen::ArrayXd::Zero(shape_size(shape)));
}

Tensor Tensor::full(const Shape& shape, double v) {
  return Tensor(shape, Eigen::ArrayXd::Constant(shape_size(shape), v));
}

Tensor Tensor::from(const Shape& shape, std::initializer_list<double> v) {
  Eigen::ArrayXd a(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) a[i++] = x;
  return Tensor(shape, std::move(a));
}

Tensor Tensor::from(const Shape& shape, const std::vector<double>& v) {
  Eigen::ArrayXd a(static_cast<Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) a[static_cast<Index>(i)] = v[i];
  return Tensor(shape, std::move(a));
}

Tensor Tensor::randn(const Shape& shape, Rng& rng, double scale) {
  Eigen::ArrayXd a(shape_size(shape));
  for (Index i = 0; i < a.size(); ++i) a[i] = scale * rng.normal();
  return Tensor(shape, std::move(a));
}

double Tensor::value() const {
  if (size() != 1) throw std::logic_error("Tensor::value: tensor is not scalar, shape " + shape_str(shape_));
  return (*values_)[0];
}

void Tensor::assign(Eigen::ArrayXd values) {
  if (values.size() != size()) throw std::invalid_argument("Tensor::assign: size mismatch");
  values_ = std::make_shared<const Eigen::ArrayXd>(std::move(values));
  tape_ = nullptr;
  node_ = -1;
}

}  // namespace led
