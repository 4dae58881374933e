// Copyright 2026 The jrtok Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace jrtok::gradnet {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

namespace detail {

struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> inputs;
  /// Reads this node's grad and accumulates into the inputs' grads.
  std::function<void(Node&)> backward;

  std::vector<double>& grad_buffer() {
    if (grad.empty()) grad.assign(value.size(), 0.0);
    return grad;
  }
};

}  // namespace detail

/// Dense row-major tensor with an optional reverse-mode tape. Copies share
/// the underlying node (handle semantics); use clone() for a deep copy.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t dim(std::size_t i) const { return node_->shape.at(i); }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t numel() const { return node_->value.size(); }

  std::span<const double> values() const { return node_->value; }
  /// Direct write access; only meaningful for leaves (parameters, inputs).
  std::span<double> mutable_values() { return node_->value; }
  double item() const;
  double at(std::size_t i) const { return node_->value[i]; }

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool on) { node_->requires_grad = on; }
  /// Empty until a backward pass reaches this tensor.
  std::span<const double> grad() const { return node_->grad; }
  std::vector<double> grad_or_zeros() const;
  void zero_grad() { node_->grad.clear(); }

  /// Same values, no tape, no gradient.
  Tensor detach() const;
  Tensor clone() const;

  /// Internal: used by op implementations.
  const std::shared_ptr<detail::Node>& node() const { return node_; }
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

 private:
  std::shared_ptr<detail::Node> node_;
};

/// Creates an op result. The tape is recorded only when some input needs a
/// gradient, so inference on frozen weights builds no graph.
Tensor make_result(Shape shape, std::vector<double> value, std::vector<Tensor> inputs,
                   std::function<void(detail::Node&)> backward);

/// Reverse-mode pass from a scalar root. Gradients accumulate into every
/// reachable tensor that requires them. Throws NonScalarRoot.
void backward(const Tensor& root);

}  // namespace jrtok::gradnet
