// Copyright 2026 The spatialkd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SPATIALKD_NN_TENSOR_HPP_
#define SPATIALKD_NN_TENSOR_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace spatialkd::nn {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape) noexcept;
std::string shape_string(const Shape& shape);

struct TensorImpl;

// Record attached to every tensor produced by a differentiable op while
// gradients are enabled. `backward` reads the owner's grad and accumulates
// into the parents that require grad.
struct Node {
  std::vector<std::shared_ptr<TensorImpl>> parents;
  std::function<void()> backward;
  const char* op = "";
};

struct TensorImpl {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until first accumulation
  bool requires_grad = false;
  std::unique_ptr<Node> node;

  std::vector<double>& ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
    return grad;
  }
};

// Dense row-major float64 tensor with shared, reference-counted storage.
// Copies alias the same storage; use clone() or detach() for a deep copy.
class Tensor {
 public:
  Tensor();
  Tensor(Shape shape, std::vector<double> data, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  const Shape& shape() const noexcept { return impl_->shape; }
  std::size_t dim(std::size_t axis) const { return impl_->shape.at(axis); }
  std::size_t rank() const noexcept { return impl_->shape.size(); }
  std::size_t numel() const noexcept { return impl_->data.size(); }

  std::span<const double> data() const noexcept { return impl_->data; }
  std::span<double> mutable_data() noexcept { return impl_->data; }
  double item() const;
  double operator[](std::size_t i) const { return impl_->data[i]; }

  bool has_grad() const noexcept { return impl_->grad.size() == numel(); }
  std::span<const double> grad() const noexcept { return impl_->grad; }
  void zero_grad() noexcept { impl_->grad.clear(); }

  bool requires_grad() const noexcept { return impl_->requires_grad; }
  void set_requires_grad(bool on) noexcept { impl_->requires_grad = on; }
  bool is_leaf() const noexcept { return impl_->node == nullptr; }

  // Same values, no history, never requires grad.
  Tensor detach() const;
  // Deep copy that keeps requires_grad but drops history.
  Tensor clone() const;

  const std::shared_ptr<TensorImpl>& impl() const noexcept { return impl_; }
  bool same_storage(const Tensor& other) const noexcept {
    return impl_ == other.impl_;
  }

 private:
  explicit Tensor(std::shared_ptr<TensorImpl> impl) : impl_(std::move(impl)) {}
  friend Tensor make_result(Shape, std::vector<double>,
                            std::vector<std::shared_ptr<TensorImpl>>,
                            const char*,
                            std::function<void(TensorImpl&)>);

  std::shared_ptr<TensorImpl> impl_;
};

// Builds an op output. If gradients are enabled and any parent requires
// grad, attaches a Node whose closure receives the output impl.
Tensor make_result(Shape shape, std::vector<double> data,
                   std::vector<std::shared_ptr<TensorImpl>> parents,
                   const char* op,
                   std::function<void(TensorImpl& out)> backward_fn);

// Reverse sweep from a scalar. Leaf grads accumulate across calls; interior
// grads are reset at the start of every call.
void backward(const Tensor& loss);

bool grad_enabled() noexcept;

// Disables graph recording on this thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

// Thread-local multiply-accumulate counter bumped by conv2d, deconv2d,
// linear and lstm as they execute.
class MacCounter {
 public:
  static void add(std::uint64_t macs) noexcept;
  static std::uint64_t value() noexcept;
  static void reset() noexcept;
};

}  // namespace spatialkd::nn

#endif  // SPATIALKD_NN_TENSOR_HPP_
