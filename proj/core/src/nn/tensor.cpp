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

#include "spatialkd/nn/tensor.hpp"

#include <unordered_set>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "spatialkd/error.hpp"

namespace spatialkd::nn {
namespace {

thread_local bool t_grad_enabled = true;
thread_local std::uint64_t t_macs = 0;

}  // namespace

std::size_t numel(const Shape& shape) noexcept {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  return fmt::format("[{}]", fmt::join(shape, ","));
}

Tensor::Tensor() : impl_(std::make_shared<TensorImpl>()) {}

Tensor::Tensor(Shape shape, std::vector<double> data, bool requires_grad)
    : impl_(std::make_shared<TensorImpl>()) {
  if (nn::numel(shape) != data.size())
    throw ShapeError(fmt::format("tensor: shape {} needs {} values, got {}",
                                 shape_string(shape), nn::numel(shape),
                                 data.size()));
  impl_->shape = std::move(shape);
  impl_->data = std::move(data);
  impl_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  const std::size_t n = nn::numel(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return Tensor(Shape{}, {value}, requires_grad);
}

double Tensor::item() const {
  if (numel() != 1)
    throw ShapeError(fmt::format("item(): tensor has shape {}",
                                 shape_string(shape())));
  return impl_->data[0];
}

Tensor Tensor::detach() const { return Tensor(impl_->shape, impl_->data, false); }

Tensor Tensor::clone() const {
  return Tensor(impl_->shape, impl_->data, impl_->requires_grad);
}

Tensor make_result(Shape shape, std::vector<double> data,
                   std::vector<std::shared_ptr<TensorImpl>> parents,
                   const char* op, std::function<void(TensorImpl&)> backward_fn) {
  Tensor out(std::move(shape), std::move(data));
  if (!t_grad_enabled) return out;
  bool any = false;
  for (const auto& p : parents) any = any || p->requires_grad;
  if (!any) return out;
  TensorImpl* self = out.impl_.get();
  auto node = std::make_unique<Node>();
  node->parents = std::move(parents);
  node->op = op;
  node->backward = [self, fn = std::move(backward_fn)]() { fn(*self); };
  self->node = std::move(node);
  self->requires_grad = true;
  return out;
}

void backward(const Tensor& loss) {
  if (loss.numel() != 1)
    throw ShapeError(fmt::format("backward: loss must be scalar, got shape {}",
                                 shape_string(loss.shape())));
  TensorImpl* root = loss.impl().get();
  if (!root->requires_grad)
    throw UsageError("backward: loss is not connected to any requires-grad leaf");

  // Iterative post-order DFS gives a topological order.
  std::vector<TensorImpl*> order;
  std::unordered_set<TensorImpl*> seen;
  std::vector<std::pair<TensorImpl*, std::size_t>> stack;
  stack.emplace_back(root, 0);
  seen.insert(root);
  while (!stack.empty()) {
    auto& [t, next] = stack.back();
    if (t->node && next < t->node->parents.size()) {
      TensorImpl* p = t->node->parents[next++].get();
      if (p->requires_grad && !seen.count(p)) {
        seen.insert(p);
        stack.emplace_back(p, 0);
      }
      continue;
    }
    order.push_back(t);
    stack.pop_back();
  }

  // Leaves collect this sweep's gradient from zero and add it to what they
  // held before, so repeated calls accumulate exact multiples.
  std::vector<std::pair<TensorImpl*, std::vector<double>>> held;
  for (TensorImpl* t : order) {
    if (t->node) {
      t->grad.assign(t->data.size(), 0.0);
    } else if (!t->grad.empty()) {
      held.emplace_back(t, std::move(t->grad));
      t->grad.clear();
    }
  }
  root->ensure_grad()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->node) (*it)->node->backward();
  }
  for (auto& [t, previous] : held) {
    auto& g = t->ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = previous[i] + g[i];
  }
}

bool grad_enabled() noexcept { return t_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(t_grad_enabled) { t_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { t_grad_enabled = previous_; }

void MacCounter::add(std::uint64_t macs) noexcept { t_macs += macs; }
std::uint64_t MacCounter::value() noexcept { return t_macs; }
void MacCounter::reset() noexcept { t_macs = 0; }

}  // namespace spatialkd::nn
