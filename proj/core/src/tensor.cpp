// Copyright 2026 The ARHNet Desk Authors. All Rights Reserved.
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

#include "arhnet/tensor.hpp"

#include <sstream>
#include <unordered_set>

#include "arhnet/error.hpp"

namespace arhnet {

std::array<std::int64_t, 5> Shape::strides() const {
  std::array<std::int64_t, 5> s{};
  s[4] = 1;
  for (int a = 3; a >= 0; --a) s[a] = s[a + 1] * dims[a + 1];
  return s;
}

std::string Shape::str() const {
  std::ostringstream os;
  os << "(" << dims[0] << ", " << dims[1] << ", " << dims[2] << ", " << dims[3] << ", " << dims[4] << ")";
  return os.str();
}

namespace {
thread_local bool t_grad_enabled = true;
}

bool grad_enabled() { return t_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(t_grad_enabled) { t_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { t_grad_enabled = previous_; }

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> values, bool requires_grad) {
  for (int a = 0; a < 5; ++a) {
    if (shape[a] <= 0) throw ShapeError("tensor shape must be positive, got " + shape.str());
  }
  if (static_cast<std::int64_t>(values.size()) != shape.numel()) {
    throw ShapeError("tensor of shape " + shape.str() + " given " + std::to_string(values.size()) + " values");
  }
  node_ = std::make_shared<detail::Node<T>>();
  node_->shape = shape;
  node_->values = std::move(values);
  node_->requires_grad = requires_grad;
}

template <typename T>
Tensor<T> Tensor<T>::zeros(Shape shape, bool requires_grad) {
  return full(shape, T(0), requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::full(Shape shape, T value, bool requires_grad) {
  return Tensor(shape, std::vector<T>(static_cast<std::size_t>(shape.numel()), value), requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::scalar(T value, bool requires_grad) {
  return Tensor(Shape{}, std::vector<T>{value}, requires_grad);
}

template <typename T>
const Shape& Tensor<T>::shape() const {
  if (!node_) throw ShapeError("use of an undefined tensor");
  return node_->shape;
}

template <typename T>
std::span<const T> Tensor<T>::values() const {
  if (!node_) throw ShapeError("use of an undefined tensor");
  return node_->values;
}

template <typename T>
std::span<T> Tensor<T>::mutable_values() {
  if (!node_) throw ShapeError("use of an undefined tensor");
  return node_->values;
}

template <typename T>
T Tensor<T>::item() const {
  if (numel() != 1) throw ShapeError("item() on tensor of shape " + shape().str());
  return node_->values[0];
}

template <typename T>
T Tensor<T>::at(std::int64_t n, std::int64_t c, std::int64_t i, std::int64_t j, std::int64_t k) const {
  const Shape& s = shape();
  return node_->values[static_cast<std::size_t>((((n * s.c() + c) * s.h() + i) * s.w() + j) * s.d() + k)];
}

template <typename T>
bool Tensor<T>::requires_grad() const {
  return node_ && node_->requires_grad;
}

template <typename T>
void Tensor<T>::set_requires_grad(bool on) {
  if (!node_) throw ShapeError("use of an undefined tensor");
  if (!node_->parents.empty()) throw ShapeError("set_requires_grad on a non-leaf tensor");
  node_->requires_grad = on;
}

template <typename T>
bool Tensor<T>::has_grad() const {
  return node_ && !node_->grad.empty();
}

template <typename T>
std::span<const T> Tensor<T>::grad() const {
  if (!node_) throw ShapeError("use of an undefined tensor");
  return node_->grad;
}

template <typename T>
std::span<T> Tensor<T>::mutable_grad() {
  if (!node_) throw ShapeError("use of an undefined tensor");
  return node_->ensure_grad();
}

template <typename T>
void Tensor<T>::zero_grad() {
  if (node_) node_->grad.clear();
}

template <typename T>
Tensor<T> Tensor<T>::detach() const {
  return Tensor(shape(), node_->values, false);
}

template <typename T>
const char* Tensor<T>::op_name() const {
  return node_ ? node_->op : "undefined";
}

template <typename T>
void backward(const Tensor<T>& loss) {
  if (!loss.defined()) throw ShapeError("backward on an undefined tensor");
  if (loss.numel() != 1) throw ShapeError("backward needs a scalar loss, got shape " + loss.shape().str());
  using NodeT = detail::Node<T>;
  NodeT* root = loss.node().get();
  if (!root->requires_grad) return;

  // Iterative post-order DFS gives a topological order (parents first).
  std::vector<NodeT*> order;
  std::unordered_set<NodeT*> visited;
  std::vector<std::pair<NodeT*, std::size_t>> stack;
  stack.emplace_back(root, 0);
  visited.insert(root);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      NodeT* parent = node->parents[next++].get();
      if (parent->requires_grad && visited.insert(parent).second) stack.emplace_back(parent, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  root->ensure_grad()[0] += T(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    NodeT* node = *it;
    if (node->backward && !node->grad.empty()) node->backward(*node);
  }
  // Intermediate gradients are not needed once propagated.
  for (NodeT* node : order) {
    if (!node->parents.empty()) {
      node->grad.clear();
      node->grad.shrink_to_fit();
    }
  }
}

namespace detail {

template <typename T>
Tensor<T> make_result(Shape shape, std::vector<T> values, const std::vector<const Tensor<T>*>& inputs,
                      const char* op, std::function<void(Node<T>&)> backward_fn) {
  Tensor<T> out(shape, std::move(values), false);
  if (!grad_enabled()) return out;
  bool any = false;
  for (const auto* t : inputs) any = any || (t && t->requires_grad());
  if (!any) return out;
  const auto& node = out.node();
  node->requires_grad = true;
  node->op = op;
  for (const auto* t : inputs) {
    if (t && t->defined()) node->parents.push_back(t->node());
  }
  node->backward = std::move(backward_fn);
  return out;
}

template <typename T>
Tensor<T> make_result(Shape shape, std::vector<T> values, std::initializer_list<const Tensor<T>*> inputs,
                      const char* op, std::function<void(Node<T>&)> backward_fn) {
  return make_result(shape, std::move(values), std::vector<const Tensor<T>*>(inputs), op, std::move(backward_fn));
}

template Tensor<float> make_result(Shape, std::vector<float>, const std::vector<const Tensor<float>*>&, const char*,
                                   std::function<void(Node<float>&)>);
template Tensor<double> make_result(Shape, std::vector<double>, const std::vector<const Tensor<double>*>&, const char*,
                                    std::function<void(Node<double>&)>);
template Tensor<float> make_result(Shape, std::vector<float>, std::initializer_list<const Tensor<float>*>, const char*,
                                   std::function<void(Node<float>&)>);
template Tensor<double> make_result(Shape, std::vector<double>, std::initializer_list<const Tensor<double>*>,
                                    const char*, std::function<void(Node<double>&)>);

}  // namespace detail

template class Tensor<float>;
template class Tensor<double>;
template void backward(const Tensor<float>&);
template void backward(const Tensor<double>&);

}  // namespace arhnet
