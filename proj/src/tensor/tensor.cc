// Copyright 2026 The CAEN Authors.
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

#include "caen/tensor/tensor.h"

#include <cmath>
#include <sstream>

namespace caen {

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << 'x';
    out << shape[i];
  }
  out << ']';
  return out.str();
}

const Shape& Tensor::shape() const { return tape_->node(id_).shape; }

std::size_t Tensor::size() const { return shape_size(shape()); }

std::size_t Tensor::rows() const {
  const Shape& s = shape();
  if (s.size() != 2) {
    throw DimensionError("expected a rank-2 tensor, got " + shape_string(s));
  }
  return s[0];
}

std::size_t Tensor::cols() const {
  const Shape& s = shape();
  if (s.size() != 2) {
    throw DimensionError("expected a rank-2 tensor, got " + shape_string(s));
  }
  return s[1];
}

std::span<const double> Tensor::values() const { return tape_->values(id_); }

std::span<const double> Tensor::grad() const {
  const auto& g = tape_->node(id_).grad;
  return {g.data(), g.size()};
}

bool Tensor::requires_grad() const { return tape_->node(id_).requires_grad; }

double Tensor::item() const {
  if (size() != 1) {
    throw DimensionError("item() on non-scalar tensor " +
                         shape_string(shape()));
  }
  return values()[0];
}

double Tensor::at(std::size_t r, std::size_t c) const {
  return values()[r * cols() + c];
}

Tensor Tape::constant(Shape shape, std::vector<double> values) {
  return record(std::move(shape), std::move(values), false, {});
}

Tensor Tape::variable(Shape shape, std::vector<double> values) {
  return record(std::move(shape), std::move(values), true, {});
}

Tensor Tape::view(Shape shape, std::span<const double> values,
                  bool requires_grad) {
  if (shape_size(shape) != values.size()) {
    throw DimensionError("view of " + std::to_string(values.size()) +
                         " values with shape " + shape_string(shape));
  }
  Node n;
  n.shape = std::move(shape);
  n.external = values.data();
  n.requires_grad = requires_grad;
  nodes_.push_back(std::move(n));
  return Tensor(this, static_cast<int>(nodes_.size()) - 1);
}

Tensor Tape::record(Shape shape, std::vector<double> values,
                    bool requires_grad, BackwardFn backward) {
  if (shape_size(shape) != values.size()) {
    throw DimensionError("tensor of shape " + shape_string(shape) +
                         " given " + std::to_string(values.size()) +
                         " values");
  }
  Node n;
  n.shape = std::move(shape);
  n.value = std::move(values);
  n.requires_grad = requires_grad;
  if (requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Tensor(this, static_cast<int>(nodes_.size()) - 1);
}

std::span<const double> Tape::values(int id) const {
  const Node& n = node(id);
  if (n.external != nullptr) return {n.external, shape_size(n.shape)};
  return {n.value.data(), n.value.size()};
}

std::span<double> Tape::grad_buffer(int id) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  if (n.grad.empty()) n.grad.assign(shape_size(n.shape), 0.0);
  return {n.grad.data(), n.grad.size()};
}

void Tape::backward(const Tensor& loss) {
  if (loss.tape() != this) {
    throw std::invalid_argument("backward: loss was not recorded on this tape");
  }
  if (loss.size() != 1) {
    throw DimensionError("backward: loss must be a scalar, got " +
                         shape_string(loss.shape()));
  }
  if (!node(loss.id()).requires_grad) return;
  grad_buffer(loss.id())[0] += 1.0;
  for (int id = loss.id(); id >= 0; --id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.backward || n.grad.empty()) continue;
    n.backward(*this, id);
  }
}

}  // namespace caen
