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

#ifndef CAEN_TENSOR_TENSOR_H_
#define CAEN_TENSOR_TENSOR_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace caen {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

// Raised when operand shapes are incompatible.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised on NaN/Inf or on numerically undefined requests (e.g. a softmax row
// with every position masked).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Tape;

// Handle to a value recorded on a Tape. Cheap to copy; valid while the tape
// is alive.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Tape* tape, int id) : tape_(tape), id_(id) {}

  bool valid() const { return tape_ != nullptr; }
  Tape* tape() const { return tape_; }
  int id() const { return id_; }

  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t size() const;
  // Leading / trailing extents of a rank-2 tensor.
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<const double> values() const;
  // Empty until backward() has reached this tensor.
  std::span<const double> grad() const;
  bool requires_grad() const;

  double item() const;
  double at(std::size_t r, std::size_t c) const;

 private:
  Tape* tape_ = nullptr;
  int id_ = -1;
};

// Ordered record of every value produced during a forward pass. Node ids are
// assigned in execution order, so inputs always precede the ops that use
// them and a reverse sweep is a valid topological traversal.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, int)>;

  struct Node {
    Shape shape;
    std::vector<double> value;
    // Non-null for leaves that view externally owned storage (parameters).
    const double* external = nullptr;
    std::vector<double> grad;
    bool requires_grad = false;
    BackwardFn backward;
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Tensor constant(Shape shape, std::vector<double> values);
  Tensor variable(Shape shape, std::vector<double> values);
  // Leaf viewing memory the caller keeps alive and unchanged for the
  // lifetime of the tape.
  Tensor view(Shape shape, std::span<const double> values, bool requires_grad);

  // Records an op result. `backward` may be empty when no input needs grad.
  Tensor record(Shape shape, std::vector<double> values, bool requires_grad,
                BackwardFn backward);

  // Reverse sweep from a scalar. Gradients accumulate into every reachable
  // node with requires_grad set.
  void backward(const Tensor& loss);

  std::size_t size() const { return nodes_.size(); }
  const Node& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }

  std::span<const double> values(int id) const;
  // Gradient buffer for `id`, allocated zero-filled on first access.
  std::span<double> grad_buffer(int id);

 private:
  std::vector<Node> nodes_;
};

}  // namespace caen

#endif  // CAEN_TENSOR_TENSOR_H_
