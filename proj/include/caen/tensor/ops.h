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

// Differentiable operations. Every op records its result and local gradient
// rule on the tape of its first operand; all operands must share that tape.

#ifndef CAEN_TENSOR_OPS_H_
#define CAEN_TENSOR_OPS_H_

#include <cstdint>
#include <span>
#include <vector>

#include "caen/tensor/tensor.h"

namespace caen {

// One byte per position, nonzero = keep.
using Mask = std::vector<std::uint8_t>;

// [m x k] . [k x n] -> [m x n]
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
// scale * a + shift, element-wise.
Tensor affine(const Tensor& a, double scale, double shift = 0.0);
// [m x n] + [1 x n] (or [n]) broadcast over rows.
Tensor add_row(const Tensor& a, const Tensor& row);

Tensor sigmoid(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor log(const Tensor& a);

// Softmax over the last axis restricted to positions where mask != 0.
// Masked outputs are exactly zero and receive no gradient.
Tensor softmax_masked(const Tensor& logits, std::span<const std::uint8_t> mask);
Tensor softmax(const Tensor& logits);

Tensor concat_last_axis(std::span<const Tensor> parts);
Tensor slice_last_axis(const Tensor& a, std::size_t begin, std::size_t length);
// Concatenation / slicing along the leading axis of rank-2 tensors.
Tensor concat_rows(std::span<const Tensor> parts);
Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t length);
Tensor reshape(const Tensor& a, Shape shape);

// Row gather from a [vocab x dim] table. Id 0 is the padding row: it yields
// zeros and never receives gradient.
Tensor gather_rows(const Tensor& table, std::span<const int> ids);

// Plain row selection from any [m x d] tensor; rows may repeat and their
// gradients accumulate.
Tensor take_rows(const Tensor& a, std::span<const std::size_t> rows);

// Batched attention helpers for G independent groups of n keys each.
// Keys and values are stacked group-major: row g*n + j is key j of group g.
// grouped_scores: [G x d], [G*n x d] -> [G x n], scale * <q_g, k_gj>.
Tensor grouped_scores(const Tensor& q, const Tensor& k, double scale);
// grouped_weighted_sum: [G x n], [G*n x d] -> [G x d], sum_j w_gj v_gj.
Tensor grouped_weighted_sum(const Tensor& w, const Tensor& v);

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);

// Mean over the batch of -[y log p + (1-y) log(1-p)], p clamped to
// [eps, 1-eps]; clamped entries pass no gradient.
Tensor binary_cross_entropy(const Tensor& probs, std::span<const double> labels,
                            double eps = 1e-7);

}  // namespace caen

#endif  // CAEN_TENSOR_OPS_H_
