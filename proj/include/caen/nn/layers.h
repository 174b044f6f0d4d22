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

// Neural building blocks. All layers use the row-vector convention: a batch
// of inputs is [rows x features] and weights are [in x out].

#ifndef CAEN_NN_LAYERS_H_
#define CAEN_NN_LAYERS_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "caen/nn/params.h"
#include "caen/tensor/ops.h"

namespace caen {

inline constexpr double kEmbeddingInitStd = 0.5;

// Row 0 is the padding row: zero-initialised and never updated.
struct EmbeddingTable {
  ParamId table = 0;
  std::size_t vocab_size = 0;
  std::size_t dim = 0;
};

EmbeddingTable make_embedding(ParamStore& store, const std::string& name,
                              std::size_t vocab_size, std::size_t dim,
                              Rng& rng);

// [ids.size() x dim]; throws DimensionError naming any id >= vocab_size.
Tensor embed_lookup(Binder& bind, const EmbeddingTable& table,
                    std::span<const int> ids);

struct GRUCellParams {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  ParamId w_z, u_z, b_z;
  ParamId w_r, u_r, b_r;
  ParamId w_h, u_h, b_h;
};

GRUCellParams make_gru(ParamStore& store, const std::string& name,
                       std::size_t input_dim, std::size_t hidden_dim, Rng& rng);

// z = sig(x W_z + h U_z + b_z), r = sig(x W_r + h U_r + b_r),
// c = tanh(x W_h + (r * h) U_h + b_h), h' = (1 - z) * h + z * c.
// x is [rows x input_dim], h is [rows x hidden_dim].
Tensor gru_step(Binder& bind, const GRUCellParams& p, const Tensor& x,
                const Tensor& h);

struct DenseParams {
  std::size_t input_dim = 0;
  std::size_t output_dim = 0;
  ParamId weight, bias;
};

DenseParams make_dense(ParamStore& store, const std::string& name,
                       std::size_t input_dim, std::size_t output_dim, Rng& rng);
Tensor dense(Binder& bind, const DenseParams& p, const Tensor& x);

struct AttentionResult {
  Tensor output;   // [q x d_v]
  Tensor weights;  // [q x n], simplex rows
};

// softmax_masked(Q K^T / sqrt(d_k)) V. `mask` holds q*n entries, or n entries
// shared by every query row.
AttentionResult scaled_dot_attention(const Tensor& q, const Tensor& k,
                                     const Tensor& v,
                                     std::span<const std::uint8_t> mask);

struct MultiHeadAttentionConfig {
  std::size_t heads = 2;
  std::size_t query_dim = 32;
  std::size_t key_dim = 32;
  std::size_t value_dim = 32;
  std::size_t key_proj_dim = 16;    // d_k
  std::size_t value_proj_dim = 16;  // d_v
  std::size_t output_dim = 32;      // d
  // false: values stay unprojected, there is no W^O and the heads are
  // averaged, so the output lives in the value space.
  bool project_values = true;
};

struct MultiHeadAttentionParams {
  MultiHeadAttentionConfig config;
  std::vector<ParamId> w_q, w_k, w_v;
  ParamId w_o = 0;

  std::size_t output_width() const {
    return config.project_values ? config.output_dim : config.value_dim;
  }
};

MultiHeadAttentionParams make_multi_head_attention(
    ParamStore& store, const std::string& name,
    const MultiHeadAttentionConfig& config, Rng& rng);

struct MultiHeadResult {
  Tensor output;
  std::vector<Tensor> head_weights;
};

MultiHeadResult multi_head_attention(Binder& bind,
                                     const MultiHeadAttentionParams& p,
                                     const Tensor& q, const Tensor& k,
                                     const Tensor& v,
                                     std::span<const std::uint8_t> mask);

// Batched form with one query row per group: q is [G x query_dim], k and v
// stack n rows per group (group-major) and mask has G*n entries. Every group
// needs at least one unmasked key. Head weights are [G x n].
MultiHeadResult grouped_multi_head_attention(Binder& bind,
                                             const MultiHeadAttentionParams& p,
                                             const Tensor& q, const Tensor& k,
                                             const Tensor& v,
                                             std::span<const std::uint8_t> mask);

struct MLPParams {
  // input width, hidden widths..., 1
  std::vector<std::size_t> widths;
  std::vector<ParamId> weights;
  std::vector<ParamId> biases;
};

MLPParams make_mlp(ParamStore& store, const std::string& name,
                   std::size_t input_dim,
                   const std::vector<std::size_t>& hidden, Rng& rng);

// ReLU hidden layers, sigmoid output: [rows x input] -> [rows x 1].
Tensor mlp_decision(Binder& bind, const MLPParams& p, const Tensor& x);

}  // namespace caen

#endif  // CAEN_NN_LAYERS_H_
