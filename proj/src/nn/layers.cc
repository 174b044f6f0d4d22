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

#include "caen/nn/layers.h"

#include <cmath>
#include <stdexcept>

namespace caen {
namespace {

void expect_cols(const Tensor& t, std::size_t cols, const char* what) {
  if (t.rank() != 2 || t.cols() != cols) {
    throw DimensionError(std::string(what) + ": expected " +
                         std::to_string(cols) + " columns, got " +
                         shape_string(t.shape()));
  }
}

}  // namespace

EmbeddingTable make_embedding(ParamStore& store, const std::string& name,
                              std::size_t vocab_size, std::size_t dim,
                              Rng& rng) {
  if (vocab_size == 0 || dim == 0) {
    throw std::invalid_argument("embedding " + name + " needs positive sizes");
  }
  // Uniform with standard deviation 0.5. Attention scores are products of
  // projected embeddings, so Glorot over a large vocabulary (rows ~0.05)
  // leaves them near zero and the softmax stays flat through training.
  const double limit = kEmbeddingInitStd * std::sqrt(3.0);
  std::vector<double> v(vocab_size * dim);
  for (double& x : v) x = uniform(rng, -limit, limit);
  std::fill(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(dim), 0.0);
  const ParamId id = store.add(name, {vocab_size, dim}, std::move(v));
  return {id, vocab_size, dim};
}

Tensor embed_lookup(Binder& bind, const EmbeddingTable& table,
                    std::span<const int> ids) {
  return gather_rows(bind(table.table), ids);
}

GRUCellParams make_gru(ParamStore& store, const std::string& name,
                       std::size_t input_dim, std::size_t hidden_dim,
                       Rng& rng) {
  GRUCellParams p;
  p.input_dim = input_dim;
  p.hidden_dim = hidden_dim;
  p.w_z = store.add_glorot(name + ".w_z", input_dim, hidden_dim, rng);
  p.u_z = store.add_glorot(name + ".u_z", hidden_dim, hidden_dim, rng);
  p.b_z = store.add_zeros(name + ".b_z", {1, hidden_dim});
  p.w_r = store.add_glorot(name + ".w_r", input_dim, hidden_dim, rng);
  p.u_r = store.add_glorot(name + ".u_r", hidden_dim, hidden_dim, rng);
  p.b_r = store.add_zeros(name + ".b_r", {1, hidden_dim});
  p.w_h = store.add_glorot(name + ".w_h", input_dim, hidden_dim, rng);
  p.u_h = store.add_glorot(name + ".u_h", hidden_dim, hidden_dim, rng);
  p.b_h = store.add_zeros(name + ".b_h", {1, hidden_dim});
  return p;
}

Tensor gru_step(Binder& bind, const GRUCellParams& p, const Tensor& x,
                const Tensor& h) {
  expect_cols(x, p.input_dim, "gru_step input");
  expect_cols(h, p.hidden_dim, "gru_step state");
  if (x.rows() != h.rows()) {
    throw DimensionError("gru_step: input " + shape_string(x.shape()) +
                         " and state " + shape_string(h.shape()) +
                         " differ in rows");
  }
  Tensor z = sigmoid(add_row(
      add(matmul(x, bind(p.w_z)), matmul(h, bind(p.u_z))), bind(p.b_z)));
  Tensor r = sigmoid(add_row(
      add(matmul(x, bind(p.w_r)), matmul(h, bind(p.u_r))), bind(p.b_r)));
  Tensor c = tanh(add_row(
      add(matmul(x, bind(p.w_h)), matmul(mul(r, h), bind(p.u_h))),
      bind(p.b_h)));
  return add(mul(affine(z, -1.0, 1.0), h), mul(z, c));
}

DenseParams make_dense(ParamStore& store, const std::string& name,
                       std::size_t input_dim, std::size_t output_dim,
                       Rng& rng) {
  DenseParams p;
  p.input_dim = input_dim;
  p.output_dim = output_dim;
  p.weight = store.add_glorot(name + ".w", input_dim, output_dim, rng);
  p.bias = store.add_zeros(name + ".b", {1, output_dim});
  return p;
}

Tensor dense(Binder& bind, const DenseParams& p, const Tensor& x) {
  expect_cols(x, p.input_dim, "dense");
  return add_row(matmul(x, bind(p.weight)), bind(p.bias));
}

AttentionResult scaled_dot_attention(const Tensor& q, const Tensor& k,
                                     const Tensor& v,
                                     std::span<const std::uint8_t> mask) {
  if (q.rank() != 2 || k.rank() != 2 || v.rank() != 2 || q.cols() != k.cols() ||
      k.rows() != v.rows()) {
    throw DimensionError("scaled_dot_attention: Q " + shape_string(q.shape()) +
                         ", K " + shape_string(k.shape()) + ", V " +
                         shape_string(v.shape()));
  }
  const std::size_t nq = q.rows(), n = k.rows();
  Mask full;
  if (mask.size() == n && nq != 1) {
    full.reserve(nq * n);
    for (std::size_t i = 0; i < nq; ++i) {
      full.insert(full.end(), mask.begin(), mask.end());
    }
    mask = full;
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(k.cols()));
  Tensor logits = affine(matmul(q, transpose(k)), scale);
  Tensor weights = softmax_masked(logits, mask);
  return {matmul(weights, v), weights};
}

MultiHeadAttentionParams make_multi_head_attention(
    ParamStore& store, const std::string& name,
    const MultiHeadAttentionConfig& config, Rng& rng) {
  if (config.heads == 0) {
    throw std::invalid_argument(name + ": head count must be positive");
  }
  MultiHeadAttentionParams p;
  p.config = config;
  for (std::size_t i = 0; i < config.heads; ++i) {
    const std::string head = name + ".head" + std::to_string(i);
    p.w_q.push_back(store.add_glorot(head + ".w_q", config.query_dim,
                                     config.key_proj_dim, rng));
    p.w_k.push_back(store.add_glorot(head + ".w_k", config.key_dim,
                                     config.key_proj_dim, rng));
    if (config.project_values) {
      p.w_v.push_back(store.add_glorot(head + ".w_v", config.value_dim,
                                       config.value_proj_dim, rng));
    }
  }
  if (config.project_values) {
    p.w_o = store.add_glorot(name + ".w_o",
                             config.heads * config.value_proj_dim,
                             config.output_dim, rng);
  }
  return p;
}

namespace {

// Concat + W^O, or the plain head average when values are unprojected.
Tensor combine_heads(Binder& bind, const MultiHeadAttentionParams& p,
                     const std::vector<Tensor>& heads) {
  if (p.config.project_values) {
    return matmul(concat_last_axis(heads), bind(p.w_o));
  }
  Tensor acc = heads[0];
  for (std::size_t i = 1; i < heads.size(); ++i) acc = add(acc, heads[i]);
  return heads.size() == 1
             ? acc
             : affine(acc, 1.0 / static_cast<double>(heads.size()));
}

}  // namespace

MultiHeadResult multi_head_attention(Binder& bind,
                                     const MultiHeadAttentionParams& p,
                                     const Tensor& q, const Tensor& k,
                                     const Tensor& v,
                                     std::span<const std::uint8_t> mask) {
  const auto& c = p.config;
  expect_cols(q, c.query_dim, "multi_head_attention query");
  expect_cols(k, c.key_dim, "multi_head_attention key");
  expect_cols(v, c.value_dim, "multi_head_attention value");
  MultiHeadResult result;
  std::vector<Tensor> heads;
  for (std::size_t i = 0; i < c.heads; ++i) {
    Tensor qh = matmul(q, bind(p.w_q[i]));
    Tensor kh = matmul(k, bind(p.w_k[i]));
    Tensor vh = c.project_values ? matmul(v, bind(p.w_v[i])) : v;
    AttentionResult head = scaled_dot_attention(qh, kh, vh, mask);
    heads.push_back(head.output);
    result.head_weights.push_back(head.weights);
  }
  result.output = combine_heads(bind, p, heads);
  return result;
}

MultiHeadResult grouped_multi_head_attention(Binder& bind,
                                             const MultiHeadAttentionParams& p,
                                             const Tensor& q, const Tensor& k,
                                             const Tensor& v,
                                             std::span<const std::uint8_t> mask) {
  const auto& c = p.config;
  expect_cols(q, c.query_dim, "grouped_multi_head_attention query");
  expect_cols(k, c.key_dim, "grouped_multi_head_attention key");
  expect_cols(v, c.value_dim, "grouped_multi_head_attention value");
  if (q.rows() == 0 || k.rows() != v.rows() || k.rows() % q.rows() != 0 ||
      mask.size() != k.rows()) {
    throw DimensionError("grouped_multi_head_attention: Q " + shape_string(q.shape()) +
                         ", K " + shape_string(k.shape()) + ", V " +
                         shape_string(v.shape()) + ", mask of " +
                         std::to_string(mask.size()));
  }
  MultiHeadResult result;
  std::vector<Tensor> heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(c.key_proj_dim));
  for (std::size_t i = 0; i < c.heads; ++i) {
    Tensor qh = matmul(q, bind(p.w_q[i]));
    Tensor kh = matmul(k, bind(p.w_k[i]));
    Tensor vh = c.project_values ? matmul(v, bind(p.w_v[i])) : v;
    Tensor weights = softmax_masked(grouped_scores(qh, kh, scale), mask);
    heads.push_back(grouped_weighted_sum(weights, vh));
    result.head_weights.push_back(weights);
  }
  result.output = combine_heads(bind, p, heads);
  return result;
}

MLPParams make_mlp(ParamStore& store, const std::string& name,
                   std::size_t input_dim,
                   const std::vector<std::size_t>& hidden, Rng& rng) {
  MLPParams p;
  p.widths.push_back(input_dim);
  p.widths.insert(p.widths.end(), hidden.begin(), hidden.end());
  p.widths.push_back(1);
  for (std::size_t l = 0; l + 1 < p.widths.size(); ++l) {
    const std::string layer = name + ".layer" + std::to_string(l);
    p.weights.push_back(
        store.add_glorot(layer + ".w", p.widths[l], p.widths[l + 1], rng));
    p.biases.push_back(store.add_zeros(layer + ".b", {1, p.widths[l + 1]}));
  }
  return p;
}

Tensor mlp_decision(Binder& bind, const MLPParams& p, const Tensor& x) {
  expect_cols(x, p.widths.front(), "mlp_decision");
  Tensor h = x;
  const std::size_t layers = p.weights.size();
  for (std::size_t l = 0; l < layers; ++l) {
    h = add_row(matmul(h, bind(p.weights[l])), bind(p.biases[l]));
    h = l + 1 < layers ? relu(h) : sigmoid(h);
  }
  return h;
}

}  // namespace caen
