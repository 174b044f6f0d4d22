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

// The CTR model: profile embeddings, a GRU + attention user-behavior module,
// and the item-side stack that attends over the users of each price state
// (attribute attention), runs a GRU across states (state evolution),
// attends over the states with the target user and current price
// (personalized attention) and summarises how often the price changes
// (frequency extraction).

#ifndef CAEN_MODEL_CAEN_MODEL_H_
#define CAEN_MODEL_CAEN_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "caen/data/sample.h"
#include "caen/nn/layers.h"
#include "caen/nn/params.h"

namespace caen {

enum class Variant {
  kFull,
  kNoStateEvolution,  // "ns": per-state dense layer instead of the GRU
  kNoHierarchical,    // "nh": mean of user embeddings instead of attribute attention
  kNoFrequency,       // "nf": frequency slot zeroed
  kUserBehaviorOnly,  // "ub": both item-behavior slots zeroed
};

const char* variant_name(Variant v);
// Accepts full, ns, nh, nf, ub; throws ConfigError otherwise.
Variant parse_variant(std::string_view name);

struct ModelConfig {
  // Largest ids; tables hold one extra padding row.
  std::size_t users = 2000;
  std::size_t items = 3000;
  std::size_t segments = 12;
  std::size_t categories = 20;

  std::size_t id_dim = 32;
  std::size_t attribute_dim = 32;
  std::size_t profile_dim = 16;
  std::size_t heads = 2;
  std::size_t key_proj_dim = 16;
  std::size_t value_proj_dim = 16;
  std::size_t state_hidden = 32;
  std::size_t frequency_hidden = 16;
  std::size_t behavior_hidden = 32;
  std::vector<std::size_t> mlp_hidden{1024, 512, 128};
  std::uint64_t seed = 1;

  void validate() const;
  std::size_t user_profile_width() const { return id_dim + profile_dim; }
  std::size_t item_profile_width() const { return id_dim + 2 * profile_dim; }
  std::size_t mlp_input_width() const;
};

struct CAENParams {
  ModelConfig config;
  ParamStore store;

  EmbeddingTable user_table, item_table, segment_table, category_table, price_level_table;
  EmbeddingTable discount_table, level_table, rank_table;  // summed into one attribute vector

  MultiHeadAttentionParams attribute_attention;  // shared by every state
  ParamId empty_state = 0;
  GRUCellParams state_gru;
  DenseParams state_dense;  // used by the ns variant only
  MultiHeadAttentionParams personalized_attention;
  ParamId cold_item = 0;
  GRUCellParams frequency_gru;
  GRUCellParams behavior_gru;
  MultiHeadAttentionParams behavior_attention;
  ParamId empty_behavior = 0;
  MLPParams mlp;
};

// Glorot weights, zero biases and zero learned fallback vectors.
CAENParams make_caen_params(const ModelConfig& config);

struct AttentionOutput {
  Tensor output;
  std::vector<Tensor> head_weights;  // empty when no attention ran
};

// [n x attribute_dim], sum of the three bucket embeddings per row.
Tensor attribute_embeddings(Binder& bind, const CAENParams& p,
                            std::span<const AttributeFeatures> features);

// Query = the state's attribute embedding, keys = values = its users'
// embeddings (values unprojected, heads averaged). Empty state: the learned
// empty-state vector. Output [1 x id_dim].
AttentionOutput attribute_attention(Binder& bind, const CAENParams& p,
                                    const AttributeStateInput& state);

// Mean of the state's real user embeddings (the nh replacement).
Tensor mean_pool_users(Binder& bind, const CAENParams& p, const AttributeStateInput& state);

// GRU from a zero state over the rows of `inputs` (one row per real state,
// chronological). Returns [k x state_hidden]. With recurrent = false each
// row goes through the shared dense layer + tanh instead.
Tensor state_evolution(Binder& bind, const CAENParams& p, const Tensor& inputs,
                       bool recurrent = true);

// Query = concat(user, current attribute), keys = concat(h, attribute) per
// state, values = h. Rows of `hidden`/`attributes` beyond the mask are
// ignored. Throws DataError when no state is real.
AttentionOutput personalized_attention(Binder& bind, const CAENParams& p, const Tensor& hidden,
                                       const Tensor& attributes, std::span<const std::uint8_t> mask,
                                       const Tensor& user, const Tensor& current_attribute);

// Per change k of K: [log(1 + hours to the next change, or to `reference`
// for the last one), k / K], run through a GRU; zero changes give zeros.
// Throws DataError for descending timestamps.
Tensor frequency_extraction(Binder& bind, const CAENParams& p,
                            std::span<const Timestamp> change_timestamps, Timestamp reference);

// GRU over the behavior items, then multi-head attention with the target
// item embedding as query. Empty history: the learned empty-behavior vector.
AttentionOutput user_behavior_module(Binder& bind, const CAENParams& p,
                                     const UserBehaviorInput& behavior, const Tensor& target_item);

struct AttentionDiagnostics {
  std::string layer;  // "attribute", "personalized" or "behavior"
  std::size_t head = 0;
  std::size_t width = 0;        // row length
  std::vector<double> weights;  // rows of `width`
  Mask mask;                    // aligned with weights
};

struct BatchForward {
  Tensor probabilities;        // [B x 1]
  Tensor item_representation;  // [B x state_hidden]
  std::vector<AttentionDiagnostics> attention;
};

// All samples must share the padded layout (slots per state, states,
// behaviors).
BatchForward forward_batch(Binder& bind, const CAENParams& p,
                           std::span<const TrainingSample* const> samples, Variant variant,
                           bool diagnostics = false);

struct ForwardOutput {
  double probability = 0.5;
  std::vector<double> item_representation;
  std::vector<AttentionDiagnostics> attention;
};

ForwardOutput forward(const CAENParams& p, const TrainingSample& sample, Variant variant);

// Batch-mean binary cross-entropy with probabilities clamped to [1e-7, 1-1e-7].
Tensor ctr_loss(const Tensor& probabilities, std::span<const double> labels);

}  // namespace caen

#endif  // CAEN_MODEL_CAEN_MODEL_H_
