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

#include "caen/model/caen_model.h"

#include <algorithm>
#include <cmath>

#include "caen/errors.h"

namespace caen {
namespace {

Tensor zeros(Tape& t, std::size_t rows, std::size_t cols) {
  return t.constant({rows, cols}, std::vector<double>(rows * cols, 0.0));
}

// Runs a GRU from a zero state over `steps` (each [rows x input]) and
// returns the hidden state after every step.
std::vector<Tensor> gru_unroll(Binder& bind, const GRUCellParams& gru,
                               const std::vector<Tensor>& steps, std::size_t rows) {
  std::vector<Tensor> hidden;
  Tensor h = zeros(bind.tape(), rows, gru.hidden_dim);
  for (const Tensor& x : steps) {
    h = gru_step(bind, gru, x, h);
    hidden.push_back(h);
  }
  return hidden;
}

// Keys for G non-empty states with n user slots each, group-major.
MultiHeadResult attribute_attention_core(Binder& bind, const CAENParams& p,
                                         const Tensor& queries, std::span<const int> user_ids,
                                         std::span<const std::uint8_t> mask) {
  Tensor users = embed_lookup(bind, p.user_table, user_ids);
  return grouped_multi_head_attention(bind, p.attribute_attention, queries, users, users, mask);
}

Tensor mean_pool_core(Binder& bind, const CAENParams& p, std::span<const int> user_ids,
                      std::span<const std::uint8_t> mask, std::size_t groups) {
  const std::size_t n = user_ids.size() / groups;
  std::vector<double> w(groups * n, 0.0);
  for (std::size_t g = 0; g < groups; ++g) {
    std::size_t count = 0;
    for (std::size_t j = 0; j < n; ++j) count += mask[g * n + j] != 0;
    if (count == 0) throw NumericError("mean pooling over a state without users");
    for (std::size_t j = 0; j < n; ++j) {
      if (mask[g * n + j]) w[g * n + j] = 1.0 / static_cast<double>(count);
    }
  }
  Tensor users = embed_lookup(bind, p.user_table, user_ids);
  return grouped_weighted_sum(bind.tape().constant({groups, n}, std::move(w)), users);
}

std::vector<double> frequency_features(std::span<const Timestamp> changes, Timestamp reference) {
  const std::size_t k = changes.size();
  std::vector<double> f;
  f.reserve(2 * k);
  for (std::size_t i = 0; i < k; ++i) {
    const Timestamp next = i + 1 < k ? changes[i + 1] : reference;
    if (next < changes[i]) {
      throw DataError("frequency_extraction: timestamps must ascend (" +
                      std::to_string(changes[i]) + " then " + std::to_string(next) + ")");
    }
    const double hours = static_cast<double>(next - changes[i]) / kSecondsPerHour;
    f.push_back(std::log1p(hours));
    f.push_back(static_cast<double>(i + 1) / static_cast<double>(k));
  }
  return f;
}

void append_diagnostics(std::vector<AttentionDiagnostics>& out, const char* layer,
                        const MultiHeadResult& r, const Mask& mask) {
  for (std::size_t h = 0; h < r.head_weights.size(); ++h) {
    const Tensor& w = r.head_weights[h];
    AttentionDiagnostics d;
    d.layer = layer;
    d.head = h;
    d.width = w.cols();
    d.weights.assign(w.values().begin(), w.values().end());
    d.mask = mask;
    out.push_back(std::move(d));
  }
}

}  // namespace

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::kFull: return "full";
    case Variant::kNoStateEvolution: return "ns";
    case Variant::kNoHierarchical: return "nh";
    case Variant::kNoFrequency: return "nf";
    case Variant::kUserBehaviorOnly: return "ub";
  }
  return "?";
}

Variant parse_variant(std::string_view name) {
  for (Variant v : {Variant::kFull, Variant::kNoStateEvolution, Variant::kNoHierarchical,
                    Variant::kNoFrequency, Variant::kUserBehaviorOnly}) {
    if (name == variant_name(v)) return v;
  }
  throw ConfigError("unknown variant '" + std::string(name) + "' (expected full, ns, nh, nf, ub)");
}

void ModelConfig::validate() const {
  for (std::size_t v : {users, items, segments, categories, id_dim, attribute_dim, profile_dim,
                        heads, key_proj_dim, value_proj_dim, state_hidden, frequency_hidden,
                        behavior_hidden}) {
    if (v == 0) throw ConfigError("model config: sizes must be positive");
  }
  for (std::size_t w : mlp_hidden) {
    if (w == 0) throw ConfigError("model config: mlp widths must be positive");
  }
}

std::size_t ModelConfig::mlp_input_width() const {
  return user_profile_width() + item_profile_width() + behavior_hidden + state_hidden +
         frequency_hidden;
}

CAENParams make_caen_params(const ModelConfig& config) {
  config.validate();
  CAENParams p;
  p.config = config;
  ParamStore& s = p.store;
  Rng rng(config.seed);
  p.user_table = make_embedding(s, "user_emb", config.users + 1, config.id_dim, rng);
  p.item_table = make_embedding(s, "item_emb", config.items + 1, config.id_dim, rng);
  p.segment_table = make_embedding(s, "segment_emb", config.segments + 1, config.profile_dim, rng);
  p.category_table =
      make_embedding(s, "category_emb", config.categories + 1, config.profile_dim, rng);
  p.price_level_table =
      make_embedding(s, "price_level_emb", kPriceLevelBuckets + 1, config.profile_dim, rng);
  p.discount_table =
      make_embedding(s, "attr.discount_emb", kDiscountBuckets + 1, config.attribute_dim, rng);
  p.level_table =
      make_embedding(s, "attr.level_emb", kPriceLevelBuckets + 1, config.attribute_dim, rng);
  p.rank_table =
      make_embedding(s, "attr.rank_emb", kPriceRankBuckets + 1, config.attribute_dim, rng);

  MultiHeadAttentionConfig aal;
  aal.heads = config.heads;
  aal.query_dim = config.attribute_dim;
  aal.key_dim = aal.value_dim = config.id_dim;
  aal.key_proj_dim = config.key_proj_dim;
  aal.value_proj_dim = config.value_proj_dim;
  aal.output_dim = config.id_dim;
  aal.project_values = false;
  p.attribute_attention = make_multi_head_attention(s, "aal", aal, rng);
  p.empty_state = s.add_zeros("aal.empty_state", {1, config.id_dim});

  p.state_gru = make_gru(s, "sel.gru", config.id_dim, config.state_hidden, rng);
  p.state_dense = make_dense(s, "ns.dense", config.id_dim, config.state_hidden, rng);

  MultiHeadAttentionConfig pal;
  pal.heads = config.heads;
  pal.query_dim = config.id_dim + config.attribute_dim;
  pal.key_dim = config.state_hidden + config.attribute_dim;
  pal.value_dim = config.state_hidden;
  pal.key_proj_dim = config.key_proj_dim;
  pal.value_proj_dim = config.value_proj_dim;
  pal.output_dim = config.state_hidden;
  pal.project_values = false;
  p.personalized_attention = make_multi_head_attention(s, "pal", pal, rng);
  p.cold_item = s.add_zeros("pal.cold_item", {1, config.state_hidden});

  p.frequency_gru = make_gru(s, "fel.gru", 2, config.frequency_hidden, rng);

  p.behavior_gru = make_gru(s, "ub.gru", config.id_dim, config.behavior_hidden, rng);
  MultiHeadAttentionConfig ub;
  ub.heads = config.heads;
  ub.query_dim = config.id_dim;
  ub.key_dim = ub.value_dim = config.behavior_hidden;
  ub.key_proj_dim = config.key_proj_dim;
  ub.value_proj_dim = config.value_proj_dim;
  ub.output_dim = config.behavior_hidden;
  ub.project_values = false;
  p.behavior_attention = make_multi_head_attention(s, "ub.attention", ub, rng);
  p.empty_behavior = s.add_zeros("ub.empty_behavior", {1, config.behavior_hidden});

  p.mlp = make_mlp(s, "mlp", config.mlp_input_width(), config.mlp_hidden, rng);
  return p;
}

Tensor attribute_embeddings(Binder& bind, const CAENParams& p,
                            std::span<const AttributeFeatures> features) {
  std::vector<int> d, l, r;
  for (const auto& f : features) {
    d.push_back(f.discount);
    l.push_back(f.price_level);
    r.push_back(f.price_rank);
  }
  return add(add(embed_lookup(bind, p.discount_table, d), embed_lookup(bind, p.level_table, l)),
             embed_lookup(bind, p.rank_table, r));
}

AttentionOutput attribute_attention(Binder& bind, const CAENParams& p,
                                    const AttributeStateInput& state) {
  if (state.is_empty) return {bind(p.empty_state), {}};
  Tensor q = attribute_embeddings(bind, p, std::span(&state.attribute, 1));
  auto r = attribute_attention_core(bind, p, q, state.user_ids, state.user_mask);
  return {r.output, r.head_weights};
}

Tensor mean_pool_users(Binder& bind, const CAENParams& p, const AttributeStateInput& state) {
  if (state.is_empty) return bind(p.empty_state);
  return mean_pool_core(bind, p, state.user_ids, state.user_mask, 1);
}

Tensor state_evolution(Binder& bind, const CAENParams& p, const Tensor& inputs,
                       bool recurrent) {
  if (!recurrent) return tanh(dense(bind, p.state_dense, inputs));
  std::vector<Tensor> steps;
  for (std::size_t k = 0; k < inputs.rows(); ++k) steps.push_back(slice_rows(inputs, k, 1));
  return concat_rows(gru_unroll(bind, p.state_gru, steps, 1));
}

AttentionOutput personalized_attention(Binder& bind, const CAENParams& p, const Tensor& hidden,
                                       const Tensor& attributes,
                                       std::span<const std::uint8_t> mask, const Tensor& user,
                                       const Tensor& current_attribute) {
  if (std::none_of(mask.begin(), mask.end(), [](auto m) { return m != 0; })) {
    throw DataError("personalized_attention: no real attribute state");
  }
  std::vector<Tensor> q{user, current_attribute};
  std::vector<Tensor> k{hidden, attributes};
  auto r = grouped_multi_head_attention(bind, p.personalized_attention, concat_last_axis(q),
                                        concat_last_axis(k), hidden, mask);
  return {r.output, r.head_weights};
}

Tensor frequency_extraction(Binder& bind, const CAENParams& p,
                            std::span<const Timestamp> change_timestamps, Timestamp reference) {
  const std::size_t hidden = p.config.frequency_hidden;
  auto f = frequency_features(change_timestamps, reference);
  if (change_timestamps.empty()) return zeros(bind.tape(), 1, hidden);
  std::vector<Tensor> steps;
  for (std::size_t i = 0; i < change_timestamps.size(); ++i) {
    steps.push_back(bind.tape().constant({1, 2}, {f[2 * i], f[2 * i + 1]}));
  }
  return gru_unroll(bind, p.frequency_gru, steps, 1).back();
}

AttentionOutput user_behavior_module(Binder& bind, const CAENParams& p,
                                     const UserBehaviorInput& behavior,
                                     const Tensor& target_item) {
  const std::size_t n = behavior.length();
  if (n == 0) return {bind(p.empty_behavior), {}};
  std::vector<Tensor> steps;
  for (std::size_t i = 0; i < n; ++i) {
    steps.push_back(embed_lookup(bind, p.item_table, std::span(&behavior.item_ids[i], 1)));
  }
  Tensor states = concat_rows(gru_unroll(bind, p.behavior_gru, steps, 1));
  const Mask mask(n, 1);
  auto r = grouped_multi_head_attention(bind, p.behavior_attention, target_item, states, states,
                                        mask);
  return {r.output, r.head_weights};
}

BatchForward forward_batch(Binder& bind, const CAENParams& p,
                           std::span<const TrainingSample* const> samples, Variant variant,
                           bool diagnostics) {
  const ModelConfig& c = p.config;
  Tape& tape = bind.tape();
  const std::size_t batch = samples.size();
  if (batch == 0) throw DimensionError("forward_batch: empty batch");
  const std::size_t slots = samples[0]->item.states.size();
  const std::size_t user_slots = slots ? samples[0]->item.states[0].user_ids.size() : 0;
  const std::size_t behavior_slots = samples[0]->behavior.item_ids.size();
  for (const TrainingSample* s : samples) {
    if (s->item.states.size() != slots || s->behavior.item_ids.size() != behavior_slots ||
        s->item.state_mask.size() != slots) {
      throw DimensionError("forward_batch: samples with different padded layouts");
    }
  }
  BatchForward out;

  // Profile embeddings.
  std::vector<int> user_ids, item_ids, segments, categories, levels;
  std::vector<AttributeFeatures> current;
  for (const TrainingSample* s : samples) {
    user_ids.push_back(s->user_id);
    item_ids.push_back(s->item_id);
    segments.push_back(s->user_segment);
    categories.push_back(s->item_category);
    levels.push_back(s->item_price_level);
    current.push_back(s->item.current_attribute);
  }
  Tensor user = embed_lookup(bind, p.user_table, user_ids);
  Tensor item = embed_lookup(bind, p.item_table, item_ids);
  std::vector<Tensor> g1{user, embed_lookup(bind, p.segment_table, segments)};
  std::vector<Tensor> g2{item, embed_lookup(bind, p.category_table, categories),
                         embed_lookup(bind, p.price_level_table, levels)};

  // User behavior: GRU over the longest real prefix in the batch, attention
  // for users with history, fallback vector for the rest.
  Tensor behavior_rep;
  {
    std::vector<std::size_t> warm;
    std::size_t longest = 0;
    for (std::size_t b = 0; b < batch; ++b) {
      const std::size_t n = samples[b]->behavior.length();
      if (n > 0) warm.push_back(b);
      longest = std::max(longest, n);
    }
    std::vector<std::size_t> pick(batch, warm.size());
    for (std::size_t w = 0; w < warm.size(); ++w) pick[warm[w]] = w;
    std::vector<Tensor> rows{bind(p.empty_behavior)};
    if (!warm.empty()) {
      std::vector<Tensor> steps;
      for (std::size_t i = 0; i < longest; ++i) {
        std::vector<int> ids;
        for (std::size_t b : warm) ids.push_back(samples[b]->behavior.item_ids[i]);
        steps.push_back(embed_lookup(bind, p.item_table, ids));
      }
      auto hidden = gru_unroll(bind, p.behavior_gru, steps, warm.size());
      // Step-major rows (i * W + w) to group-major (w * longest + i).
      std::vector<std::size_t> order;
      Mask mask;
      for (std::size_t w = 0; w < warm.size(); ++w) {
        for (std::size_t i = 0; i < longest; ++i) {
          order.push_back(i * warm.size() + w);
          mask.push_back(samples[warm[w]]->behavior.mask[i]);
        }
      }
      Tensor keys = take_rows(concat_rows(hidden), order);
      auto r = grouped_multi_head_attention(bind, p.behavior_attention, take_rows(item, warm),
                                            keys, keys, mask);
      if (diagnostics) append_diagnostics(out.attention, "behavior", r, mask);
      rows.insert(rows.begin(), r.output);
    }
    behavior_rep = take_rows(concat_rows(rows), pick);
  }

  // Item behavior.
  Tensor item_rep, frequency_rep;
  if (variant == Variant::kUserBehaviorOnly) {
    item_rep = zeros(tape, batch, c.state_hidden);
    frequency_rep = zeros(tape, batch, c.frequency_hidden);
  } else {
    // Real states, sample-major: real index = offset[b] + k.
    std::vector<std::size_t> count(batch), offset(batch);
    std::vector<AttributeFeatures> features;
    std::size_t real = 0, deepest = 0;
    std::vector<std::size_t> warm;
    for (std::size_t b = 0; b < batch; ++b) {
      const auto& ib = samples[b]->item;
      std::size_t k = 0;
      while (k < slots && ib.state_mask[k]) ++k;
      for (std::size_t j = k; j < slots; ++j) {
        if (ib.state_mask[j]) throw DataError("forward_batch: real states must precede padding");
      }
      count[b] = k;
      offset[b] = real;
      real += k;
      deepest = std::max(deepest, k);
      if (k > 0) warm.push_back(b);
      for (std::size_t j = 0; j < k; ++j) features.push_back(ib.states[j].attribute);
    }

    std::vector<Tensor> item_rows{bind(p.cold_item)};
    if (!warm.empty()) {
      Tensor attrs = attribute_embeddings(bind, p, features);  // [R x attr]

      // Attribute attention (or mean pooling) over the non-empty states,
      // trimmed to the longest user list among them.
      std::vector<std::size_t> nonempty;
      std::size_t widest = 0;
      for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t k = 0; k < count[b]; ++k) {
          const auto& st = samples[b]->item.states[k];
          if (st.is_empty) continue;
          nonempty.push_back(offset[b] + k);
          widest = std::max(widest, st.user_count());
        }
      }
      std::vector<std::size_t> state_pick(real, nonempty.size());
      std::vector<Tensor> state_rows{bind(p.empty_state)};
      if (!nonempty.empty()) {
        std::vector<int> ids;
        Mask mask;
        for (std::size_t b = 0; b < batch; ++b) {
          for (std::size_t k = 0; k < count[b]; ++k) {
            const auto& st = samples[b]->item.states[k];
            if (st.is_empty) continue;
            if (st.user_ids.size() != user_slots) {
              throw DimensionError("forward_batch: state user slots differ");
            }
            ids.insert(ids.end(), st.user_ids.begin(), st.user_ids.begin() + widest);
            mask.insert(mask.end(), st.user_mask.begin(), st.user_mask.begin() + widest);
          }
        }
        for (std::size_t e = 0; e < nonempty.size(); ++e) state_pick[nonempty[e]] = e;
        Tensor pooled;
        if (variant == Variant::kNoHierarchical) {
          pooled = mean_pool_core(bind, p, ids, mask, nonempty.size());
        } else {
          auto r = attribute_attention_core(bind, p, take_rows(attrs, nonempty), ids, mask);
          if (diagnostics) append_diagnostics(out.attention, "attribute", r, mask);
          pooled = r.output;
        }
        state_rows.insert(state_rows.begin(), pooled);
      }
      Tensor aal = take_rows(concat_rows(state_rows), state_pick);  // [R x id]

      // State evolution over each warm sample's real states only.
      Tensor hidden;  // [R x state_hidden]
      if (variant == Variant::kNoStateEvolution) {
        hidden = state_evolution(bind, p, aal, false);
      } else {
        std::vector<Tensor> aal_rows{aal, zeros(tape, 1, c.id_dim)};
        Tensor padded = concat_rows(aal_rows);
        std::vector<Tensor> steps;
        for (std::size_t k = 0; k < deepest; ++k) {
          std::vector<std::size_t> idx;
          for (std::size_t b : warm) idx.push_back(k < count[b] ? offset[b] + k : real);
          steps.push_back(take_rows(padded, idx));
        }
        auto h = gru_unroll(bind, p.state_gru, steps, warm.size());
        std::vector<std::size_t> order(real);
        for (std::size_t w = 0; w < warm.size(); ++w) {
          const std::size_t b = warm[w];
          for (std::size_t k = 0; k < count[b]; ++k) order[offset[b] + k] = k * warm.size() + w;
        }
        hidden = take_rows(concat_rows(h), order);
      }

      // Personalized attention, one group per warm sample over its slots.
      std::vector<Tensor> hidden_rows{hidden, zeros(tape, 1, c.state_hidden)};
      std::vector<Tensor> attr_rows{attrs, zeros(tape, 1, c.attribute_dim)};
      Tensor hidden_padded = concat_rows(hidden_rows);
      Tensor attrs_padded = concat_rows(attr_rows);
      std::vector<std::size_t> idx;
      Mask mask;
      for (std::size_t b : warm) {
        for (std::size_t k = 0; k < deepest; ++k) {
          idx.push_back(k < count[b] ? offset[b] + k : real);
          mask.push_back(k < count[b]);
        }
      }
      Tensor values = take_rows(hidden_padded, idx);
      std::vector<Tensor> key_parts{values, take_rows(attrs_padded, idx)};
      Tensor current_attrs = attribute_embeddings(bind, p, current);
      std::vector<Tensor> query_parts{take_rows(user, warm), take_rows(current_attrs, warm)};
      auto r = grouped_multi_head_attention(bind, p.personalized_attention,
                                            concat_last_axis(query_parts),
                                            concat_last_axis(key_parts), values, mask);
      if (diagnostics) append_diagnostics(out.attention, "personalized", r, mask);
      item_rows.insert(item_rows.begin(), r.output);
    }
    std::vector<std::size_t> item_pick(batch, warm.size());
    for (std::size_t w = 0; w < warm.size(); ++w) item_pick[warm[w]] = w;
    item_rep = take_rows(concat_rows(item_rows), item_pick);

    // Frequency extraction over each sample's change timestamps.
    if (variant == Variant::kNoFrequency) {
      frequency_rep = zeros(tape, batch, c.frequency_hidden);
    } else {
      std::vector<std::vector<double>> feats(batch);
      std::vector<std::size_t> changed;
      std::size_t longest = 0;
      for (std::size_t b = 0; b < batch; ++b) {
        feats[b] = frequency_features(samples[b]->item.change_timestamps, samples[b]->timestamp);
        const std::size_t k = feats[b].size() / 2;
        if (k > 0) changed.push_back(b);
        longest = std::max(longest, k);
      }
      std::vector<Tensor> rows{zeros(tape, 1, c.frequency_hidden)};
      std::vector<std::size_t> pick(batch, 0);
      if (!changed.empty()) {
        std::vector<Tensor> steps;
        for (std::size_t i = 0; i < longest; ++i) {
          std::vector<double> x;
          for (std::size_t b : changed) {
            const bool real_step = 2 * i < feats[b].size();
            x.push_back(real_step ? feats[b][2 * i] : 0.0);
            x.push_back(real_step ? feats[b][2 * i + 1] : 0.0);
          }
          steps.push_back(tape.constant({changed.size(), 2}, std::move(x)));
        }
        auto h = gru_unroll(bind, p.frequency_gru, steps, changed.size());
        rows.push_back(concat_rows(h));
        // Final real step of each sample; row 0 is the zero vector.
        for (std::size_t w = 0; w < changed.size(); ++w) {
          const std::size_t k = feats[changed[w]].size() / 2;
          pick[changed[w]] = 1 + (k - 1) * changed.size() + w;
        }
      }
      frequency_rep = take_rows(concat_rows(rows), pick);
    }
  }

  std::vector<Tensor> parts{concat_last_axis(g1), concat_last_axis(g2), behavior_rep, item_rep,
                            frequency_rep};
  out.probabilities = mlp_decision(bind, p.mlp, concat_last_axis(parts));
  out.item_representation = item_rep;
  return out;
}

ForwardOutput forward(const CAENParams& p, const TrainingSample& sample, Variant variant) {
  Tape tape;
  Binder bind(tape, p.store, false);
  const TrainingSample* one[] = {&sample};
  BatchForward b = forward_batch(bind, p, one, variant, true);
  ForwardOutput out;
  out.probability = b.probabilities.item();
  out.item_representation.assign(b.item_representation.values().begin(),
                                 b.item_representation.values().end());
  out.attention = std::move(b.attention);
  return out;
}

Tensor ctr_loss(const Tensor& probabilities, std::span<const double> labels) {
  return binary_cross_entropy(probabilities, labels, 1e-7);
}

}  // namespace caen
