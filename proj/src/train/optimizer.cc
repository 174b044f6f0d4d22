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

#include "caen/train/optimizer.h"

#include <cmath>
#include <numbers>
#include <string>

namespace caen {

double cosine_lr(std::size_t step, std::size_t total_steps, double lr0, double lr_min) {
  if (step >= total_steps) return lr_min;
  const double progress = static_cast<double>(step) / static_cast<double>(total_steps);
  return lr_min + 0.5 * (lr0 - lr_min) * (1.0 + std::cos(std::numbers::pi * progress));
}

void adam_step(ParamStore& store, const Gradients& grads, AdamState& state, double lr,
               const AdamConfig& config) {
  if (grads.size() != store.size()) {
    throw DimensionError("adam_step: " + std::to_string(grads.size()) + " gradients for " +
                         std::to_string(store.size()) + " parameters");
  }
  for (ParamId id = 0; id < store.size(); ++id) {
    const auto& g = grads[id];
    if (g.size() != store[id].values.size()) {
      throw DimensionError("adam_step: gradient size mismatch for " + store[id].name);
    }
    for (double x : g) {
      if (!std::isfinite(x)) throw NumericError("non-finite gradient in " + store[id].name);
    }
  }
  if (state.m.empty()) {
    for (ParamId id = 0; id < store.size(); ++id) {
      state.m.emplace_back(store[id].values.size(), 0.0);
      state.v.emplace_back(store[id].values.size(), 0.0);
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  for (ParamId id = 0; id < store.size(); ++id) {
    auto& w = store.mutable_param(id).values;
    auto& m = state.m[id];
    auto& v = state.v[id];
    const auto& g = grads[id];
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g[i];
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g[i] * g[i];
      if (m[i] == 0.0) continue;
      w[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + config.eps);
    }
  }
}

}  // namespace caen
