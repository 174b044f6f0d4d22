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

#include "caen/nn/params.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace caen {

double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

ParamId ParamStore::add(std::string name, Shape shape,
                        std::vector<double> values) {
  if (shape_size(shape) != values.size()) {
    throw DimensionError("parameter " + name + ": shape " +
                         shape_string(shape) + " with " +
                         std::to_string(values.size()) + " values");
  }
  if (index_.count(name)) {
    throw std::invalid_argument("duplicate parameter name " + name);
  }
  const ParamId id = params_.size();
  index_.emplace(name, id);
  params_.push_back({std::move(name), std::move(shape), std::move(values)});
  return id;
}

ParamId ParamStore::add_zeros(std::string name, Shape shape) {
  std::vector<double> zeros(shape_size(shape), 0.0);
  return add(std::move(name), std::move(shape), std::move(zeros));
}

ParamId ParamStore::add_glorot(std::string name, std::size_t fan_in,
                               std::size_t fan_out, Rng& rng) {
  const double limit =
      std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::vector<double> v(fan_in * fan_out);
  for (double& x : v) x = uniform(rng, -limit, limit);
  return add(std::move(name), {fan_in, fan_out}, std::move(v));
}

std::size_t ParamStore::value_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.values.size();
  return n;
}

std::optional<ParamId> ParamStore::find(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<double> ParamStore::flatten() const {
  std::vector<double> flat;
  flat.reserve(value_count());
  for (const auto& p : params_) {
    flat.insert(flat.end(), p.values.begin(), p.values.end());
  }
  return flat;
}

void ParamStore::assign_flat(std::span<const double> flat) {
  if (flat.size() != value_count()) {
    throw DimensionError("assign_flat: expected " +
                         std::to_string(value_count()) + " values, got " +
                         std::to_string(flat.size()));
  }
  std::size_t off = 0;
  for (auto& p : params_) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(off),
                p.values.size(), p.values.begin());
    off += p.values.size();
  }
}

void ParamStore::fill(double value) {
  for (auto& p : params_) std::fill(p.values.begin(), p.values.end(), value);
}

Binder::Binder(Tape& tape, const ParamStore& store, bool requires_grad)
    : tape_(tape),
      store_(store),
      requires_grad_(requires_grad),
      bound_(store.size(), -1) {}

Tensor Binder::operator()(ParamId id) {
  int& slot = bound_.at(id);
  if (slot < 0) {
    const Parameter& p = store_[id];
    slot = tape_.view(p.shape, p.values, requires_grad_).id();
  }
  return Tensor(&tape_, slot);
}

Gradients Binder::gradients() const {
  Gradients grads(store_.size());
  for (ParamId id = 0; id < store_.size(); ++id) {
    const std::size_t n = store_[id].values.size();
    if (bound_[id] >= 0 && !tape_.node(bound_[id]).grad.empty()) {
      grads[id] = tape_.node(bound_[id]).grad;
    } else {
      grads[id].assign(n, 0.0);
    }
  }
  return grads;
}

}  // namespace caen
