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

#ifndef CAEN_NN_PARAMS_H_
#define CAEN_NN_PARAMS_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "caen/tensor/tensor.h"

namespace caen {

using ParamId = std::size_t;
using Rng = std::mt19937_64;

// Uniform in [0, 1) from the top 53 bits; independent of the standard
// library's distribution implementations.
double uniform01(Rng& rng);
double uniform(Rng& rng, double lo, double hi);

struct Parameter {
  std::string name;
  Shape shape;
  std::vector<double> values;
};

// Named, insertion-ordered collection of learnable tensors.
class ParamStore {
 public:
  ParamId add(std::string name, Shape shape, std::vector<double> values);
  ParamId add_zeros(std::string name, Shape shape);
  // Uniform in +-sqrt(6 / (fan_in + fan_out)) over a [fan_in x fan_out]
  // matrix.
  ParamId add_glorot(std::string name, std::size_t fan_in, std::size_t fan_out,
                     Rng& rng);

  std::size_t size() const { return params_.size(); }
  std::size_t value_count() const;

  const Parameter& operator[](ParamId id) const { return params_.at(id); }
  Parameter& mutable_param(ParamId id) { return params_.at(id); }
  std::optional<ParamId> find(const std::string& name) const;

  const std::vector<Parameter>& params() const { return params_; }

  // Deterministic set of every value; used for the FD oracle and checksums.
  std::vector<double> flatten() const;
  void assign_flat(std::span<const double> flat);
  void fill(double value);

 private:
  std::vector<Parameter> params_;
  std::unordered_map<std::string, ParamId> index_;
};

// One gradient buffer per parameter, aligned with ParamStore ids.
using Gradients = std::vector<std::vector<double>>;

// Lazily binds parameters as view leaves on a tape, once per tape, so a
// parameter used several times accumulates a single gradient.
class Binder {
 public:
  Binder(Tape& tape, const ParamStore& store, bool requires_grad = true);

  Tensor operator()(ParamId id);
  Tape& tape() { return tape_; }
  const ParamStore& store() const { return store_; }

  // Gradient per parameter after tape.backward(); untouched ones are zero.
  Gradients gradients() const;

 private:
  Tape& tape_;
  const ParamStore& store_;
  bool requires_grad_;
  std::vector<int> bound_;
};

}  // namespace caen

#endif  // CAEN_NN_PARAMS_H_
