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

#ifndef CAEN_TRAIN_OPTIMIZER_H_
#define CAEN_TRAIN_OPTIMIZER_H_

#include <cstddef>

#include "caen/nn/params.h"

namespace caen {

// lr_min + (lr0 - lr_min) * (1 + cos(pi * step / total)) / 2. Steps past the
// end stay at lr_min.
double cosine_lr(std::size_t step, std::size_t total_steps, double lr0, double lr_min);

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::size_t step = 0;
  Gradients m;
  Gradients v;
};

// One bias-corrected Adam update of every parameter in `store`. Throws
// NumericError naming the first parameter with a non-finite gradient, before
// anything is modified.
void adam_step(ParamStore& store, const Gradients& grads, AdamState& state, double lr,
               const AdamConfig& config = {});

}  // namespace caen

#endif  // CAEN_TRAIN_OPTIMIZER_H_
