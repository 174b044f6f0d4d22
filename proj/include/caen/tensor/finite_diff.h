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

#ifndef CAEN_TENSOR_FINITE_DIFF_H_
#define CAEN_TENSOR_FINITE_DIFF_H_

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace caen {

// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h. Never touches the
// tape, so it is an independent check of backward(). Throws NumericError
// if f returns a non-finite value.
using ScalarFn = std::function<double(std::span<const double>)>;

std::vector<double> finite_diff_grad(const ScalarFn& f, std::vector<double> x,
                                     double h = 1e-6);

// Same, restricted to the listed coordinates (result aligned with `coords`).
std::vector<double> finite_diff_grad(const ScalarFn& f, std::vector<double> x,
                                     std::span<const std::size_t> coords,
                                     double h = 1e-6);

// |a - b| / max(|a|, |b|, 1).
double gradient_error(double analytic, double numeric);

}  // namespace caen

#endif  // CAEN_TENSOR_FINITE_DIFF_H_
