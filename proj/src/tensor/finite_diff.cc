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

#include "caen/tensor/finite_diff.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "caen/tensor/tensor.h"

namespace caen {
namespace {

double checked(const ScalarFn& f, std::span<const double> x, std::size_t i) {
  const double v = f(x);
  if (!std::isfinite(v)) {
    throw NumericError("finite_diff_grad: non-finite evaluation at coordinate " +
                       std::to_string(i));
  }
  return v;
}

}  // namespace

std::vector<double> finite_diff_grad(const ScalarFn& f, std::vector<double> x,
                                     std::span<const std::size_t> coords,
                                     double h) {
  if (!(h > 0)) throw std::invalid_argument("finite_diff_grad: h must be > 0");
  std::vector<double> grad(coords.size());
  for (std::size_t c = 0; c < coords.size(); ++c) {
    const std::size_t i = coords[c];
    if (i >= x.size()) {
      throw std::out_of_range("finite_diff_grad: coordinate " +
                              std::to_string(i) + " out of range");
    }
    const double saved = x[i];
    x[i] = saved + h;
    const double up = checked(f, x, i);
    x[i] = saved - h;
    const double down = checked(f, x, i);
    x[i] = saved;
    grad[c] = (up - down) / (2.0 * h);
  }
  return grad;
}

std::vector<double> finite_diff_grad(const ScalarFn& f, std::vector<double> x,
                                     double h) {
  std::vector<std::size_t> all(x.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return finite_diff_grad(f, std::move(x), all, h);
}

double gradient_error(double analytic, double numeric) {
  const double denom =
      std::max({std::abs(analytic), std::abs(numeric), 1.0});
  return std::abs(analytic - numeric) / denom;
}

}  // namespace caen
