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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <string>

#include "caen/tensor/finite_diff.h"
#include "caen/tensor/ops.h"
#include "test_util.h"

namespace caen {
namespace {

using testing::random_values;

// Naive triple loop, kept independent of the Eigen-backed kernel.
std::vector<double> reference_matmul(std::span<const double> a,
                                     std::span<const double> b, std::size_t m,
                                     std::size_t k, std::size_t n) {
  std::vector<double> c(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t p = 0; p < k; ++p) c[i * n + j] += a[i * k + p] * b[p * n + j];
  return c;
}

TEST_CASE("matmul: identity and hand cases") {
  Tape t;
  Tensor eye = t.constant({2, 2}, {1, 0, 0, 1});
  Tensor m = t.constant({2, 2}, {1.5, -2, 3, 4.25});
  Tensor r = matmul(eye, m);
  CHECK(r.shape() == Shape{2, 2});
  for (std::size_t i = 0; i < 4; ++i) CHECK(r.values()[i] == m.values()[i]);

  Tensor row = t.constant({1, 2}, {1, 2});
  Tensor col = t.constant({2, 1}, {3, 4});
  CHECK(matmul(row, col).item() == 11.0);
}

TEST_CASE("matmul: matches the triple-loop oracle") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    Tape t;
    auto av = random_values(rng, 12);
    auto bv = random_values(rng, 8);
    Tensor c = matmul(t.constant({3, 4}, av), t.constant({4, 2}, bv));
    auto expect = reference_matmul(av, bv, 3, 4, 2);
    for (std::size_t i = 0; i < expect.size(); ++i) {
      CHECK(c.values()[i] == doctest::Approx(expect[i]).epsilon(1e-14));
    }
  }
}

TEST_CASE("matmul: shape mismatch names both shapes") {
  Tape t;
  Tensor a = t.constant({2, 3}, std::vector<double>(6, 1.0));
  Tensor b = t.constant({2, 3}, std::vector<double>(6, 1.0));
  try {
    matmul(a, b);
    FAIL("expected DimensionError");
  } catch (const DimensionError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("[2x3]") != std::string::npos);
    CHECK(msg.find("and [2x3]") != std::string::npos);
  }
}

TEST_CASE("matmul: associativity and distributivity within 1e-9") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    Tape t;
    Tensor a = t.constant({3, 4}, random_values(rng, 12));
    Tensor b = t.constant({4, 5}, random_values(rng, 20));
    Tensor b2 = t.constant({4, 5}, random_values(rng, 20));
    Tensor c = t.constant({5, 2}, random_values(rng, 10));
    Tensor left = matmul(matmul(a, b), c);
    Tensor right = matmul(a, matmul(b, c));
    for (std::size_t i = 0; i < left.size(); ++i) {
      CHECK(std::abs(left.values()[i] - right.values()[i]) < 1e-9);
    }
    Tensor d1 = matmul(a, add(b, b2));
    Tensor d2 = add(matmul(a, b), matmul(a, b2));
    for (std::size_t i = 0; i < d1.size(); ++i) {
      CHECK(std::abs(d1.values()[i] - d2.values()[i]) < 1e-9);
    }
  }
}

TEST_CASE("softmax_masked: hand cases") {
  Tape t;
  Tensor s = softmax_masked(t.constant({1, 2}, {0, 0}), Mask{1, 1});
  CHECK(s.values()[0] == 0.5);
  CHECK(s.values()[1] == 0.5);

  Tensor single = softmax_masked(t.constant({1, 2}, {7.3, 123.0}), Mask{1, 0});
  CHECK(single.values()[0] == 1.0);
  CHECK(single.values()[1] == 0.0);

  Tensor three = softmax_masked(t.constant({3}, {1, 2, 3}), Mask{1, 1, 1});
  const double z = std::exp(1 - 3.0) + std::exp(2 - 3.0) + std::exp(0.0);
  const double expect[] = {std::exp(-2.0) / z, std::exp(-1.0) / z, 1.0 / z};
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(three.values()[i] - expect[i]) < 1e-12);
  }
}

TEST_CASE("softmax_masked: fully masked row is an error") {
  Tape t;
  Tensor logits = t.constant({2, 2}, {1, 2, 3, 4});
  CHECK_THROWS_AS(softmax_masked(logits, Mask{1, 0, 0, 0}), NumericError);
  CHECK_THROWS_AS(softmax_masked(logits, Mask{1, 0}), DimensionError);
}

TEST_CASE("softmax_masked: simplex rows with exact zeros at masked slots") {
  Rng rng(5);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t rows = 1 + rng() % 4, n = 1 + rng() % 9;
    Tape t;
    Tensor logits = t.constant({rows, n}, random_values(rng, rows * n, -30, 30));
    Mask mask(rows * n);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t j = 0; j < n; ++j) mask[r * n + j] = rng() % 3 != 0;
      mask[r * n + rng() % n] = 1;
    }
    auto w = softmax_masked(logits, mask).values();
    for (std::size_t r = 0; r < rows; ++r) {
      double total = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double v = w[r * n + j];
        CHECK(v >= 0.0);
        if (!mask[r * n + j]) CHECK(v == 0.0);
        total += v;
      }
      CHECK(std::abs(total - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("softmax_masked: masked positions receive zero gradient") {
  Tape t;
  Tensor logits = t.variable({1, 3}, {0.3, -1.0, 2.0});
  Tensor w = softmax_masked(logits, Mask{1, 0, 1});
  Tensor loss = sum(mul(w, t.constant({1, 3}, {1.0, 5.0, -2.0})));
  t.backward(loss);
  CHECK(logits.grad()[1] == 0.0);
  CHECK(logits.grad()[0] != 0.0);
}

TEST_CASE("concat_last_axis: definitions and round trip") {
  Tape t;
  Tensor x = t.constant({2, 3}, {1, 2, 3, 4, 5, 6});
  std::vector<Tensor> one{x};
  Tensor same = concat_last_axis(one);
  CHECK(same.shape() == x.shape());
  for (std::size_t i = 0; i < 6; ++i) CHECK(same.values()[i] == x.values()[i]);

  std::vector<Tensor> parts{t.constant({1, 2}, {1, 2}), t.constant({1, 1}, {3})};
  Tensor c = concat_last_axis(parts);
  CHECK(c.shape() == Shape{1, 3});
  CHECK(c.values()[0] == 1);
  CHECK(c.values()[1] == 2);
  CHECK(c.values()[2] == 3);

  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t rows = 1 + rng() % 4, n = 2 + rng() % 6;
    Tensor y = t.constant({rows, n}, random_values(rng, rows * n));
    const std::size_t cut = 1 + rng() % (n - 1);
    std::vector<Tensor> halves{slice_last_axis(y, 0, cut),
                               slice_last_axis(y, cut, n - cut)};
    Tensor back = concat_last_axis(halves);
    for (std::size_t i = 0; i < y.size(); ++i) {
      CHECK(back.values()[i] == y.values()[i]);
    }
  }

  std::vector<Tensor> bad{t.constant({1, 2}, {1, 2}), t.constant({2, 1}, {3, 4})};
  CHECK_THROWS_AS(concat_last_axis(bad), DimensionError);
}

TEST_CASE("backward: product rule and squared norm") {
  Tape t;
  Tensor x = t.variable({1}, {2.0});
  Tensor y = t.variable({1}, {3.0});
  t.backward(mul(x, y));
  CHECK(x.grad()[0] == 3.0);
  CHECK(y.grad()[0] == 2.0);

  Tape t2;
  Tensor v = t2.variable({4}, {1.0, -2.0, 0.5, 3.0});
  t2.backward(sum(mul(v, v)));
  for (std::size_t i = 0; i < 4; ++i) CHECK(v.grad()[i] == 2.0 * v.values()[i]);
}

TEST_CASE("backward: reused tensors accumulate and non-scalar loss fails") {
  Tape t;
  Tensor x = t.variable({1, 2}, {1.0, 2.0});
  Tensor y = add(x, x);
  t.backward(sum(add(y, x)));
  CHECK(x.grad()[0] == 3.0);
  CHECK(x.grad()[1] == 3.0);
  CHECK_THROWS_AS(t.backward(x), DimensionError);
}

TEST_CASE("finite_diff_grad: analytic cases") {
  auto square = [](std::span<const double> x) { return x[0] * x[0]; };
  auto g = finite_diff_grad(square, {3.0}, 1e-6);
  CHECK(std::abs(g[0] - 6.0) <= 1e-6);

  auto constant = [](std::span<const double>) { return 4.2; };
  for (double v : finite_diff_grad(constant, {1.0, -2.0, 3.0})) CHECK(v == 0.0);

  auto blowup = [](std::span<const double> x) { return 1.0 / (x[0] - x[0]); };
  CHECK_THROWS_AS(finite_diff_grad(blowup, {1.0}), NumericError);
}

TEST_CASE("finite_diff_grad agrees with backward on a random 2-layer MLP") {
  Rng rng(21);
  const std::size_t in = 5, hid = 7;
  std::vector<double> x = random_values(rng, 3 * in);
  std::vector<double> theta = random_values(rng, in * hid + hid + hid);
  auto forward = [&](Tape& t, std::span<const double> th, bool grad) {
    Tensor p = grad ? t.variable({th.size()}, {th.begin(), th.end()})
                    : t.constant({th.size()}, {th.begin(), th.end()});
    Tensor w1 = reshape(slice_last_axis(p, 0, in * hid), {in, hid});
    Tensor b1 = slice_last_axis(p, in * hid, hid);
    Tensor w2 = reshape(slice_last_axis(p, in * hid + hid, hid), {hid, 1});
    Tensor h = tanh(add_row(matmul(t.constant({3, in}, x), w1), b1));
    return std::pair{p, mean(sigmoid(matmul(h, w2)))};
  };
  Tape t;
  auto [p, loss] = forward(t, theta, true);
  t.backward(loss);
  auto numeric = finite_diff_grad(
      [&](std::span<const double> th) {
        Tape tt;
        return forward(tt, th, false).second.item();
      },
      theta);
  for (std::size_t i = 0; i < theta.size(); ++i) {
    CHECK(gradient_error(p.grad()[i], numeric[i]) < 1e-5);
  }
}

TEST_CASE("every differentiable op matches finite differences") {
  using testing::check_op_gradient;
  struct Case {
    const char* name;
    testing::OpBuilder build;
    std::vector<Shape> shapes;
  };
  const Mask mask23{1, 0, 1, 1, 1, 0};
  const std::vector<int> ids{2, 0, 1, 2};
  const std::vector<std::size_t> rows{2, 0, 2, 1};
  const std::vector<double> labels{1, 0, 0, 1, 1, 0};
  std::vector<Case> cases = {
      {"matmul", [](Tape&, auto& in) { return matmul(in[0], in[1]); },
       {{3, 4}, {4, 2}}},
      {"transpose", [](Tape&, auto& in) { return transpose(in[0]); }, {{2, 3}}},
      {"add", [](Tape&, auto& in) { return add(in[0], in[1]); }, {{2, 3}, {2, 3}}},
      {"sub", [](Tape&, auto& in) { return sub(in[0], in[1]); }, {{2, 3}, {2, 3}}},
      {"mul", [](Tape&, auto& in) { return mul(in[0], in[1]); }, {{2, 3}, {2, 3}}},
      {"affine", [](Tape&, auto& in) { return affine(in[0], -1.7, 0.3); }, {{5}}},
      {"add_row", [](Tape&, auto& in) { return add_row(in[0], in[1]); },
       {{3, 4}, {1, 4}}},
      {"sigmoid", [](Tape&, auto& in) { return sigmoid(affine(in[0], 4.0)); }, {{6}}},
      {"tanh", [](Tape&, auto& in) { return tanh(affine(in[0], 2.0)); }, {{6}}},
      {"relu", [](Tape&, auto& in) { return relu(in[0]); }, {{8}}},
      {"log", [](Tape&, auto& in) { return log(affine(in[0], 1.0, 2.0)); }, {{5}}},
      {"softmax_masked",
       [&](Tape&, auto& in) { return softmax_masked(affine(in[0], 3.0), mask23); },
       {{2, 3}}},
      {"concat_last_axis",
       [](Tape&, auto& in) {
         std::vector<Tensor> parts{in[0], in[1]};
         return concat_last_axis(parts);
       },
       {{2, 3}, {2, 2}}},
      {"slice_last_axis", [](Tape&, auto& in) { return slice_last_axis(in[0], 1, 2); },
       {{3, 4}}},
      {"concat_rows",
       [](Tape&, auto& in) {
         std::vector<Tensor> parts{in[0], in[1]};
         return concat_rows(parts);
       },
       {{1, 3}, {2, 3}}},
      {"slice_rows", [](Tape&, auto& in) { return slice_rows(in[0], 1, 2); }, {{4, 2}}},
      {"reshape", [](Tape&, auto& in) { return reshape(in[0], {3, 2}); }, {{2, 3}}},
      {"gather_rows", [&](Tape&, auto& in) { return gather_rows(in[0], ids); },
       {{3, 4}}},
      {"take_rows", [&](Tape&, auto& in) { return take_rows(in[0], rows); }, {{3, 2}}},
      {"grouped_scores",
       [](Tape&, auto& in) { return grouped_scores(in[0], in[1], 0.7); },
       {{2, 3}, {8, 3}}},
      {"grouped_weighted_sum",
       [](Tape&, auto& in) { return grouped_weighted_sum(in[0], in[1]); },
       {{2, 3}, {6, 4}}},
      {"sum", [](Tape&, auto& in) { return sum(in[0]); }, {{2, 3}}},
      {"mean", [](Tape&, auto& in) { return mean(in[0]); }, {{2, 3}}},
      {"binary_cross_entropy",
       [&](Tape&, auto& in) { return binary_cross_entropy(sigmoid(in[0]), labels); },
       {{6, 1}}},
  };
  Rng rng(99);
  for (const auto& c : cases) {
    CAPTURE(c.name);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      worst = std::max(worst, check_op_gradient(c.build, c.shapes, rng).max_error);
    }
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("gather_rows: padding row gets no gradient, bad ids are rejected") {
  Tape t;
  Tensor table = t.variable({3, 2}, {9, 9, 1, 2, 3, 4});
  std::vector<int> ids{0, 2, 2};
  Tensor rows = gather_rows(table, ids);
  CHECK(rows.values()[0] == 0.0);
  CHECK(rows.values()[1] == 0.0);
  t.backward(sum(rows));
  CHECK(table.grad()[0] == 0.0);
  CHECK(table.grad()[2] == 0.0);
  CHECK(table.grad()[4] == 2.0);
  std::vector<int> bad{3};
  CHECK_THROWS_WITH_AS(gather_rows(table, bad), doctest::Contains("id 3"),
                       DimensionError);
}

TEST_CASE("grouped ops agree with per-group matmul") {
  Rng rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t groups = 1 + rng() % 4, n = 1 + rng() % 5, d = 1 + rng() % 4;
    Tape t;
    Tensor q = t.constant({groups, d}, random_values(rng, groups * d));
    Tensor k = t.constant({groups * n, d}, random_values(rng, groups * n * d));
    Tensor w = t.constant({groups, n}, random_values(rng, groups * n));
    auto scores = grouped_scores(q, k, 0.5).values();
    auto sums = grouped_weighted_sum(w, k).values();
    for (std::size_t g = 0; g < groups; ++g) {
      Tensor kg = slice_rows(k, g * n, n);
      auto direct = matmul(slice_rows(q, g, 1), transpose(kg)).values();
      auto mixed = matmul(slice_rows(w, g, 1), kg).values();
      for (std::size_t j = 0; j < n; ++j) {
        CHECK(std::abs(scores[g * n + j] - 0.5 * direct[j]) < 1e-14);
      }
      for (std::size_t c = 0; c < d; ++c) {
        CHECK(std::abs(sums[g * d + c] - mixed[c]) < 1e-14);
      }
    }
  }
  Tape t;
  CHECK_THROWS_AS(grouped_scores(t.constant({2, 2}, {1, 2, 3, 4}),
                                 t.constant({3, 2}, {1, 2, 3, 4, 5, 6}), 1.0),
                  DimensionError);
  std::vector<std::size_t> bad{3};
  CHECK_THROWS_AS(take_rows(t.constant({2, 1}, {1, 2}), bad), DimensionError);
}

TEST_CASE("tape replay is bit-identical") {
  auto run = [](std::uint64_t seed) {
    Rng rng(seed);
    Tape t;
    Tensor a = t.variable({4, 3}, random_values(rng, 12));
    Tensor b = t.variable({3, 5}, random_values(rng, 15));
    Tensor w = softmax_masked(matmul(a, b), Mask(20, 1));
    Tensor loss = mean(tanh(w));
    t.backward(loss);
    std::vector<double> out{loss.item()};
    out.insert(out.end(), a.grad().begin(), a.grad().end());
    out.insert(out.end(), b.grad().begin(), b.grad().end());
    return out;
  };
  auto first = run(42);
  auto second = run(42);
  REQUIRE(first.size() == second.size());
  for (std::size_t i = 0; i < first.size(); ++i) CHECK(first[i] == second[i]);
}

TEST_CASE("binary_cross_entropy: analytic values and label validation") {
  Tape t;
  Tensor p = t.constant({4, 1}, {0.5, 0.5, 0.5, 0.5});
  std::vector<double> y{1, 0, 1, 0};
  CHECK(std::abs(binary_cross_entropy(p, y).item() - std::log(2.0)) < 1e-15);
  std::vector<double> bad{1, 0, 2, 0};
  CHECK_THROWS(binary_cross_entropy(p, bad));
}

}  // namespace
}  // namespace caen
