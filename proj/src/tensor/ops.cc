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

#include "caen/tensor/ops.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Core>

namespace caen {
namespace {

using RowMat =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

Tape& tape_of(const Tensor& a) {
  if (!a.valid()) throw std::invalid_argument("operation on an empty tensor");
  return *a.tape();
}

void same_tape(const Tensor& a, const Tensor& b) {
  if (a.tape() != b.tape()) {
    throw std::invalid_argument("operands recorded on different tapes");
  }
}

void same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " +
                         shape_string(a.shape()) + " vs " +
                         shape_string(b.shape()));
  }
}

std::size_t last_dim(const Shape& s) { return s.empty() ? 1 : s.back(); }

std::vector<double> copy_values(const Tensor& a) {
  auto v = a.values();
  return {v.begin(), v.end()};
}

// Element-wise unary op with derivative expressed through input x and
// output y.
template <typename F, typename D>
Tensor unary(const Tensor& a, F f, D dfdx) {
  Tape& tape = tape_of(a);
  auto in = a.values();
  std::vector<double> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = f(in[i]);
  const int ia = a.id();
  return tape.record(a.shape(), std::move(out), a.requires_grad(),
                     [ia, dfdx](Tape& t, int self) {
                       auto x = t.values(ia);
                       auto y = t.values(self);
                       const auto& g = t.node(self).grad;
                       auto ga = t.grad_buffer(ia);
                       for (std::size_t i = 0; i < g.size(); ++i) {
                         ga[i] += g[i] * dfdx(x[i], y[i]);
                       }
                     });
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  Tape& tape = tape_of(a);
  same_tape(a, b);
  if (a.rank() != 2 || b.rank() != 2 || a.cols() != b.rows()) {
    throw DimensionError("matmul: incompatible shapes " +
                         shape_string(a.shape()) + " and " +
                         shape_string(b.shape()));
  }
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  std::vector<double> out(m * n);
  MutMap(out.data(), m, n).noalias() =
      ConstMap(a.values().data(), m, k) * ConstMap(b.values().data(), k, n);
  const int ia = a.id(), ib = b.id();
  const bool ra = a.requires_grad(), rb = b.requires_grad();
  return tape.record(
      {m, n}, std::move(out), ra || rb,
      [ia, ib, ra, rb, m, k, n](Tape& t, int self) {
        ConstMap g(t.node(self).grad.data(), m, n);
        if (ra) {
          MutMap(t.grad_buffer(ia).data(), m, k).noalias() +=
              g * ConstMap(t.values(ib).data(), k, n).transpose();
        }
        if (rb) {
          MutMap(t.grad_buffer(ib).data(), k, n).noalias() +=
              ConstMap(t.values(ia).data(), m, k).transpose() * g;
        }
      });
}

Tensor transpose(const Tensor& a) {
  Tape& tape = tape_of(a);
  const std::size_t m = a.rows(), n = a.cols();
  std::vector<double> out(m * n);
  MutMap(out.data(), n, m) = ConstMap(a.values().data(), m, n).transpose();
  const int ia = a.id();
  return tape.record({n, m}, std::move(out), a.requires_grad(),
                     [ia, m, n](Tape& t, int self) {
                       MutMap(t.grad_buffer(ia).data(), m, n) +=
                           ConstMap(t.node(self).grad.data(), n, m)
                               .transpose();
                     });
}

Tensor add(const Tensor& a, const Tensor& b) {
  Tape& tape = tape_of(a);
  same_tape(a, b);
  same_shape(a, b, "add");
  auto x = a.values();
  auto y = b.values();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + y[i];
  const int ia = a.id(), ib = b.id();
  const bool ra = a.requires_grad(), rb = b.requires_grad();
  return tape.record(a.shape(), std::move(out), ra || rb,
                     [ia, ib, ra, rb](Tape& t, int self) {
                       const auto& g = t.node(self).grad;
                       if (ra) {
                         auto ga = t.grad_buffer(ia);
                         for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                       }
                       if (rb) {
                         auto gb = t.grad_buffer(ib);
                         for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
                       }
                     });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  Tape& tape = tape_of(a);
  same_tape(a, b);
  same_shape(a, b, "sub");
  auto x = a.values();
  auto y = b.values();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - y[i];
  const int ia = a.id(), ib = b.id();
  const bool ra = a.requires_grad(), rb = b.requires_grad();
  return tape.record(a.shape(), std::move(out), ra || rb,
                     [ia, ib, ra, rb](Tape& t, int self) {
                       const auto& g = t.node(self).grad;
                       if (ra) {
                         auto ga = t.grad_buffer(ia);
                         for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                       }
                       if (rb) {
                         auto gb = t.grad_buffer(ib);
                         for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
                       }
                     });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  Tape& tape = tape_of(a);
  same_tape(a, b);
  same_shape(a, b, "mul");
  auto x = a.values();
  auto y = b.values();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * y[i];
  const int ia = a.id(), ib = b.id();
  const bool ra = a.requires_grad(), rb = b.requires_grad();
  return tape.record(a.shape(), std::move(out), ra || rb,
                     [ia, ib, ra, rb](Tape& t, int self) {
                       const auto& g = t.node(self).grad;
                       auto x = t.values(ia);
                       auto y = t.values(ib);
                       if (ra) {
                         auto ga = t.grad_buffer(ia);
                         for (std::size_t i = 0; i < g.size(); ++i) {
                           ga[i] += g[i] * y[i];
                         }
                       }
                       if (rb) {
                         auto gb = t.grad_buffer(ib);
                         for (std::size_t i = 0; i < g.size(); ++i) {
                           gb[i] += g[i] * x[i];
                         }
                       }
                     });
}

Tensor affine(const Tensor& a, double scale, double shift) {
  return unary(
      a, [scale, shift](double x) { return scale * x + shift; },
      [scale](double, double) { return scale; });
}

Tensor add_row(const Tensor& a, const Tensor& row) {
  Tape& tape = tape_of(a);
  same_tape(a, row);
  const std::size_t n = last_dim(a.shape());
  if (row.size() != n || a.rank() == 0) {
    throw DimensionError("add_row: row " + shape_string(row.shape()) +
                         " does not match last axis of " +
                         shape_string(a.shape()));
  }
  const std::size_t m = a.size() / n;
  auto x = a.values();
  auto r = row.values();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = x[i * n + j] + r[j];
  }
  const int ia = a.id(), ir = row.id();
  const bool ra = a.requires_grad(), rr = row.requires_grad();
  return tape.record(a.shape(), std::move(out), ra || rr,
                     [ia, ir, ra, rr, m, n](Tape& t, int self) {
                       const auto& g = t.node(self).grad;
                       if (ra) {
                         auto ga = t.grad_buffer(ia);
                         for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                       }
                       if (rr) {
                         auto gr = t.grad_buffer(ir);
                         for (std::size_t i = 0; i < m; ++i) {
                           for (std::size_t j = 0; j < n; ++j) {
                             gr[j] += g[i * n + j];
                           }
                         }
                       }
                     });
}

Tensor sigmoid(const Tensor& a) {
  return unary(
      a,
      [](double x) {
        if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor tanh(const Tensor& a) {
  return unary(
      a, [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

Tensor relu(const Tensor& a) {
  return unary(
      a, [](double x) { return x > 0 ? x : 0.0; },
      [](double x, double) { return x > 0 ? 1.0 : 0.0; });
}

Tensor log(const Tensor& a) {
  for (double v : a.values()) {
    if (!(v > 0)) throw NumericError("log of non-positive value");
  }
  return unary(
      a, [](double x) { return std::log(x); },
      [](double x, double) { return 1.0 / x; });
}

Tensor softmax_masked(const Tensor& logits, std::span<const std::uint8_t> mask) {
  Tape& tape = tape_of(logits);
  if (mask.size() != logits.size()) {
    throw DimensionError("softmax_masked: mask of " +
                         std::to_string(mask.size()) +
                         " entries for logits " +
                         shape_string(logits.shape()));
  }
  const std::size_t n = last_dim(logits.shape());
  const std::size_t rows = n == 0 ? 0 : logits.size() / n;
  auto x = logits.values();
  std::vector<double> out(x.size(), 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t base = r * n;
    double mx = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t j = 0; j < n; ++j) {
      if (mask[base + j]) {
        mx = std::max(mx, x[base + j]);
        any = true;
      }
    }
    if (!any) {
      throw NumericError("softmax_masked: row " + std::to_string(r) +
                         " has every position masked");
    }
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (mask[base + j]) {
        out[base + j] = std::exp(x[base + j] - mx);
        z += out[base + j];
      }
    }
    for (std::size_t j = 0; j < n; ++j) out[base + j] /= z;
  }
  const int il = logits.id();
  return tape.record(logits.shape(), std::move(out), logits.requires_grad(),
                     [il, rows, n](Tape& t, int self) {
                       auto y = t.values(self);
                       const auto& g = t.node(self).grad;
                       auto gl = t.grad_buffer(il);
                       // Masked y are exactly zero, so they drop out of both
                       // the dot product and the update.
                       for (std::size_t r = 0; r < rows; ++r) {
                         const std::size_t base = r * n;
                         double dot = 0.0;
                         for (std::size_t j = 0; j < n; ++j) {
                           dot += y[base + j] * g[base + j];
                         }
                         for (std::size_t j = 0; j < n; ++j) {
                           gl[base + j] += y[base + j] * (g[base + j] - dot);
                         }
                       }
                     });
}

Tensor softmax(const Tensor& logits) {
  Mask all(logits.size(), 1);
  return softmax_masked(logits, all);
}

Tensor concat_last_axis(std::span<const Tensor> parts) {
  if (parts.empty()) throw DimensionError("concat_last_axis: no inputs");
  Tape& tape = tape_of(parts[0]);
  const Shape& s0 = parts[0].shape();
  if (s0.empty()) throw DimensionError("concat_last_axis: scalar input");
  Shape lead(s0.begin(), s0.end() - 1);
  std::size_t total = 0;
  bool any_grad = false;
  for (const Tensor& p : parts) {
    same_tape(parts[0], p);
    const Shape& s = p.shape();
    if (s.size() != s0.size() || !std::equal(lead.begin(), lead.end(), s.begin())) {
      throw DimensionError("concat_last_axis: leading dimensions differ: " +
                           shape_string(s0) + " vs " + shape_string(s));
    }
    total += s.back();
    any_grad = any_grad || p.requires_grad();
  }
  const std::size_t rows = shape_size(lead);
  std::vector<double> out(rows * total);
  std::vector<int> ids;
  std::vector<std::size_t> widths;
  std::size_t offset = 0;
  for (const Tensor& p : parts) {
    const std::size_t w = p.shape().back();
    auto v = p.values();
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy_n(v.begin() + static_cast<std::ptrdiff_t>(r * w), w,
                  out.begin() + static_cast<std::ptrdiff_t>(r * total + offset));
    }
    offset += w;
    ids.push_back(p.requires_grad() ? p.id() : -1);
    widths.push_back(w);
  }
  Shape shape = lead;
  shape.push_back(total);
  return tape.record(std::move(shape), std::move(out), any_grad,
                     [ids, widths, rows, total](Tape& t, int self) {
                       const auto& g = t.node(self).grad;
                       std::size_t off = 0;
                       for (std::size_t p = 0; p < ids.size(); ++p) {
                         const std::size_t w = widths[p];
                         if (ids[p] >= 0) {
                           auto gp = t.grad_buffer(ids[p]);
                           for (std::size_t r = 0; r < rows; ++r) {
                             for (std::size_t j = 0; j < w; ++j) {
                               gp[r * w + j] += g[r * total + off + j];
                             }
                           }
                         }
                         off += w;
                       }
                     });
}

Tensor slice_last_axis(const Tensor& a, std::size_t begin, std::size_t length) {
  Tape& tape = tape_of(a);
  const Shape& s = a.shape();
  if (s.empty() || begin + length > s.back()) {
    throw DimensionError("slice_last_axis: [" + std::to_string(begin) + ", " +
                         std::to_string(begin + length) + ") out of range for " +
                         shape_string(s));
  }
  const std::size_t n = s.back();
  const std::size_t rows = a.size() / n;
  auto v = a.values();
  std::vector<double> out(rows * length);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < length; ++j) {
      out[r * length + j] = v[r * n + begin + j];
    }
  }
  Shape shape = s;
  shape.back() = length;
  const int ia = a.id();
  return tape.record(std::move(shape), std::move(out), a.requires_grad(),
                     [ia, rows, n, begin, length](Tape& t, int self) {
                       const auto& g = t.node(self).grad;
                       auto ga = t.grad_buffer(ia);
                       for (std::size_t r = 0; r < rows; ++r) {
                         for (std::size_t j = 0; j < length; ++j) {
                           ga[r * n + begin + j] += g[r * length + j];
                         }
                       }
                     });
}

Tensor concat_rows(std::span<const Tensor> parts) {
  if (parts.empty()) throw DimensionError("concat_rows: no inputs");
  Tape& tape = tape_of(parts[0]);
  const std::size_t n = parts[0].cols();
  std::size_t rows = 0;
  bool any_grad = false;
  for (const Tensor& p : parts) {
    same_tape(parts[0], p);
    if (p.rank() != 2 || p.cols() != n) {
      throw DimensionError("concat_rows: column mismatch " +
                           shape_string(parts[0].shape()) + " vs " +
                           shape_string(p.shape()));
    }
    rows += p.rows();
    any_grad = any_grad || p.requires_grad();
  }
  std::vector<double> out;
  out.reserve(rows * n);
  std::vector<int> ids;
  std::vector<std::size_t> sizes;
  for (const Tensor& p : parts) {
    auto v = p.values();
    out.insert(out.end(), v.begin(), v.end());
    ids.push_back(p.requires_grad() ? p.id() : -1);
    sizes.push_back(v.size());
  }
  return tape.record({rows, n}, std::move(out), any_grad,
                     [ids, sizes](Tape& t, int self) {
                       const auto& g = t.node(self).grad;
                       std::size_t off = 0;
                       for (std::size_t p = 0; p < ids.size(); ++p) {
                         if (ids[p] >= 0) {
                           auto gp = t.grad_buffer(ids[p]);
                           for (std::size_t i = 0; i < sizes[p]; ++i) {
                             gp[i] += g[off + i];
                           }
                         }
                         off += sizes[p];
                       }
                     });
}

Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t length) {
  Tape& tape = tape_of(a);
  const std::size_t m = a.rows(), n = a.cols();
  if (begin + length > m) {
    throw DimensionError("slice_rows: [" + std::to_string(begin) + ", " +
                         std::to_string(begin + length) + ") out of range for " +
                         shape_string(a.shape()));
  }
  auto v = a.values();
  std::vector<double> out(v.begin() + static_cast<std::ptrdiff_t>(begin * n),
                          v.begin() +
                              static_cast<std::ptrdiff_t>((begin + length) * n));
  const int ia = a.id();
  return tape.record({length, n}, std::move(out), a.requires_grad(),
                     [ia, begin, n](Tape& t, int self) {
                       const auto& g = t.node(self).grad;
                       auto ga = t.grad_buffer(ia);
                       for (std::size_t i = 0; i < g.size(); ++i) {
                         ga[begin * n + i] += g[i];
                       }
                     });
}

Tensor reshape(const Tensor& a, Shape shape) {
  Tape& tape = tape_of(a);
  if (shape_size(shape) != a.size()) {
    throw DimensionError("reshape: " + shape_string(a.shape()) + " to " +
                         shape_string(shape));
  }
  const int ia = a.id();
  return tape.record(std::move(shape), copy_values(a), a.requires_grad(),
                     [ia](Tape& t, int self) {
                       const auto& g = t.node(self).grad;
                       auto ga = t.grad_buffer(ia);
                       for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                     });
}

Tensor gather_rows(const Tensor& table, std::span<const int> ids) {
  Tape& tape = tape_of(table);
  const std::size_t vocab = table.rows(), dim = table.cols();
  for (int id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= vocab) {
      throw DimensionError("gather_rows: id " + std::to_string(id) +
                           " outside vocabulary of size " +
                           std::to_string(vocab));
    }
  }
  auto v = table.values();
  std::vector<double> out(ids.size() * dim, 0.0);
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] == 0) continue;
    std::copy_n(v.begin() + static_cast<std::ptrdiff_t>(ids[r] * dim), dim,
                out.begin() + static_cast<std::ptrdiff_t>(r * dim));
  }
  const int it = table.id();
  std::vector<int> idx(ids.begin(), ids.end());
  return tape.record({ids.size(), dim}, std::move(out), table.requires_grad(),
                     [it, idx = std::move(idx), dim](Tape& t, int self) {
                       const auto& g = t.node(self).grad;
                       auto gt = t.grad_buffer(it);
                       for (std::size_t r = 0; r < idx.size(); ++r) {
                         if (idx[r] == 0) continue;
                         const std::size_t base =
                             static_cast<std::size_t>(idx[r]) * dim;
                         for (std::size_t j = 0; j < dim; ++j) {
                           gt[base + j] += g[r * dim + j];
                         }
                       }
                     });
}

Tensor take_rows(const Tensor& a, std::span<const std::size_t> rows) {
  Tape& tape = tape_of(a);
  const std::size_t m = a.rows(), d = a.cols();
  for (std::size_t r : rows) {
    if (r >= m) {
      throw DimensionError("take_rows: row " + std::to_string(r) +
                           " out of range for " + shape_string(a.shape()));
    }
  }
  auto v = a.values();
  std::vector<double> out(rows.size() * d);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy_n(v.begin() + static_cast<std::ptrdiff_t>(rows[i] * d), d,
                out.begin() + static_cast<std::ptrdiff_t>(i * d));
  }
  const int ia = a.id();
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  return tape.record({rows.size(), d}, std::move(out), a.requires_grad(),
                     [ia, idx = std::move(idx), d](Tape& t, int self) {
                       const auto& g = t.node(self).grad;
                       auto ga = t.grad_buffer(ia);
                       for (std::size_t i = 0; i < idx.size(); ++i) {
                         for (std::size_t j = 0; j < d; ++j) {
                           ga[idx[i] * d + j] += g[i * d + j];
                         }
                       }
                     });
}

Tensor grouped_scores(const Tensor& q, const Tensor& k, double scale) {
  Tape& tape = tape_of(q);
  same_tape(q, k);
  if (q.rank() != 2 || k.rank() != 2 || q.cols() != k.cols() ||
      q.rows() == 0 || k.rows() % q.rows() != 0) {
    throw DimensionError("grouped_scores: incompatible shapes " +
                         shape_string(q.shape()) + " and " +
                         shape_string(k.shape()));
  }
  const std::size_t groups = q.rows(), d = q.cols(), n = k.rows() / groups;
  auto qv = q.values();
  auto kv = k.values();
  std::vector<double> out(groups * n);
  for (std::size_t g = 0; g < groups; ++g) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        acc += qv[g * d + c] * kv[(g * n + j) * d + c];
      }
      out[g * n + j] = scale * acc;
    }
  }
  const int iq = q.id(), ik = k.id();
  const bool rq = q.requires_grad(), rk = k.requires_grad();
  return tape.record(
      {groups, n}, std::move(out), rq || rk,
      [iq, ik, rq, rk, groups, n, d, scale](Tape& t, int self) {
        const auto& gout = t.node(self).grad;
        auto qv = t.values(iq);
        auto kv = t.values(ik);
        std::span<double> gq, gk;
        if (rq) gq = t.grad_buffer(iq);
        if (rk) gk = t.grad_buffer(ik);
        for (std::size_t g = 0; g < groups; ++g) {
          for (std::size_t j = 0; j < n; ++j) {
            const double s = scale * gout[g * n + j];
            if (s == 0.0) continue;
            const std::size_t row = (g * n + j) * d;
            for (std::size_t c = 0; c < d; ++c) {
              if (rq) gq[g * d + c] += s * kv[row + c];
              if (rk) gk[row + c] += s * qv[g * d + c];
            }
          }
        }
      });
}

Tensor grouped_weighted_sum(const Tensor& w, const Tensor& v) {
  Tape& tape = tape_of(w);
  same_tape(w, v);
  if (w.rank() != 2 || v.rank() != 2 || v.rows() != w.size()) {
    throw DimensionError("grouped_weighted_sum: incompatible shapes " +
                         shape_string(w.shape()) + " and " +
                         shape_string(v.shape()));
  }
  const std::size_t groups = w.rows(), n = w.cols(), d = v.cols();
  auto wv = w.values();
  auto vv = v.values();
  std::vector<double> out(groups * d, 0.0);
  for (std::size_t g = 0; g < groups; ++g) {
    for (std::size_t j = 0; j < n; ++j) {
      const double a = wv[g * n + j];
      if (a == 0.0) continue;
      const std::size_t row = (g * n + j) * d;
      for (std::size_t c = 0; c < d; ++c) out[g * d + c] += a * vv[row + c];
    }
  }
  const int iw = w.id(), iv = v.id();
  const bool rw = w.requires_grad(), rv = v.requires_grad();
  return tape.record(
      {groups, d}, std::move(out), rw || rv,
      [iw, iv, rw, rv, groups, n, d](Tape& t, int self) {
        const auto& gout = t.node(self).grad;
        auto wv = t.values(iw);
        auto vv = t.values(iv);
        std::span<double> gw, gv;
        if (rw) gw = t.grad_buffer(iw);
        if (rv) gv = t.grad_buffer(iv);
        for (std::size_t g = 0; g < groups; ++g) {
          for (std::size_t j = 0; j < n; ++j) {
            const std::size_t row = (g * n + j) * d;
            double acc = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
              acc += gout[g * d + c] * vv[row + c];
              if (rv) gv[row + c] += wv[g * n + j] * gout[g * d + c];
            }
            if (rw) gw[g * n + j] += acc;
          }
        }
      });
}

Tensor sum(const Tensor& a) {
  Tape& tape = tape_of(a);
  double s = 0.0;
  for (double v : a.values()) s += v;
  const int ia = a.id();
  return tape.record({1}, {s}, a.requires_grad(), [ia](Tape& t, int self) {
    const double g = t.node(self).grad[0];
    for (double& x : t.grad_buffer(ia)) x += g;
  });
}

Tensor mean(const Tensor& a) {
  if (a.size() == 0) throw DimensionError("mean of an empty tensor");
  return affine(sum(a), 1.0 / static_cast<double>(a.size()));
}

Tensor binary_cross_entropy(const Tensor& probs, std::span<const double> labels,
                            double eps) {
  Tape& tape = tape_of(probs);
  if (labels.size() != probs.size() || labels.empty()) {
    throw DimensionError("binary_cross_entropy: " +
                         std::to_string(labels.size()) + " labels for " +
                         shape_string(probs.shape()));
  }
  for (double y : labels) {
    if (y != 0.0 && y != 1.0) {
      throw std::invalid_argument("binary_cross_entropy: label " +
                                  std::to_string(y) + " is not 0 or 1");
    }
  }
  auto p = probs.values();
  const double n = static_cast<double>(p.size());
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double q = std::clamp(p[i], eps, 1.0 - eps);
    total -= labels[i] * std::log(q) + (1.0 - labels[i]) * std::log(1.0 - q);
  }
  const int ip = probs.id();
  std::vector<double> y(labels.begin(), labels.end());
  return tape.record(
      {1}, {total / n}, probs.requires_grad(),
      [ip, y = std::move(y), eps, n](Tape& t, int self) {
        const double g = t.node(self).grad[0];
        auto p = t.values(ip);
        auto gp = t.grad_buffer(ip);
        for (std::size_t i = 0; i < p.size(); ++i) {
          if (p[i] < eps || p[i] > 1.0 - eps) continue;
          gp[i] += g * (-(y[i] / p[i]) + (1.0 - y[i]) / (1.0 - p[i])) / n;
        }
      });
}

}  // namespace caen
