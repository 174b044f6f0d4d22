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

#include "caen/train/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "caen/errors.h"
#include "caen/tensor/tensor.h"

namespace caen {
namespace {

void check_inputs(std::span<const double> scores, std::span<const int> labels, const char* what) {
  if (scores.size() != labels.size()) {
    throw DataError(std::string(what) + ": " + std::to_string(scores.size()) + " scores for " +
                    std::to_string(labels.size()) + " labels");
  }
  for (int y : labels) {
    if (y != 0 && y != 1) {
      throw DataError(std::string(what) + ": label " + std::to_string(y) + " is not 0 or 1");
    }
  }
  for (double s : scores) {
    if (!std::isfinite(s)) throw NumericError(std::string(what) + ": non-finite score");
  }
}

std::string bucket_name(int states) {
  if (states <= 0) return "0";
  if (states >= 9) return "9+";
  return std::to_string(states);
}

}  // namespace

double evaluate_auc(std::span<const double> scores, std::span<const int> labels) {
  check_inputs(scores, labels, "evaluate_auc");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double positive_rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1..j
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]]) {
        positive_rank_sum += rank;
        ++positives;
      }
    }
    i = j;
  }
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0) {
    throw DataError("evaluate_auc: needs at least one positive and one negative label");
  }
  const double p = static_cast<double>(positives);
  return (positive_rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(negatives));
}

double evaluate_logloss(std::span<const double> scores, std::span<const int> labels) {
  check_inputs(scores, labels, "evaluate_logloss");
  if (scores.empty()) throw DataError("evaluate_logloss: no samples");
  constexpr double kEps = 1e-7;
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double q = std::clamp(scores[i], kEps, 1.0 - kEps);
    total -= labels[i] ? std::log(q) : std::log(1.0 - q);
  }
  return total / static_cast<double>(scores.size());
}

MetricsReport stratified_report(std::span<const double> scores, std::span<const int> labels,
                                std::span<const int> state_counts) {
  if (state_counts.size() != scores.size()) {
    throw DataError("stratified_report: state counts do not align with scores");
  }
  MetricsReport report;
  report.samples = scores.size();
  report.logloss = evaluate_logloss(scores, labels);
  const auto positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  report.auc = positives > 0 && positives < labels.size() ? evaluate_auc(scores, labels) : NAN;
  for (int b = 0; b <= 9; ++b) {
    std::vector<double> s;
    std::vector<int> y;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (std::clamp(state_counts[i], 0, 9) == b) {
        s.push_back(scores[i]);
        y.push_back(labels[i]);
      }
    }
    if (s.empty()) continue;
    BucketMetrics m;
    m.name = bucket_name(b);
    m.samples = s.size();
    m.positives = static_cast<std::size_t>(std::count(y.begin(), y.end(), 1));
    m.logloss = evaluate_logloss(s, y);
    if (m.positives > 0 && m.positives < m.samples) m.auc = evaluate_auc(s, y);
    report.buckets.push_back(std::move(m));
  }
  return report;
}

nlohmann::json MetricsReport::to_json(bool with_runtime) const {
  nlohmann::json j;
  j["samples"] = samples;
  j["auc"] = std::isfinite(auc) ? nlohmann::json(auc) : nlohmann::json(nullptr);
  j["logloss"] = logloss;
  auto& b = j["buckets"] = nlohmann::json::array();
  for (const auto& m : buckets) {
    nlohmann::json e{{"states", m.name}, {"samples", m.samples}, {"positives", m.positives},
                     {"logloss", m.logloss}};
    e["auc"] = m.auc ? nlohmann::json(*m.auc) : nlohmann::json(nullptr);
    b.push_back(std::move(e));
  }
  if (with_runtime) j["runtime_seconds"] = runtime_seconds;
  return j;
}

}  // namespace caen
