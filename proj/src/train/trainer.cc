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

#include "caen/train/trainer.h"

#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

#include "caen/errors.h"

namespace caen {
namespace {

std::vector<const TrainingSample*> pointers(std::span<const TrainingSample> samples,
                                            std::span<const std::size_t> order,
                                            std::size_t begin, std::size_t end) {
  std::vector<const TrainingSample*> out;
  for (std::size_t i = begin; i < end; ++i) out.push_back(&samples[order[i]]);
  return out;
}

}  // namespace

std::vector<double> predict(const CAENParams& p, std::span<const TrainingSample> samples,
                            Variant variant, std::size_t batch_size) {
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> out;
  out.reserve(samples.size());
  for (std::size_t begin = 0; begin < samples.size(); begin += batch_size) {
    const std::size_t end = std::min(samples.size(), begin + batch_size);
    Tape tape;
    Binder bind(tape, p.store, false);
    auto batch = forward_batch(bind, p, pointers(samples, order, begin, end), variant);
    auto probs = batch.probabilities.values();
    out.insert(out.end(), probs.begin(), probs.end());
  }
  return out;
}

MetricsReport evaluate(const CAENParams& p, std::span<const TrainingSample> samples,
                       Variant variant, std::size_t batch_size) {
  const auto start = std::chrono::steady_clock::now();
  const auto scores = predict(p, samples, variant, batch_size);
  std::vector<int> labels, states;
  for (const auto& s : samples) {
    labels.push_back(s.label);
    states.push_back(s.item.total_states);
  }
  MetricsReport report = stratified_report(scores, labels, states);
  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

double train_step(CAENParams& p, std::span<const TrainingSample* const> batch, Variant variant,
                  AdamState& adam, double learning_rate) {
  std::vector<double> labels;
  for (const auto* s : batch) labels.push_back(s->label);
  Tape tape;
  Binder bind(tape, p.store, true);
  Tensor loss = ctr_loss(forward_batch(bind, p, batch, variant).probabilities, labels);
  const double value = loss.item();
  if (!std::isfinite(value)) throw NumericError("non-finite training loss");
  tape.backward(loss);
  adam_step(p.store, bind.gradients(), adam, learning_rate);
  return value;
}

TrainResult train(CAENParams& p, const TrainConfig& config,
                  std::span<const TrainingSample> train_set,
                  std::span<const TrainingSample> held_out, const TrainLogger& log) {
  config.validate();
  if (train_set.empty()) throw DataError("train: empty training set");
  TrainResult result;
  if (!held_out.empty()) result.initial = evaluate(p, held_out, config.variant, config.eval_batch_size);

  const std::size_t n = train_set.size();
  const std::size_t per_epoch = (n + config.batch_size - 1) / config.batch_size;
  const std::size_t total = per_epoch * config.epochs;
  Rng rng(config.seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  AdamState adam;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    for (std::size_t i = n; i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i));
      std::swap(order[i - 1], order[j]);
    }
    double loss_sum = 0.0;
    double lr = config.learning_rate;
    for (std::size_t b = 0; b < per_epoch; ++b) {
      const std::size_t begin = b * config.batch_size;
      const std::size_t end = std::min(n, begin + config.batch_size);
      auto batch = pointers(train_set, order, begin, end);
      lr = cosine_lr(result.steps, total, config.learning_rate, config.min_learning_rate);
      double value;
      try {
        value = train_step(p, batch, config.variant, adam, lr);
      } catch (const NumericError& e) {
        throw NumericError("epoch " + std::to_string(epoch) + ", step " +
                           std::to_string(result.steps + 1) + ": " + e.what());
      }
      ++result.steps;
      loss_sum += value;
      if (log && config.log_every > 0 && result.steps % config.log_every == 0) {
        std::ostringstream line;
        line << "step " << result.steps << "/" << total << " loss " << value << " lr " << lr;
        log(line.str());
      }
    }
    EpochLog entry;
    entry.epoch = epoch;
    entry.step = result.steps;
    entry.train_loss = loss_sum / static_cast<double>(per_epoch);
    entry.learning_rate = lr;
    if (!held_out.empty()) entry.held_out = evaluate(p, held_out, config.variant, config.eval_batch_size);
    if (log) {
      std::ostringstream line;
      line << "epoch " << epoch << " train_loss " << entry.train_loss;
      if (!held_out.empty()) line << " auc " << entry.held_out.auc << " logloss " << entry.held_out.logloss;
      line << " (" << std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()
           << " s)";
      log(line.str());
    }
    result.history.push_back(std::move(entry));
  }
  return result;
}

}  // namespace caen
