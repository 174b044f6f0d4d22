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

#include "caen/train/pipeline.h"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>

#include "caen/data/events.h"
#include "caen/data/synthetic.h"
#include "caen/errors.h"
#include "caen/tensor/finite_diff.h"
#include "caen/train/checkpoint.h"

namespace caen {
namespace {

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::trunc);
  out << j.dump(2) << "\n";
  if (!out) throw DataError("cannot write " + path.string());
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::vector<int> labels_of(std::span<const TrainingSample> samples) {
  std::vector<int> y;
  for (const auto& s : samples) y.push_back(s.label);
  return y;
}

double mean_states(std::span<const TrainingSample> samples) {
  double total = 0.0;
  for (const auto& s : samples) total += s.item.total_states;
  return samples.empty() ? 0.0 : total / static_cast<double>(samples.size());
}

// AUC of the generator's own click probabilities, when every sample has one.
nlohmann::json bayes_auc(std::span<const TrainingSample> samples) {
  std::vector<double> p;
  for (const auto& s : samples) {
    if (s.true_probability < 0.0) return nullptr;
    p.push_back(s.true_probability);
  }
  return evaluate_auc(p, labels_of(samples));
}

}  // namespace

nlohmann::json generate_dataset(const RunConfig& config, const std::filesystem::path& out) {
  config.validate();
  std::filesystem::create_directories(out);
  SyntheticWorld world = generate_synthetic_logs(config.world);
  AssembledDataset data = assemble_dataset(world, config.sample_config());

  write_events(out / "users.jsonl", world.log.users);
  write_events(out / "items.jsonl", world.log.items);
  write_events(out / "interactions.jsonl", world.log.interactions);
  write_events(out / "changes.jsonl", world.log.changes);
  write_events(out / "exposures.jsonl", world.exposures);
  write_samples(out / "train.jsonl", data.train);
  write_samples(out / "test.jsonl", data.test);

  nlohmann::json info;
  info["config"] = to_json(config);
  info["clicks"] = world.log.interactions.size();
  info["changes"] = world.log.changes.size();
  info["train_samples"] = data.train.size();
  info["test_samples"] = data.test.size();
  info["mean_states"] = mean_states(data.train);
  info["bayes_auc_test"] = bayes_auc(data.test);
  info["bayes_auc_exposures"] = bayes_auc_oracle(world.exposures, world.exposure_probability);
  write_json(out / "dataset.json", info);
  return info;
}

DatasetDir load_dataset(const std::filesystem::path& dir) {
  DatasetDir d;
  d.info = read_json(dir / "dataset.json");
  if (!d.info.contains("config")) throw DataError((dir / "dataset.json").string() + ": no config");
  d.config = run_config_from_json(d.info["config"]);
  const SampleConfig sc = d.config.sample_config();
  d.train = read_samples(dir / "train.jsonl", sc);
  d.test = read_samples(dir / "test.jsonl", sc);
  return d;
}

RunConfig merge_with_data(const RunConfig& run, const DatasetDir& data) {
  RunConfig merged = run;
  merged.world = data.config.world;
  merged.sample = data.config.sample;
  merged.validate();
  return merged;
}

nlohmann::json train_and_save(const RunConfig& run, const DatasetDir& data,
                              const std::filesystem::path& out, const TrainLogger& log) {
  const RunConfig config = merge_with_data(run, data);
  const auto start = std::chrono::steady_clock::now();
  CAENParams p = make_caen_params(config.model_config());
  TrainResult result = train(p, config.train, data.train, data.test, log);
  save_checkpoint(out, p.store, result.steps, to_json(config));

  nlohmann::json report;
  report["variant"] = variant_name(config.train.variant);
  report["steps"] = result.steps;
  report["initial"] = result.initial.to_json(false);
  auto& epochs = report["epochs"] = nlohmann::json::array();
  for (const auto& e : result.history) {
    epochs.push_back({{"epoch", e.epoch},
                      {"step", e.step},
                      {"train_loss", e.train_loss},
                      {"learning_rate", e.learning_rate},
                      {"held_out", e.held_out.to_json(false)}});
  }
  report["runtime_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

CAENParams load_model(const std::filesystem::path& ckpt, RunConfig* config) {
  const CheckpointManifest manifest = read_manifest(ckpt);
  RunConfig run = run_config_from_json(manifest.config);
  CAENParams p = make_caen_params(run.model_config());
  load_checkpoint(ckpt, p.store);
  if (config) *config = run;
  return p;
}

nlohmann::json evaluate_checkpoint(const std::filesystem::path& ckpt, const DatasetDir& data,
                                   bool stratify) {
  RunConfig run;
  const CAENParams p = load_model(ckpt, &run);
  if (to_json(run)["world"] != to_json(data.config)["world"]) {
    throw DataError("checkpoint was trained on a different world than " +
                    std::string("the evaluation data"));
  }
  MetricsReport report = evaluate(p, data.test, run.train.variant, run.train.eval_batch_size);
  nlohmann::json j = report.to_json(true);
  if (!stratify) j.erase("buckets");
  j["variant"] = variant_name(run.train.variant);
  j["bayes_auc"] = data.info.value("bayes_auc_test", nlohmann::json(nullptr));
  return j;
}

std::vector<GradientGroupCheck> gradient_check(CAENParams& p,
                                               std::span<const TrainingSample* const> batch,
                                               Variant variant, std::size_t per_group,
                                               std::uint64_t seed) {
  std::vector<double> labels;
  for (const auto* s : batch) labels.push_back(s->label);
  Tape tape;
  Binder bind(tape, p.store, true);
  tape.backward(ctr_loss(forward_batch(bind, p, batch, variant).probabilities, labels));
  const Gradients grads = bind.gradients();

  Rng rng(seed);
  std::vector<GradientGroupCheck> out;
  for (ParamId id = 0; id < p.store.size(); ++id) {
    const Parameter& param = p.store[id];
    const std::size_t n = param.values.size();
    // Prefer coordinates with a nonzero analytic gradient (touched rows).
    std::vector<std::size_t> live;
    for (std::size_t i = 0; i < n; ++i) {
      if (grads[id][i] != 0.0) live.push_back(i);
    }
    std::vector<std::size_t> coords;
    for (std::size_t k = 0; k < per_group; ++k) {
      const bool use_live = !live.empty() && (k + 1 < per_group || live.size() == n);
      const std::size_t pool_size = use_live ? live.size() : n;
      const auto pick = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(pool_size));
      coords.push_back(use_live ? live[pick] : pick);
    }
    const std::vector<double> original = param.values;
    auto f = [&](std::span<const double> x) {
      p.store.mutable_param(id).values.assign(x.begin(), x.end());
      Tape t;
      Binder b(t, p.store, false);
      return ctr_loss(forward_batch(b, p, batch, variant).probabilities, labels).item();
    };
    const auto numeric = finite_diff_grad(f, original, coords, 1e-6);
    p.store.mutable_param(id).values = original;
    GradientGroupCheck g{param.name, coords.size(), 0.0};
    for (std::size_t k = 0; k < coords.size(); ++k) {
      g.max_error = std::max(g.max_error, gradient_error(grads[id][coords[k]], numeric[k]));
    }
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace caen
