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

// Command-line entry point: gen-data, train, eval, grad-check, ablate.
//
// Exit codes: 0 success, 1 configuration error, 2 data error, 3 numeric
// failure.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "caen/data/synthetic.h"
#include "caen/errors.h"
#include "caen/train/pipeline.h"

namespace caen {
namespace {

enum ExitCode { kOk = 0, kConfigFailure = 1, kDataFailure = 2, kNumericFailure = 3 };

void emit(const nlohmann::json& j, const std::filesystem::path& file) {
  std::cout << j.dump(2) << std::endl;
  if (file.empty()) return;
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::trunc);
  out << j.dump(2) << "\n";
  if (!out) throw DataError("cannot write " + file.string());
}

void log_line(const std::string& line) { std::cerr << line << std::endl; }

int run_grad_check(const std::filesystem::path& config_path, Variant variant,
                   std::size_t per_group) {
  const RunConfig config = load_run_config(config_path);
  SyntheticWorld world = generate_synthetic_logs(config.world);
  AssembledDataset data = assemble_dataset(world, config.sample_config());
  // Two clicks and two non-clicks from the items with the longest histories.
  std::vector<const TrainingSample*> pool;
  for (const auto& s : data.train) pool.push_back(&s);
  std::stable_sort(pool.begin(), pool.end(), [](const auto* a, const auto* b) {
    return a->item.state_count() > b->item.state_count();
  });
  std::vector<const TrainingSample*> batch;
  for (int label : {1, 0}) {
    int taken = 0;
    for (const auto* s : pool) {
      if (s->label == label && taken < 2) {
        batch.push_back(s);
        ++taken;
      }
    }
  }
  if (batch.size() != 4) throw DataError("grad-check: corpus lacks two samples of each label");

  CAENParams p = make_caen_params(config.model_config());
  const auto checks = gradient_check(p, batch, variant, per_group, config.train.seed);
  nlohmann::json report;
  report["variant"] = variant_name(variant);
  report["tolerance"] = 1e-4;
  double worst = 0.0;
  auto& groups = report["groups"] = nlohmann::json::array();
  for (const auto& g : checks) {
    groups.push_back({{"name", g.name}, {"checked", g.checked}, {"max_error", g.max_error}});
    worst = std::max(worst, g.max_error);
  }
  report["max_error"] = worst;
  report["passed"] = worst < 1e-4;
  emit(report, {});
  return worst < 1e-4 ? kOk : kNumericFailure;
}

int run(int argc, char** argv) {
  CLI::App app{"Attribute-change-aware CTR model: data generation, training and evaluation"};
  app.require_subcommand(1);

  std::string config_path, data_dir, out_dir, ckpt_dir, report_path, variant_name_arg = "full";
  bool stratify = false;
  std::size_t per_group = 8;

  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic event log and sample corpus");
  gen->add_option("--config", config_path, "TOML run config")->required();
  gen->add_option("--out", out_dir, "Output data directory")->required();

  auto* tr = app.add_subcommand("train", "Train a model and write a checkpoint");
  tr->add_option("--config", config_path, "TOML run config")->required();
  tr->add_option("--data", data_dir, "Data directory from gen-data")->required();
  tr->add_option("--out", out_dir, "Checkpoint directory")->required();

  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on the held-out split");
  ev->add_option("--ckpt", ckpt_dir, "Checkpoint directory")->required();
  ev->add_option("--data", data_dir, "Data directory from gen-data")->required();
  ev->add_flag("--stratify", stratify, "Report metrics per state-count bucket");
  ev->add_option("--report", report_path, "Report file (default <ckpt>/eval.json)");

  auto* gc = app.add_subcommand("grad-check", "Compare backward against finite differences");
  gc->add_option("--config", config_path, "TOML run config")->required();
  gc->add_option("--variant", variant_name_arg, "full, ns, nh, nf or ub");
  gc->add_option("--per-group", per_group, "Coordinates checked per parameter group");

  auto* ab = app.add_subcommand("ablate", "Train and evaluate one model variant");
  ab->add_option("--variant", variant_name_arg, "full, ns, nh, nf or ub")->required();
  ab->add_option("--config", config_path, "TOML run config")->required();
  ab->add_option("--data", data_dir, "Data directory from gen-data")->required();
  ab->add_option("--out", out_dir, "Checkpoint directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigFailure;
  }

  if (gen->parsed()) {
    const RunConfig config = load_run_config(config_path);
    emit(generate_dataset(config, out_dir), {});
    return kOk;
  }
  if (tr->parsed() || ab->parsed()) {
    RunConfig config = load_run_config(config_path);
    if (ab->parsed()) config.train.variant = parse_variant(variant_name_arg);
    const DatasetDir data = load_dataset(data_dir);
    const auto report = train_and_save(config, data, out_dir, log_line);
    emit(report, std::filesystem::path(out_dir) / "train_report.json");
    if (ab->parsed()) {
      emit(evaluate_checkpoint(out_dir, data, true), std::filesystem::path(out_dir) / "eval.json");
    }
    return kOk;
  }
  if (ev->parsed()) {
    const DatasetDir data = load_dataset(data_dir);
    const std::filesystem::path file =
        report_path.empty() ? std::filesystem::path(ckpt_dir) / "eval.json"
                            : std::filesystem::path(report_path);
    emit(evaluate_checkpoint(ckpt_dir, data, stratify), file);
    return kOk;
  }
  return run_grad_check(config_path, parse_variant(variant_name_arg), per_group);
}

}  // namespace
}  // namespace caen

int main(int argc, char** argv) {
  try {
    return caen::run(argc, argv);
  } catch (const caen::ConfigError& e) {
    std::cerr << "config error: " << e.what() << std::endl;
    return caen::kConfigFailure;
  } catch (const caen::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << std::endl;
    return caen::kNumericFailure;
  } catch (const std::exception& e) {
    std::cerr << "data error: " << e.what() << std::endl;
    return caen::kDataFailure;
  }
}
