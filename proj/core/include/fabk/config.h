// Copyright 2026 The fabk Authors. All Rights Reserved.
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
// =============================================================================

#ifndef FABK_CONFIG_H_
#define FABK_CONFIG_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fabk/controller.h"
#include "fabk/data.h"
#include "fabk/sparsify.h"
#include "fabk/timing.h"

namespace fabk {

struct DatasetConfig {
  enum class Kind { kSynthetic, kCsv };
  Kind kind = Kind::kSynthetic;
  SynthSpec synth;
  std::size_t test_samples_per_class = 50;
  std::filesystem::path csv_path;
  std::filesystem::path test_csv_path;  // optional held-out CSV
};

struct ControllerConfig {
  ControllerKind kind = ControllerKind::kFixed;
  std::optional<double> k_min;      // default max(1, 0.002 D)
  std::optional<double> k_max;      // default D
  std::optional<double> k_initial;  // default: midpoint of [k_min, k_max]
  VaryingIntervalParams varying;    // alpha 1.5, window 20
  Exp3Params exp3;
  double exp3_cost_scale = 0.0;
  std::vector<double> replay;
  std::filesystem::path replay_from;  // rounds.jsonl whose "k" column is replayed
};

struct ExperimentConfig {
  std::string id = "run";
  std::uint64_t seed = 1;
  DatasetConfig dataset;
  std::size_t hidden_dim = 0;  // 0: logistic regression
  std::size_t clients = 20;
  std::size_t minibatch = 32;
  double eta = 0.01;
  StrategyConfig strategy;
  bool strategy_k_set = false;
  ControllerConfig controller;
  TimingConfig timing;
  std::optional<double> target_loss;
  std::size_t max_rounds = 1000;
  std::size_t eval_every = 10;
  std::size_t threads = 1;
  double divergence_factor = 10.0;
  std::size_t divergence_window = 20;
};

// Parses the JSON configuration text. Unknown keys and out-of-range values
// raise InputError naming the offending key.
// Relative paths are resolved against `base_dir` when it is nonempty.
ExperimentConfig parse_config(const std::string& text,
                              const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

// Canonical JSON rendering (every field, fixed key order).
std::string config_to_json(const ExperimentConfig& cfg);

struct SweepConfig {
  std::string base_text;  // base experiment JSON
  std::filesystem::path base_dir;
  // Dotted-path overrides; the sweep runs their cartesian product in order.
  std::vector<std::pair<std::string, std::vector<std::string>>> grid;
  std::size_t parallel = 1;
};

SweepConfig load_sweep_config(const std::filesystem::path& path);
SweepConfig parse_sweep_config(const std::string& text);
// Expands the grid into concrete configurations (ids suffixed by overrides).
// An empty grid, or any empty value list, yields no configurations.
std::vector<ExperimentConfig> expand_sweep(const SweepConfig& sweep);

// Settings for the loss-independence recipe: several runs with different
// fixed k until the training loss reaches `target_loss`, then all continue
// with `switch_k` for `post_rounds` rounds.
struct AssumptionCheckConfig {
  ExperimentConfig base;
  std::vector<double> initial_k;
  double switch_k = 1.0;
  double target_loss = 1.0;
  std::size_t post_rounds = 50;
  double tolerance = 0.05;
};

AssumptionCheckConfig load_assumption_config(const std::filesystem::path& path);

// Reads the "k" column of a rounds.jsonl file.
std::vector<double> read_k_sequence(const std::filesystem::path& rounds_jsonl);

}  // namespace fabk

#endif  // FABK_CONFIG_H_
