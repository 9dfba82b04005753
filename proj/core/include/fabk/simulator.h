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

#ifndef FABK_SIMULATOR_H_
#define FABK_SIMULATOR_H_

#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include "fabk/config.h"
#include "fabk/controller.h"
#include "fabk/data.h"
#include "fabk/model.h"
#include "fabk/sparsify.h"
#include "fabk/timing.h"

namespace fabk {

// One line of rounds.jsonl.
struct RoundRecord {
  std::size_t m = 0;
  double k = 0.0;              // controller's real-valued k_m
  std::size_t k_used = 0;      // after stochastic rounding
  std::size_t selected = 0;    // |J| (0 on FedAvg rounds without averaging)
  std::size_t min_contribution = 0;
  std::size_t comm_slots = 0;
  double round_time = 0.0;
  double sim_time = 0.0;       // cumulative
  double train_loss = 0.0;     // global loss over all training samples
  std::optional<double> probe_prev;
  std::optional<double> probe_cur;
  std::optional<double> probe_alt;
  std::optional<double> k_prime;
  std::optional<double> eval_acc;
  std::optional<int> sign;     // null when unavailable or not probed
  bool restart = false;
};

struct LoadedData {
  FederatedDataset train;
  std::vector<Sample> test;
  ModelSpec model;
};

// Builds the federated training split and the held-out split described by
// the dataset config.
LoadedData load_data(const ExperimentConfig& cfg);

// Resolved controller settings for a model of dimension `dim`.
ControllerSettings resolve_controller(const ExperimentConfig& cfg, std::size_t dim);

// Synchronous federated training, one call to step() per round:
// local gradients into accumulators, exchange, update, optional probe, then
// the controller picks the next k.
class Simulator {
 public:
  Simulator(const ExperimentConfig& cfg, LoadedData data);
  explicit Simulator(const ExperimentConfig& cfg);

  RoundRecord step();
  // Swaps the k controller mid-run (used by the loss-independence recipe).
  void replace_controller(std::unique_ptr<KController> controller);

  std::size_t round() const { return round_; }
  std::size_t dimension() const { return model_.dimension(); }
  const Model& model() const { return model_; }
  const FederatedDataset& train() const { return data_.train; }
  std::span<const ClientState> clients() const { return clients_; }
  const KController& controller() const { return *controller_; }
  double sim_time() const { return sim_time_; }
  double initial_loss() const { return initial_loss_; }

  // Global model: the shared weights, or the C_i-weighted client average for
  // FedAvg between averaging rounds.
  DenseVector global_weights() const;
  double global_loss() const;
  LossReport evaluate_test() const;

 private:
  ExperimentConfig cfg_;
  LoadedData data_;
  Model model_;
  std::vector<double> counts_;
  std::vector<Sample> all_train_;
  std::vector<ClientState> clients_;
  std::unique_ptr<KController> controller_;
  std::size_t round_ = 0;
  double sim_time_ = 0.0;
  double initial_loss_ = 0.0;
};

}  // namespace fabk

#endif  // FABK_SIMULATOR_H_
