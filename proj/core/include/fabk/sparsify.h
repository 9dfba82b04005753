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

#ifndef FABK_SPARSIFY_H_
#define FABK_SPARSIFY_H_

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "fabk/model.h"
#include "fabk/rng.h"
#include "fabk/vector.h"

namespace fabk {

// Per-client training state. Every client keeps its own weight copy; for the
// synchronized strategies these copies must stay bit-identical.
struct ClientState {
  DenseVector weights;
  DenseVector accumulator;  // residual gradient mass not yet applied
  std::span<const Sample> shard;
  double sample_count = 0.0;
};

// Outcome of one server-side selection. `selected` and every entry of
// `contributed` are sorted ascending.
struct SelectionResult {
  std::vector<std::size_t> selected;                  // J
  std::vector<std::vector<std::size_t>> contributed;  // J ∩ J_i, per client
  std::size_t kappa = 0;
  std::size_t distinct_reported = 0;
  SparseGradient aggregate;  // b_j for j in J

  std::size_t min_contribution() const;
};

// Top-k entries of the client's accumulator.
SparseGradient client_report(const ClientState& client, std::size_t k);

// Keeps the `k` largest-magnitude entries of a report.
SparseGradient truncate_report(const SparseGradient& report, std::size_t k);

// Fairness-aware selection of at most k indices from the clients' reports.
//
// kappa is the largest depth in [0, k] such that the union of every client's
// top-kappa reported indices has at most k elements. Remaining slots are
// filled from the indices first appearing at depth kappa + 1, ranked by the
// largest magnitude any reporter gave them. kappa = 0 only happens when there
// are more clients than k. Aggregated values are
//   b_j = (1/C) * sum_i C_i * a_ij * [j in J_i].
SelectionResult fab_select(std::span<const SparseGradient> reports, std::size_t k,
                           std::span<const double> sample_counts);

// Applies w <- w - eta * b on every client and zeroes a_ij for j in J ∩ J_i.
// Throws IntegrityError if the client weight copies disagree beforehand.
DenseVector apply_and_reset(std::span<ClientState> clients, const SelectionResult& result,
                            double eta);

enum class StrategyKind {
  kFabTopK,
  kUnidirectionalTopK,
  kFubTopK,
  kPeriodicK,
  kFedAvg,
  kSendAll,
};

std::string_view to_string(StrategyKind kind);
StrategyKind parse_strategy_kind(std::string_view name);

struct StrategyConfig {
  StrategyKind kind = StrategyKind::kFabTopK;
  double k = 1.0;  // may be fractional; rounded stochastically per round
};

// Result of one gradient exchange. Slots count values and indices sent:
// 2 per index-value pair, 1 per dense value. Client uplinks run in parallel,
// so the uplink counts one client's payload.
struct ExchangeOutcome {
  SelectionResult selection;
  std::vector<SparseGradient> reports;  // empty for dense strategies
  std::size_t uplink_slots = 0;
  std::size_t downlink_slots = 0;
  bool aggregated = true;  // false on FedAvg rounds without averaging

  std::size_t comm_slots() const { return uplink_slots + downlink_slots; }
};

// FedAvg averaging period floor(D / (2k)), at least 1.
std::size_t fedavg_period(std::size_t dim, std::size_t k);

// One round of gradient exchange for any strategy. Accumulators must
// already hold this round's local gradient. `round` is 1-based.
ExchangeOutcome exchange_round(StrategyKind kind, std::span<ClientState> clients,
                               std::size_t k, double eta, std::size_t round, Rng& rng);

}  // namespace fabk

#endif  // FABK_SPARSIFY_H_
