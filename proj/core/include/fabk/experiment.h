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

#ifndef FABK_EXPERIMENT_H_
#define FABK_EXPERIMENT_H_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "fabk/config.h"
#include "fabk/simulator.h"

namespace fabk {

enum class RunStatus { kTargetReached, kMaxRounds, kDiverged, kFailed };
std::string_view to_string(RunStatus status);

struct RunResult {
  std::string config_id;
  RunStatus status = RunStatus::kMaxRounds;
  std::vector<RoundRecord> rounds;
  double sim_time = 0.0;
  std::optional<double> time_to_target;
  double final_loss = 0.0;
  double final_acc = 0.0;
  std::string error;  // set when status == kFailed

  std::vector<double> k_sequence() const;
};

// Runs the experiment in memory until the target loss, max rounds, or
// divergence (non-finite loss, or loss above factor x initial for `window`
// consecutive rounds).
RunResult simulate(const ExperimentConfig& cfg);

// simulate() plus rounds.jsonl and summary.csv under out_dir.
RunResult run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

void write_round_jsonl(std::ostream& out, const RoundRecord& r);
inline constexpr std::string_view kSummaryHeader =
    "config_id,comm_time,strategy,controller,rounds,sim_time,final_loss,final_acc";
void write_summary_row(std::ostream& out, const ExperimentConfig& cfg, const RunResult& r);

inline constexpr std::string_view kSweepHeader =
    "config_id,comm_time,strategy,controller,rounds,time_to_target,final_loss,final_acc,status";

// Runs every configuration (failures are recorded, not propagated) and writes
// sweep.csv plus one subdirectory per configuration when out_dir is nonempty.
std::vector<RunResult> sweep(const std::vector<ExperimentConfig>& configs,
                             const std::filesystem::path& out_dir, std::size_t parallel = 1);
void write_sweep_csv(std::ostream& out, const std::vector<ExperimentConfig>& configs,
                     const std::vector<RunResult>& results);

struct AssumptionReport {
  std::vector<double> initial_k;
  std::vector<std::size_t> switch_round;         // per run
  std::vector<std::vector<double>> post_losses;  // per run, per offset
  std::vector<double> max_spread;                // per offset
  double tolerance = 0.0;
  bool within_band = false;
};

AssumptionReport assumption_check(const AssumptionCheckConfig& cfg);
// CSV: offset,spread,loss_k<k>...
void write_assumption_csv(std::ostream& out, const AssumptionReport& report);

// Shortest round-trip decimal rendering used in every CSV.
std::string format_number(double v);

}  // namespace fabk

#endif  // FABK_EXPERIMENT_H_
