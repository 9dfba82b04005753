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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "fabk/config.h"
#include "fabk/error.h"
#include "fabk/experiment.h"
#include "fabk/simulator.h"

namespace fabk {
namespace {

ExperimentConfig tiny(StrategyKind kind, double k) {
  ExperimentConfig cfg;
  cfg.id = "tiny";
  cfg.seed = 3;
  cfg.dataset.synth = SynthSpec{4, 6, 20, 4.0, 1.0};
  cfg.dataset.test_samples_per_class = 10;
  cfg.clients = 4;
  cfg.minibatch = 8;
  cfg.eta = 0.05;
  cfg.strategy = {kind, k};
  cfg.strategy_k_set = true;
  cfg.max_rounds = 60;
  return cfg;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("fabk_harness_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

TEST(Simulator, SendAllLossMostlyDecreases) {
  auto cfg = tiny(StrategyKind::kSendAll, 1);
  cfg.strategy_k_set = false;
  Simulator sim(cfg);
  double prev = sim.initial_loss();
  int decreases = 0;
  for (int m = 0; m < 50; ++m) {
    const double loss = sim.step().train_loss;
    decreases += loss < prev;
    prev = loss;
  }
  EXPECT_GE(decreases, 40);
}

TEST(Simulator, FabFullKMatchesSendAll) {
  auto fab = tiny(StrategyKind::kFabTopK, 0);
  Simulator a(fab);
  fab.strategy.k = static_cast<double>(a.dimension());
  Simulator fab_sim(fab);
  auto dense = tiny(StrategyKind::kSendAll, 1);
  Simulator dense_sim(dense);
  for (int m = 0; m < 100; ++m) {
    fab_sim.step();
    dense_sim.step();
    const auto wf = fab_sim.global_weights(), wd = dense_sim.global_weights();
    for (std::size_t j = 0; j < wf.size(); ++j) ASSERT_NEAR(wf[j], wd[j], 1e-12) << "round " << m;
  }
}

TEST(Simulator, RoundTimesAndWeightSync) {
  for (auto kind : {StrategyKind::kFabTopK, StrategyKind::kUnidirectionalTopK,
                    StrategyKind::kFubTopK, StrategyKind::kPeriodicK, StrategyKind::kSendAll}) {
    auto cfg = tiny(kind, 5.5);
    Simulator sim(cfg);
    double total = 0;
    for (int m = 0; m < 20; ++m) {
      const auto r = sim.step();
      EXPECT_DOUBLE_EQ(r.round_time, round_time(cfg.timing, r.comm_slots, sim.dimension()).total);
      total += r.round_time;
      EXPECT_NEAR(r.sim_time, total, 1e-9);
      for (const auto& c : sim.clients()) EXPECT_EQ(c.weights, sim.clients().front().weights);
      if (kind != StrategyKind::kSendAll) {
        EXPECT_TRUE(r.k_used == 5 || r.k_used == 6);
      }
    }
  }
}

TEST(Simulator, AdaptiveControllerProbes) {
  auto cfg = tiny(StrategyKind::kFabTopK, 1);
  cfg.strategy_k_set = false;
  cfg.controller.kind = ControllerKind::kVaryingInterval;
  Simulator sim(cfg);
  int signs = 0;
  for (int m = 0; m < 40; ++m) {
    const auto r = sim.step();
    ASSERT_TRUE(r.probe_prev && r.probe_cur && r.probe_alt && r.k_prime);
    EXPECT_LT(*r.k_prime, r.k);
    signs += r.sign.has_value();
    EXPECT_GE(r.k, 1.0);
    EXPECT_LE(r.k, static_cast<double>(sim.dimension()));
  }
  EXPECT_GT(signs, 0);
}

TEST(Simulator, ResolveControllerDefaults) {
  auto cfg = tiny(StrategyKind::kFabTopK, 1);
  cfg.controller.kind = ControllerKind::kSignDescent;
  const auto s = resolve_controller(cfg, 2000);
  EXPECT_DOUBLE_EQ(s.k_min, 4.0);
  EXPECT_DOUBLE_EQ(s.k_max, 2000.0);
  EXPECT_DOUBLE_EQ(s.k_initial, 1002.0);
  cfg.controller.kind = ControllerKind::kFixed;
  cfg.strategy.k = 3000;
  EXPECT_THROW(resolve_controller(cfg, 2000), InputError);
}

TEST(Experiment, DeterministicOutputs) {
  auto cfg = tiny(StrategyKind::kFabTopK, 3);
  cfg.controller.kind = ControllerKind::kSignDescent;
  cfg.strategy_k_set = false;
  const auto a = scratch("det_a"), b = scratch("det_b");
  run_experiment(cfg, a);
  run_experiment(cfg, b);
  const auto ja = slurp(a / "rounds.jsonl");
  EXPECT_FALSE(ja.empty());
  EXPECT_EQ(ja, slurp(b / "rounds.jsonl"));
  EXPECT_EQ(slurp(a / "summary.csv"), slurp(b / "summary.csv"));
  cfg.seed = 4;
  const auto c = scratch("det_c");
  run_experiment(cfg, c);
  EXPECT_NE(ja, slurp(c / "rounds.jsonl"));
}

TEST(Experiment, ThreadedRunMatchesSerial) {
  auto cfg = tiny(StrategyKind::kFabTopK, 3);
  const auto serial = simulate(cfg);
  cfg.threads = 4;
  const auto threaded = simulate(cfg);
  ASSERT_EQ(serial.rounds.size(), threaded.rounds.size());
  for (std::size_t m = 0; m < serial.rounds.size(); ++m)
    EXPECT_EQ(serial.rounds[m].train_loss, threaded.rounds[m].train_loss);
}

TEST(Experiment, SummaryFormat) {
  auto cfg = tiny(StrategyKind::kFabTopK, 3);
  const auto dir = scratch("summary");
  const auto r = run_experiment(cfg, dir);
  const auto text = slurp(dir / "summary.csv");
  EXPECT_EQ(text.rfind(std::string(kSummaryHeader) + "\n", 0), 0u);
  EXPECT_EQ(text.find('\r'), std::string::npos);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
  double total = 0;
  for (const auto& rec : r.rounds) total += rec.round_time;
  EXPECT_NEAR(total, r.sim_time, 1e-9);
  const auto jsonl = slurp(dir / "rounds.jsonl");
  EXPECT_EQ(static_cast<std::size_t>(std::count(jsonl.begin(), jsonl.end(), '\n')), r.rounds.size());
}

TEST(Experiment, StopsAtTarget) {
  auto cfg = tiny(StrategyKind::kSendAll, 1);
  cfg.target_loss = 1.0;
  cfg.max_rounds = 2000;
  const auto r = simulate(cfg);
  EXPECT_EQ(r.status, RunStatus::kTargetReached);
  ASSERT_TRUE(r.time_to_target);
  EXPECT_LE(r.rounds.back().train_loss, 1.0);
  EXPECT_GT(r.rounds[r.rounds.size() - 2].train_loss, 1.0);
  EXPECT_DOUBLE_EQ(*r.time_to_target, r.sim_time);
}

TEST(Experiment, DetectsDivergence) {
  auto cfg = tiny(StrategyKind::kSendAll, 1);
  cfg.dataset.synth.separation = 0.5;
  cfg.dataset.synth.noise = 3.0;
  cfg.eta = 1e6;
  cfg.max_rounds = 200;
  cfg.divergence_window = 3;
  const auto r = simulate(cfg);
  EXPECT_EQ(r.status, RunStatus::kDiverged);
  EXPECT_LT(r.rounds.size(), 200u);
}

TEST(Experiment, SweepRowsAndFailures) {
  std::vector<ExperimentConfig> cfgs;
  for (auto kind : {StrategyKind::kFabTopK, StrategyKind::kFubTopK})
    for (double comm : {1.0, 10.0}) {
      auto c = tiny(kind, 3);
      c.max_rounds = 10;
      c.timing.comm_time_full = comm;
      c.id = std::string(to_string(kind)) + "_" + format_number(comm);
      cfgs.push_back(c);
    }
  auto broken = tiny(StrategyKind::kFabTopK, 3);
  broken.id = "broken";
  broken.clients = 1000;  // more clients than samples
  cfgs.push_back(broken);
  const auto dir = scratch("sweep");
  const auto results = sweep(cfgs, dir, 2);
  ASSERT_EQ(results.size(), 5u);
  EXPECT_EQ(results[4].status, RunStatus::kFailed);
  EXPECT_FALSE(results[4].error.empty());
  const auto text = slurp(dir / "sweep.csv");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 6);
  EXPECT_NE(text.find("broken,10,fab_topk,fixed,0,,nan,nan,failed"), std::string::npos);
  EXPECT_TRUE(std::filesystem::exists(dir / "fub_topk_10" / "rounds.jsonl"));
}

TEST(Experiment, EmptySweepWritesHeaderOnly) {
  const auto dir = scratch("empty_sweep");
  sweep({}, dir, 1);
  EXPECT_EQ(slurp(dir / "sweep.csv"), std::string(kSweepHeader) + "\n");
}

TEST(Experiment, ReplayReproducesKSequence) {
  auto cfg = tiny(StrategyKind::kFabTopK, 1);
  cfg.strategy_k_set = false;
  cfg.controller.kind = ControllerKind::kSignDescent;
  const auto learned = simulate(cfg);
  auto replay = cfg;
  replay.controller = ControllerConfig{};
  replay.controller.kind = ControllerKind::kReplay;
  replay.controller.replay = learned.k_sequence();
  const auto r = simulate(replay);
  EXPECT_EQ(r.k_sequence(), learned.k_sequence());
  // Same k draws and no probe side effects: identical training trajectory.
  for (std::size_t m = 0; m < r.rounds.size(); ++m)
    EXPECT_EQ(r.rounds[m].train_loss, learned.rounds[m].train_loss);
}

TEST(Experiment, AssumptionReport) {
  AssumptionCheckConfig cfg;
  cfg.base = tiny(StrategyKind::kFabTopK, 2);
  cfg.base.max_rounds = 3000;
  cfg.initial_k = {2, 20};
  cfg.switch_k = 8;
  cfg.target_loss = 0.8;
  cfg.post_rounds = 10;
  cfg.tolerance = 1.0;
  const auto report = assumption_check(cfg);
  ASSERT_EQ(report.post_losses.size(), 2u);
  EXPECT_EQ(report.max_spread.size(), 10u);
  EXPECT_TRUE(report.within_band);
  std::ostringstream out;
  write_assumption_csv(out, report);
  EXPECT_EQ(out.str().rfind("offset,spread,loss_k2,loss_k20\n", 0), 0u);
}

TEST(Experiment, FormatNumber) {
  EXPECT_EQ(format_number(10.0), "10");
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(std::nan("")), "nan");
  EXPECT_EQ(std::stod(format_number(1.0 / 3.0)), 1.0 / 3.0);
}

}  // namespace
}  // namespace fabk
