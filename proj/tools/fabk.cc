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

// Command-line entry point: run, sweep, regret, assumption.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "fabk/config.h"
#include "fabk/error.h"
#include "fabk/experiment.h"
#include "fabk/regret.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitDiverged = 2;

std::ofstream open_or_throw(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw fabk::InputError("cannot open '" + path.string() + "' for writing");
  return out;
}

int cmd_run(const std::string& config, std::optional<std::uint64_t> seed,
            const std::filesystem::path& out) {
  auto cfg = fabk::load_config(config);
  if (seed) cfg.seed = *seed;
  const auto result = fabk::run_experiment(cfg, out);
  std::cout << cfg.id << ": " << fabk::to_string(result.status) << " after "
            << result.rounds.size() << " rounds, sim_time "
            << fabk::format_number(result.sim_time) << ", final_loss "
            << fabk::format_number(result.final_loss) << ", final_acc "
            << fabk::format_number(result.final_acc) << '\n';
  return result.status == fabk::RunStatus::kDiverged ? kExitDiverged : kExitOk;
}

int cmd_sweep(const std::string& config, std::optional<std::uint64_t> seed,
              const std::filesystem::path& out) {
  const auto spec = fabk::load_sweep_config(config);
  auto configs = fabk::expand_sweep(spec);
  if (seed)
    for (auto& c : configs) c.seed = *seed;
  const auto results = fabk::sweep(configs, out, spec.parallel);
  int code = kExitOk;
  for (const auto& r : results) {
    if (r.status == fabk::RunStatus::kFailed) {
      std::cerr << r.config_id << ": failed: " << r.error << '\n';
      code = kExitDiverged;
    } else if (r.status == fabk::RunStatus::kDiverged) {
      std::cerr << r.config_id << ": diverged\n";
      code = kExitDiverged;
    }
  }
  std::cout << results.size() << " runs written to " << (out / "sweep.csv").string() << '\n';
  return code;
}

int cmd_assumption(const std::string& config, std::optional<std::uint64_t> seed,
                   const std::filesystem::path& out) {
  auto cfg = fabk::load_assumption_config(config);
  if (seed) cfg.base.seed = *seed;
  const auto report = fabk::assumption_check(cfg);
  std::filesystem::create_directories(out);
  auto file = open_or_throw(out / "assumption.csv");
  fabk::write_assumption_csv(file, report);
  double worst = 0.0;
  for (double s : report.max_spread) worst = std::max(worst, s);
  std::cout << "max loss spread " << fabk::format_number(worst) << " (tolerance "
            << fabk::format_number(report.tolerance) << "): "
            << (report.within_band ? "within band" : "outside band") << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fairness-aware bidirectional top-k federated learning simulator"};
  app.require_subcommand(1);

  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "Config file (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "Override the master seed");
    sub->add_option("--out", out, "Output directory")->capture_default_str();
  };
  auto* run = app.add_subcommand("run", "Run one experiment");
  add_common(run);
  auto* sweep = app.add_subcommand("sweep", "Run a config grid");
  add_common(sweep);
  auto* assumption = app.add_subcommand("assumption", "Check loss-trajectory independence");
  add_common(assumption);

  auto* regret = app.add_subcommand("regret", "Regret experiment on the synthetic cost family");
  fabk::RegretExperimentConfig rc;
  std::vector<std::size_t> horizons{100, 1000, 10000};
  std::string algorithm = "sign_descent";
  regret->add_option("--rounds", horizons, "Horizons M")->capture_default_str();
  regret->add_option("--trials", rc.trials)->capture_default_str();
  regret->add_option("--flip", rc.flip_probability, "Sign flip probability p < 0.5")
      ->capture_default_str();
  regret->add_option("--algorithm", algorithm)
      ->check(CLI::IsMember({"sign_descent", "varying_interval"}))
      ->capture_default_str();
  regret->add_option("--dim", rc.shape.dim)->capture_default_str();
  regret->add_option("--seed", rc.seed)->capture_default_str();
  regret->add_option("--out", out, "Output directory")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config, seed, out);
    if (*sweep) return cmd_sweep(config, seed, out);
    if (*assumption) return cmd_assumption(config, seed, out);
    if (*regret) {
      rc.algorithm = algorithm == "varying_interval" ? fabk::RegretAlgorithm::kVaryingInterval
                                                      : fabk::RegretAlgorithm::kSignDescent;
      std::vector<fabk::RegretSummary> summaries;
      for (std::size_t m : horizons) {
        rc.rounds = m;
        summaries.push_back(fabk::run_regret_experiment(rc));
        const auto& s = summaries.back();
        std::cout << "M=" << m << " mean R=" << fabk::format_number(s.mean_regret)
                  << " bound=" << fabk::format_number(s.bound)
                  << " violations=" << s.violations << '\n';
      }
      std::filesystem::create_directories(out);
      auto file = open_or_throw(std::filesystem::path(out) / "regret.csv");
      fabk::write_regret_csv(file, summaries);
    }
  } catch (const fabk::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitOk;
}
