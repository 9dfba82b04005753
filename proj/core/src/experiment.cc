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

#include "fabk/experiment.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>

#include "fabk/error.h"
#include "fabk/parallel.h"
#include "json.hpp"

namespace fabk {

namespace {

using Json = nlohmann::ordered_json;

template <typename T>
Json optional_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot open '" + path.string() + "' for writing");
  return out;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + "\"";
}

}  // namespace

std::string_view to_string(RunStatus status) {
  switch (status) {
    case RunStatus::kTargetReached: return "target_reached";
    case RunStatus::kMaxRounds: return "max_rounds";
    case RunStatus::kDiverged: return "diverged";
    case RunStatus::kFailed: return "failed";
  }
  return "unknown";
}

std::vector<double> RunResult::k_sequence() const {
  std::vector<double> ks;
  ks.reserve(rounds.size());
  for (const auto& r : rounds) ks.push_back(r.k);
  return ks;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

RunResult simulate(const ExperimentConfig& cfg) {
  Simulator sim(cfg);
  RunResult result;
  result.config_id = cfg.id;
  const double initial = sim.initial_loss();
  double last_loss = initial;
  std::size_t above = 0;
  for (std::size_t m = 1; m <= cfg.max_rounds; ++m) {
    result.rounds.push_back(sim.step());
    const RoundRecord& rec = result.rounds.back();
    last_loss = rec.train_loss;
    if (!std::isfinite(rec.train_loss)) {
      result.status = RunStatus::kDiverged;
      break;
    }
    above = rec.train_loss > cfg.divergence_factor * initial ? above + 1 : 0;
    if (above >= cfg.divergence_window) {
      result.status = RunStatus::kDiverged;
      break;
    }
    if (cfg.target_loss && rec.train_loss <= *cfg.target_loss) {
      result.status = RunStatus::kTargetReached;
      result.time_to_target = rec.sim_time;
      break;
    }
  }
  result.sim_time = sim.sim_time();
  result.final_loss = last_loss;
  result.final_acc = sim.evaluate_test().accuracy();
  return result;
}

void write_round_jsonl(std::ostream& out, const RoundRecord& r) {
  Json j;
  j["m"] = r.m;
  j["k"] = r.k;
  j["k_used"] = r.k_used;
  j["selected"] = r.selected;
  j["min_contribution"] = r.min_contribution;
  j["comm_slots"] = r.comm_slots;
  j["round_time"] = r.round_time;
  j["sim_time"] = r.sim_time;
  j["train_loss"] = std::isfinite(r.train_loss) ? Json(r.train_loss) : Json(nullptr);
  j["probe_prev"] = optional_json(r.probe_prev);
  j["probe_cur"] = optional_json(r.probe_cur);
  j["probe_alt"] = optional_json(r.probe_alt);
  j["k_prime"] = optional_json(r.k_prime);
  j["eval_acc"] = optional_json(r.eval_acc);
  j["sign"] = optional_json(r.sign);
  j["restart"] = r.restart;
  out << j.dump() << '\n';
}

void write_summary_row(std::ostream& out, const ExperimentConfig& cfg, const RunResult& r) {
  out << csv_field(cfg.id) << ',' << format_number(cfg.timing.comm_time_full) << ','
      << to_string(cfg.strategy.kind) << ',' << to_string(cfg.controller.kind) << ','
      << r.rounds.size() << ',' << format_number(r.sim_time) << ','
      << format_number(r.final_loss) << ',' << format_number(r.final_acc) << '\n';
}

RunResult run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
  RunResult result = simulate(cfg);
  std::filesystem::create_directories(out_dir);
  {
    auto out = open_output(out_dir / "rounds.jsonl");
    for (const auto& rec : result.rounds) write_round_jsonl(out, rec);
  }
  {
    auto out = open_output(out_dir / "summary.csv");
    out << kSummaryHeader << '\n';
    write_summary_row(out, cfg, result);
  }
  return result;
}

std::vector<RunResult> sweep(const std::vector<ExperimentConfig>& configs,
                             const std::filesystem::path& out_dir, std::size_t parallel) {
  std::vector<RunResult> results(configs.size());
  parallel_for(configs.size(), parallel, [&](std::size_t i) {
    try {
      results[i] = run_experiment(configs[i], out_dir / configs[i].id);
    } catch (const std::exception& e) {
      results[i].config_id = configs[i].id;
      results[i].status = RunStatus::kFailed;
      results[i].error = e.what();
      results[i].final_loss = std::numeric_limits<double>::quiet_NaN();
      results[i].final_acc = std::numeric_limits<double>::quiet_NaN();
    }
  });
  std::filesystem::create_directories(out_dir);
  {
    auto out = open_output(out_dir / "sweep.csv");
    write_sweep_csv(out, configs, results);
  }
  auto out = open_output(out_dir / "summary.csv");
  out << kSummaryHeader << '\n';
  for (std::size_t i = 0; i < configs.size(); ++i)
    if (results[i].status != RunStatus::kFailed) write_summary_row(out, configs[i], results[i]);
  return results;
}

void write_sweep_csv(std::ostream& out, const std::vector<ExperimentConfig>& configs,
                     const std::vector<RunResult>& results) {
  FABK_REQUIRE(configs.size() == results.size(), "one result per config");
  out << kSweepHeader << '\n';
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const auto& c = configs[i];
    const auto& r = results[i];
    out << csv_field(c.id) << ',' << format_number(c.timing.comm_time_full) << ','
        << to_string(c.strategy.kind) << ',' << to_string(c.controller.kind) << ','
        << r.rounds.size() << ','
        << (r.time_to_target ? format_number(*r.time_to_target) : std::string()) << ','
        << format_number(r.final_loss) << ',' << format_number(r.final_acc) << ','
        << to_string(r.status) << '\n';
  }
}

AssumptionReport assumption_check(const AssumptionCheckConfig& cfg) {
  FABK_REQUIRE(!cfg.initial_k.empty(), "at least one initial k");
  AssumptionReport report;
  report.initial_k = cfg.initial_k;
  report.tolerance = cfg.tolerance;
  for (double k0 : cfg.initial_k) {
    ExperimentConfig run = cfg.base;
    run.controller = ControllerConfig{};
    run.controller.kind = ControllerKind::kFixed;
    run.strategy.k = k0;
    run.strategy_k_set = true;
    Simulator sim(run);
    std::size_t switched = 0;
    for (std::size_t m = 1; m <= run.max_rounds; ++m) {
      if (sim.step().train_loss <= cfg.target_loss) {
        switched = m;
        break;
      }
    }
    if (switched == 0)
      throw InputError("run from k = " + format_number(k0) + " never reached the target loss");
    ControllerSettings fixed;
    fixed.kind = ControllerKind::kFixed;
    fixed.k_initial = cfg.switch_k;
    sim.replace_controller(make_controller(fixed, Rng::derive(run.seed, {tag(Stream::kController)})));
    std::vector<double> losses;
    for (std::size_t t = 0; t < cfg.post_rounds; ++t) losses.push_back(sim.step().train_loss);
    report.switch_round.push_back(switched);
    report.post_losses.push_back(std::move(losses));
  }
  report.max_spread.assign(cfg.post_rounds, 0.0);
  for (std::size_t t = 0; t < cfg.post_rounds; ++t) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& run : report.post_losses) {
      lo = std::min(lo, run[t]);
      hi = std::max(hi, run[t]);
    }
    report.max_spread[t] = hi - lo;
  }
  report.within_band = std::all_of(report.max_spread.begin(), report.max_spread.end(),
                                   [&](double s) { return s <= cfg.tolerance; });
  return report;
}

void write_assumption_csv(std::ostream& out, const AssumptionReport& report) {
  out << "offset,spread";
  for (double k : report.initial_k) out << ",loss_k" << format_number(k);
  out << '\n';
  for (std::size_t t = 0; t < report.max_spread.size(); ++t) {
    out << t + 1 << ',' << format_number(report.max_spread[t]);
    for (const auto& run : report.post_losses) out << ',' << format_number(run[t]);
    out << '\n';
  }
}

}  // namespace fabk
