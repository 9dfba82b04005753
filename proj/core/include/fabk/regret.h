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

#ifndef FABK_REGRET_H_
#define FABK_REGRET_H_

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <vector>

#include "fabk/controller.h"
#include "fabk/rng.h"

namespace fabk {

// Per-unit-loss cost at integer k: comm_coeff * k + comp_coeff / k^exponent,
// scaled over the loss axis by the profile p(l) = 1 + profile_slope * l / L0.
struct CostShape {
  std::size_t dim = 1000;
  double comm_coeff = 1.0;
  double comp_coeff = 1.0e4;
  double exponent = 1.0;
  double profile_slope = 1.0;
};

// Known-convex training-time model t(k, l) over k in [1, D] and a fixed
// schedule of per-round loss decrements. Fractional k interpolates linearly
// between the neighbouring integers, which is the expected cost under
// stochastic rounding. The loss starts at L0 = sum of decrements and ends at 0.
class SyntheticCostFamily {
 public:
  SyntheticCostFamily(CostShape shape, std::vector<double> decrements);

  const CostShape& shape() const { return shape_; }
  std::size_t rounds() const { return decrements_.size(); }
  double initial_loss() const { return loss_.front(); }
  // L_m for m in [0, rounds()].
  double loss_after(std::size_t m) const { return loss_.at(m); }

  double integer_cost(std::size_t k) const { return base_.at(k); }
  // Interpolated cost per unit loss at profile value 1.
  double unit_cost(double k) const;
  double profile(double l) const;
  double t(double k, double l) const { return unit_cost(k) * profile(l); }

  // tau_m(k): integral of t(k, l) over [L_m, L_{m-1}]; m is 1-based.
  double tau(std::size_t m, double k) const;
  // Sign of d tau_m / dk at k; zero exactly at the minimizer.
  SignFeedback exact_sign(double k) const;

  std::size_t k_star() const { return k_star_; }
  // Bound on |dt/dk| over [k_lo, k_hi].
  double slope_bound(double k_lo, double k_hi) const;
  double max_decrement() const;

 private:
  double integral_weight(std::size_t m) const;

  CostShape shape_;
  std::vector<double> decrements_;
  std::vector<double> loss_;
  std::vector<double> base_;  // index k in [1, D]; base_[0] unused
  std::size_t k_star_ = 1;
};

// Flip-noise sign oracle: a nonzero sign is reversed with probability p; a
// zero sign becomes +-1 (each with probability p / 2). E[s_hat] = (1 - 2p) s.
SignFeedback noisy_sign(SignFeedback exact, double p, Rng& rng);

enum class RegretAlgorithm { kSignDescent, kVaryingInterval };

struct RegretTrace {
  std::vector<double> k;          // k_m
  std::vector<double> tau_chosen; // tau_m(k_m)
  std::vector<double> tau_best;   // tau_m(k*)
  std::vector<double> cumulative; // R(m)

  double regret() const { return cumulative.empty() ? 0.0 : cumulative.back(); }
};

// Runs one controller trajectory against the family for family.rounds() rounds.
RegretTrace run_regret_trial(const SyntheticCostFamily& family, RegretAlgorithm algorithm,
                             const SearchInterval& interval, double k_initial,
                             double flip_probability, Rng& rng,
                             VaryingIntervalParams params = {});

struct RegretExperimentConfig {
  CostShape shape;
  std::size_t rounds = 1000;
  std::size_t trials = 100;
  double flip_probability = 0.0;
  RegretAlgorithm algorithm = RegretAlgorithm::kSignDescent;
  VaryingIntervalParams varying;
  double decrement_min = 0.5;
  double decrement_max = 1.5;
  double k_min = 1.0;  // search interval; k_max <= 0 means D
  double k_max = 0.0;
  std::uint64_t seed = 1;
};

struct RegretSummary {
  std::size_t rounds = 0;
  double g = 0.0;  // slope bound over the search interval
  double G = 0.0;  // g * largest admissible decrement
  double H = 1.0;  // 1 / (1 - 2p)
  double B = 0.0;  // search interval width
  double bound = 0.0;  // G * H * B * sqrt(2M)
  double mean_regret = 0.0;
  double max_regret = 0.0;
  std::size_t violations = 0;  // trials with R(M) > bound
  std::vector<double> per_trial;
};

// Random per-trial decrement schedules (uniform in [decrement_min,
// decrement_max]) and initial k (uniform in the interval). Rejects p >= 0.5.
RegretSummary run_regret_experiment(const RegretExperimentConfig& cfg);

// CSV with header M,trial,R,bound,violated.
void write_regret_csv(std::ostream& out, const std::vector<RegretSummary>& summaries);

}  // namespace fabk

#endif  // FABK_REGRET_H_
