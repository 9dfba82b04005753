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

#include "fabk/regret.h"

#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "fabk/error.h"

namespace fabk {
namespace {

SyntheticCostFamily family_with(std::size_t rounds, double slope = 1.0, std::uint64_t seed = 1) {
  CostShape shape;
  shape.profile_slope = slope;
  Rng rng(seed);
  std::vector<double> d(rounds);
  for (auto& x : d) x = rng.uniform(0.5, 1.5);
  return SyntheticCostFamily(shape, d);
}

// Numerical integral of t(k, l) over [L_m, L_{m-1}] by Simpson's rule.
double tau_by_quadrature(const SyntheticCostFamily& f, std::size_t m, double k) {
  const double lo = f.loss_after(m), hi = f.loss_after(m - 1);
  const int n = 200;
  const double h = (hi - lo) / n;
  double s = f.t(k, lo) + f.t(k, hi);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4 : 2) * f.t(k, lo + i * h);
  return s * h / 3;
}

TEST(CostFamily, LossScheduleAndMinimizer) {
  const auto f = family_with(10);
  EXPECT_EQ(f.loss_after(10), 0.0);
  EXPECT_GT(f.initial_loss(), 5.0);
  // a k + c / k with a = 1, c = 1e4 has its continuous minimizer at 100.
  EXPECT_EQ(f.k_star(), 100u);
}

TEST(CostFamily, IntegerKMatchesBaseCostIntegral) {
  const auto f = family_with(20);
  for (std::size_t m : {1u, 7u, 20u})
    for (double k : {1.0, 37.0, 100.0, 999.0})
      EXPECT_NEAR(f.tau(m, k), tau_by_quadrature(f, m, k), 1e-9 * f.tau(m, k));
  EXPECT_DOUBLE_EQ(f.unit_cost(37.0), 37.0 + 1e4 / 37.0);
}

TEST(CostFamily, FractionalKInterpolates) {
  const auto f = family_with(5);
  const double k = 41.3;
  const double expected = (42.0 - k) * f.integer_cost(41) + (k - 41.0) * f.integer_cost(42);
  EXPECT_NEAR(f.unit_cost(k), expected, 1e-12);
}

TEST(CostFamily, KStarMinimalOnDenseGrid) {
  const auto f = family_with(3);
  const double best = f.tau(2, static_cast<double>(f.k_star()));
  for (int i = 0; i <= 10000; ++i) {
    const double k = 1.0 + 999.0 * i / 10000.0;
    EXPECT_GE(f.tau(2, k), best - 1e-12) << k;
  }
}

TEST(CostFamily, MidpointConvexity) {
  const auto f = family_with(3);
  Rng rng(2);
  for (int t = 0; t < 1000; ++t) {
    const double a = rng.uniform(1, 1000), b = rng.uniform(1, 1000);
    EXPECT_LE(f.tau(1, 0.5 * (a + b)), 0.5 * (f.tau(1, a) + f.tau(1, b)) + 1e-9);
  }
}

TEST(CostFamily, ExactSign) {
  const auto f = family_with(3);
  EXPECT_EQ(f.exact_sign(500), SignFeedback::kPlus);
  EXPECT_EQ(f.exact_sign(3.5), SignFeedback::kMinus);
  EXPECT_EQ(f.exact_sign(100), SignFeedback::kZero);
  EXPECT_EQ(f.exact_sign(1), SignFeedback::kMinus);
  EXPECT_EQ(f.exact_sign(1000), SignFeedback::kPlus);
}

TEST(CostFamily, ExactSignMatchesFiniteDifference) {
  const auto f = family_with(3);
  Rng rng(4);
  for (int t = 0; t < 2000; ++t) {
    const double k = rng.uniform(1.01, 999.99);
    if (std::abs(k - std::round(k)) < 1e-4) continue;
    const double h = 1e-6;
    EXPECT_EQ(f.exact_sign(k), sign_of(f.tau(1, k + h) - f.tau(1, k - h))) << k;
  }
}

TEST(CostFamily, SlopeBoundCoversDerivative) {
  const auto f = family_with(50);
  const double g = f.slope_bound(1, 1000);
  for (std::size_t m = 1; m <= 50; ++m)
    for (double k = 1.5; k < 1000; k += 7.0) {
      const double deriv = f.tau(m, std::floor(k) + 1) - f.tau(m, std::floor(k));
      EXPECT_LE(std::abs(deriv), g * f.max_decrement() + 1e-9);
    }
}

TEST(NoisySign, ZeroProbabilityIsExact) {
  Rng rng(1);
  for (auto s : {SignFeedback::kPlus, SignFeedback::kMinus, SignFeedback::kZero})
    for (int i = 0; i < 100; ++i) EXPECT_EQ(noisy_sign(s, 0.0, rng), s);
}

TEST(NoisySign, FlipRateAndExpectation) {
  Rng rng(2);
  const int n = 100000;
  const double p = 0.25;
  double sum = 0, zero_sum = 0;
  for (int i = 0; i < n; ++i) {
    sum += sign_value(noisy_sign(SignFeedback::kPlus, p, rng));
    zero_sum += sign_value(noisy_sign(SignFeedback::kZero, p, rng));
  }
  // H E[s_hat] = s with H = 1 / (1 - 2p).
  EXPECT_NEAR(sum / n / (1 - 2 * p), 1.0, 0.01);
  EXPECT_NEAR(zero_sum / n, 0.0, 0.01);
}

TEST(RegretTrial, PinnedAtKStarHasZeroRegret) {
  const auto f = family_with(200);
  Rng rng(1);
  const auto trace = run_regret_trial(f, RegretAlgorithm::kSignDescent, SearchInterval(1, 1000),
                                      static_cast<double>(f.k_star()), 0.0, rng);
  EXPECT_EQ(trace.regret(), 0.0);
}

TEST(RegretTrial, CumulativeIsSumOfDifferences) {
  const auto f = family_with(300);
  Rng rng(3);
  const auto trace = run_regret_trial(f, RegretAlgorithm::kVaryingInterval,
                                      SearchInterval(1, 1000), 900, 0.1, rng);
  double r = 0;
  for (std::size_t m = 0; m < 300; ++m) {
    r += trace.tau_chosen[m] - trace.tau_best[m];
    EXPECT_NEAR(trace.cumulative[m], r, 1e-9);
  }
}

TEST(RegretExperiment, ExactSignRegretWithinBound) {
  RegretExperimentConfig cfg;
  cfg.rounds = 500;
  cfg.trials = 50;
  const auto s = run_regret_experiment(cfg);
  EXPECT_EQ(s.violations, 0u);
  EXPECT_LE(s.max_regret, s.bound);
  EXPECT_DOUBLE_EQ(s.B, 999.0);
  EXPECT_DOUBLE_EQ(s.bound, s.G * s.B * std::sqrt(1000.0));
}

TEST(RegretExperiment, RejectsUninformativeNoise) {
  RegretExperimentConfig cfg;
  cfg.flip_probability = 0.5;
  EXPECT_THROW(run_regret_experiment(cfg), InputError);
}

TEST(RegretExperiment, Deterministic) {
  RegretExperimentConfig cfg;
  cfg.rounds = 200;
  cfg.trials = 5;
  cfg.flip_probability = 0.2;
  EXPECT_EQ(run_regret_experiment(cfg).per_trial, run_regret_experiment(cfg).per_trial);
}

TEST(RegretExperiment, CsvRows) {
  RegretExperimentConfig cfg;
  cfg.rounds = 50;
  cfg.trials = 3;
  std::ostringstream out;
  write_regret_csv(out, {run_regret_experiment(cfg)});
  const std::string text = out.str();
  EXPECT_EQ(text.rfind("M,trial,R,bound,violated\n", 0), 0u);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 4);
}

}  // namespace
}  // namespace fabk
