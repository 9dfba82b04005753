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

#include "fabk/controller.h"

#include <cmath>
#include <limits>
#include <map>

#include <gtest/gtest.h>

#include "fabk/error.h"

namespace fabk {
namespace {

constexpr SignFeedback kPlus = SignFeedback::kPlus;
constexpr SignFeedback kMinus = SignFeedback::kMinus;
constexpr SignFeedback kZero = SignFeedback::kZero;
constexpr SignFeedback kNone = SignFeedback::kUnavailable;

TEST(SearchInterval, Project) {
  const SearchInterval k(2, 10);
  EXPECT_EQ(k.project(12), 10);
  EXPECT_EQ(k.project(5), 5);
  EXPECT_EQ(k.project(-3), 2);
  EXPECT_EQ(k.width(), 8);
  EXPECT_THROW(SearchInterval(5, 5), ContractViolation);
  EXPECT_THROW(SearchInterval(6, 5), ContractViolation);
}

TEST(Sign, Helpers) {
  EXPECT_EQ(sign_value(kPlus), 1);
  EXPECT_EQ(sign_value(kMinus), -1);
  EXPECT_EQ(sign_value(kZero), 0);
  EXPECT_EQ(sign_of(-0.5), kMinus);
  EXPECT_EQ(sign_of(0.0), kZero);
  EXPECT_EQ(flip(kPlus), kMinus);
  EXPECT_EQ(flip(kZero), kZero);
}

TEST(SignDescent, ArithmeticExample) {
  SignDescent alg(SearchInterval(400, 500), 500);
  alg.step(kZero);  // m = 1 -> 2
  ASSERT_EQ(alg.m(), 2u);
  EXPECT_DOUBLE_EQ(alg.step_size(), 50.0);
  alg.step(kPlus);
  EXPECT_DOUBLE_EQ(alg.k(), 450.0);
}

TEST(SignDescent, ZeroAndUnavailableKeepK) {
  SignDescent alg(SearchInterval(1, 100), 40);
  alg.step(kZero);
  EXPECT_EQ(alg.k(), 40);
  alg.step(kNone);
  EXPECT_EQ(alg.k(), 40);
  EXPECT_EQ(alg.m(), 3u);
}

TEST(SignDescent, RepeatedPlusFollowsPartialSums) {
  const double b = 100;
  SignDescent alg(SearchInterval(10, 10 + b), 10 + b);
  double expected = 10 + b;
  for (int m = 1; m <= 50; ++m) {
    expected = std::max(10.0, expected - b / std::sqrt(2.0 * m));
    alg.step(kPlus);
    EXPECT_NEAR(alg.k(), expected, 1e-9) << "m=" << m;
  }
  EXPECT_EQ(alg.k(), 10.0);
}

TEST(SignDescent, StaysInIntervalAndStepNonincreasing) {
  Rng rng(1);
  SignDescent alg(SearchInterval(3, 70), 20);
  double prev = INFINITY;
  for (int m = 0; m < 500; ++m) {
    EXPECT_LE(alg.step_size(), prev);
    prev = alg.step_size();
    alg.step(rng.bernoulli(0.5) ? kPlus : kMinus);
    EXPECT_GE(alg.k(), 3);
    EXPECT_LE(alg.k(), 70);
  }
}

TEST(SignDescent, DistanceToMinimizerBounded) {
  const double k_star = 137.3;
  SignDescent alg(SearchInterval(1, 1000), 900);
  double prev_dist = std::abs(alg.k() - k_star);
  for (int m = 1; m <= 2000; ++m) {
    const double delta = alg.step_size();
    alg.step(sign_of(alg.k() - k_star));
    const double dist = std::abs(alg.k() - k_star);
    EXPECT_LE(dist, std::max(delta, prev_dist) + 1e-9);
    prev_dist = dist;
  }
}

TEST(VaryingInterval, RestartThreshold) {
  EXPECT_TRUE(VaryingIntervalDescent::should_restart(41, 100, 5, 5));
  EXPECT_FALSE(VaryingIntervalDescent::should_restart(42, 100, 5, 5));
  EXPECT_FALSE(VaryingIntervalDescent::should_restart(41, 100, 4, 5));
  const double edge = (std::sqrt(2.0) - 1.0) * 100;
  EXPECT_FALSE(VaryingIntervalDescent::should_restart(edge, 100, 9, 1));
  EXPECT_TRUE(VaryingIntervalDescent::should_restart(std::nextafter(edge, 0.0), 100, 9, 1));
  EXPECT_FALSE(VaryingIntervalDescent::should_restart(edge + 1e-9, 100, 9, 1));
  EXPECT_TRUE(VaryingIntervalDescent::should_restart(edge - 1e-9, 100, 9, 1));
}

TEST(VaryingInterval, CandidateBounds) {
  const SearchInterval global(2, 1000);
  const auto [lo, hi] = VaryingIntervalDescent::candidate_bounds(90, 110, 1.5, global);
  EXPECT_DOUBLE_EQ(lo, 60);
  EXPECT_DOUBLE_EQ(hi, 165);
  EXPECT_DOUBLE_EQ(hi - lo, 105);
  const auto [lo2, hi2] = VaryingIntervalDescent::candidate_bounds(2.5, 900, 1.5, global);
  EXPECT_DOUBLE_EQ(lo2, 2);
  EXPECT_DOUBLE_EQ(hi2, 1000);
}

// Independent flat implementation of the varying-interval procedure.
struct VaryingIntervalOracle {
  double gmin, gmax, kmin, kmax, k, alpha;
  std::size_t mu, m = 1, m0 = 1, mp = 0, n = 0;
  double wmin = INFINITY, wmax = -INFINITY;
  bool restarted = false;

  void step(int s, bool available) {
    restarted = false;
    const double b = kmax - kmin;
    const double delta = b / std::sqrt(2.0 * std::max<double>(1.0, double(m) - double(m0)));
    double next = k;
    if (available) next = std::min(kmax, std::max(kmin, k - delta * s));
    const std::size_t mpp = m - m0;
    if (next != k) {
      k = next;
      wmin = std::min(wmin, k);
      wmax = std::max(wmax, k);
      if (++n >= mu) {
        const double hi = std::min(alpha * wmax, gmax);
        const double lo = std::max(wmin / alpha, gmin);
        if (hi > lo && hi - lo < (std::sqrt(2.0) - 1.0) * b && mpp >= mp) {
          kmin = lo;
          kmax = hi;
          mp = mpp;
          m0 = m;
          restarted = true;
        }
        n = 0;
        wmin = INFINITY;
        wmax = -INFINITY;
      }
    }
    ++m;
  }
};

TEST(VaryingInterval, MatchesReferenceImplementation) {
  std::size_t total_restarts = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    const double k_star = 5 + 900 * rng.uniform();
    VaryingIntervalParams p{1.5, 5 + rng.uniform_index(20)};
    VaryingIntervalDescent alg(SearchInterval(2, 1000), 501, p);
    VaryingIntervalOracle o{2, 1000, 2, 1000, 501, 1.5, p.update_window};
    std::size_t restarts = 0;
    for (int m = 1; m <= 3000; ++m) {
      SignFeedback s = sign_of(alg.k() - k_star);
      if (rng.bernoulli(0.2)) s = flip(s);
      const bool available = !rng.bernoulli(0.1);
      if (!available) s = kNone;
      o.step(sign_value(s), available);
      alg.step(s);
      ASSERT_DOUBLE_EQ(alg.k(), o.k) << "seed " << seed << " m " << m;
      ASSERT_EQ(alg.restarted(), o.restarted);
      ASSERT_DOUBLE_EQ(alg.interval().k_min(), o.kmin);
      ASSERT_DOUBLE_EQ(alg.interval().k_max(), o.kmax);
      ASSERT_GE(alg.k(), alg.interval().k_min());
      ASSERT_LE(alg.k(), alg.interval().k_max());
      restarts += alg.restarted();
    }
    total_restarts += restarts;
  }
  EXPECT_GT(total_restarts, 0u);
}

TEST(VaryingInterval, UnavailableLeavesWindowUntouched) {
  VaryingIntervalDescent alg(SearchInterval(2, 1000), 500, {1.5, 3});
  alg.step(kPlus);
  const auto n = alg.window_count();
  const double k = alg.k();
  alg.step(kNone);
  alg.step(kZero);
  EXPECT_EQ(alg.window_count(), n);
  EXPECT_EQ(alg.k(), k);
  EXPECT_EQ(alg.m(), 4u);
}

TEST(VaryingInterval, FirstStepAfterRestartUsesUnitElapsed) {
  VaryingIntervalDescent alg(SearchInterval(2, 1000), 500, {1.5, 20});
  EXPECT_DOUBLE_EQ(alg.step_size(), 998 / std::sqrt(2.0));
}

TEST(ValueDescent, Behaviour) {
  ValueDescent a(SearchInterval(10, 110), 60);
  a.step(0.0);
  EXPECT_EQ(a.k(), 60);
  a.step(1e12);
  EXPECT_EQ(a.k(), 10);
  a.step(std::nullopt);
  EXPECT_EQ(a.k(), 10);

  ValueDescent v(SearchInterval(10, 110), 60);
  SignDescent s(SearchInterval(10, 110), 60);
  Rng rng(3);
  for (int m = 0; m < 100; ++m) {
    const bool plus = rng.bernoulli(0.5);
    v.step(plus ? 1.0 : -1.0);
    s.step(plus ? kPlus : kMinus);
    EXPECT_DOUBLE_EQ(v.k(), s.k());
  }
}

TEST(Exp3, ArmsAreIntegerLogSpaced) {
  const auto arms = log_spaced_arms(SearchInterval(4, 2000), 32);
  EXPECT_EQ(arms.front(), 4);
  EXPECT_EQ(arms.back(), 2000);
  EXPECT_LE(arms.size(), 32u);
  for (std::size_t a = 1; a < arms.size(); ++a) {
    EXPECT_GT(arms[a], arms[a - 1]);
    EXPECT_EQ(arms[a], std::round(arms[a]));
  }
}

TEST(Exp3, FirstPickUniform) {
  const SearchInterval k(1, 1000);
  std::map<std::size_t, int> hist;
  const int n = 32000;
  for (int s = 0; s < n; ++s) ++hist[Exp3(k, {}, Rng(s)).current_arm()];
  const std::size_t arms = log_spaced_arms(k, 32).size();
  ASSERT_EQ(hist.size(), arms);
  const double p = 1.0 / arms;
  const double sigma = std::sqrt(n * p * (1 - p));
  for (const auto& [arm, count] : hist) EXPECT_NEAR(count, n * p, 4 * sigma) << arm;
}

TEST(Exp3, ConvergesToZeroCostArm) {
  Exp3 alg(SearchInterval(1, 1000), {32, 0.05, 0.0}, Rng(7));
  const std::size_t best = 11;
  int late_hits = 0;
  for (int m = 0; m < 10000; ++m) {
    const bool hit = alg.current_arm() == best;
    if (m >= 9000) late_hits += hit;
    alg.update_cost(hit ? 0.0 : 1.0, 1.0);
  }
  EXPECT_GT(late_hits, 900);
  EXPECT_GT(alg.probabilities()[best], 0.9);
}

TEST(Exp3, GammaZeroIsHedge) {
  Exp3 alg(SearchInterval(1, 100), {8, 0.0, 0.3}, Rng(2));
  std::vector<double> logw(alg.arms().size(), 0.0);
  Rng rewards(5);
  for (int m = 0; m < 50; ++m) {
    const std::size_t a = alg.current_arm();
    const double p = alg.probabilities()[a];
    const double r = rewards.uniform();
    logw[a] += 0.3 * r / p;
    alg.update_reward(r);
    double z = 0;
    for (double w : logw) z += std::exp(w);
    const auto probs = alg.probabilities();
    for (std::size_t i = 0; i < logw.size(); ++i) ASSERT_NEAR(probs[i], std::exp(logw[i]) / z, 1e-12);
  }
}

TEST(Exp3, ClampsOutOfRangeRewards) {
  Exp3 alg(SearchInterval(1, 100), {}, Rng(1));
  alg.update_reward(1.5);
  alg.update_cost(5.0, 1.0);
  alg.update_reward(0.5);
  EXPECT_EQ(alg.clamp_events(), 2u);
}

TEST(Exp3, DefaultLearningRate) {
  Exp3 alg(SearchInterval(1, 1000), {32, 0.1, 0.0}, Rng(1));
  EXPECT_DOUBLE_EQ(alg.learning_rate(), 0.1 / alg.arms().size());
}

TEST(Controllers, FactoryAndNames) {
  for (auto kind : {ControllerKind::kFixed, ControllerKind::kSignDescent,
                    ControllerKind::kVaryingInterval, ControllerKind::kValueDescent,
                    ControllerKind::kExp3, ControllerKind::kReplay})
    EXPECT_EQ(parse_controller_kind(to_string(kind)), kind);
  EXPECT_THROW(parse_controller_kind("bisection"), InputError);

  ControllerSettings s;
  s.kind = ControllerKind::kReplay;
  s.replay = {5, 7};
  auto replay = make_controller(s, Rng(1));
  EXPECT_EQ(replay->current_k(), 5);
  replay->observe({});
  EXPECT_EQ(replay->current_k(), 7);
  replay->observe({});
  EXPECT_EQ(replay->current_k(), 7);
  EXPECT_FALSE(replay->needs_probe());

  s.kind = ControllerKind::kSignDescent;
  s.k_min = 10;
  s.k_max = 110;
  s.k_initial = 20;
  auto descent = make_controller(s, Rng(1));
  EXPECT_TRUE(descent->needs_probe());
  ControllerFeedback f;
  f.sign = kMinus;
  descent->observe(f);
  EXPECT_NEAR(descent->current_k(), 20 + 100 / std::sqrt(2.0), 1e-12);
}

TEST(Controllers, Exp3CostUsesTimePerLossDecrease) {
  ControllerSettings s;
  s.kind = ControllerKind::kExp3;
  s.k_min = 1;
  s.k_max = 100;
  s.exp3_cost_scale = 10;
  auto c = make_controller(s, Rng(3));
  ControllerFeedback f;
  f.round_time = 2.0;
  f.probe_loss_decrease = 0.5;  // cost 4 -> reward 0.6
  c->observe(f);
  f.probe_loss_decrease = -1.0;  // no progress -> reward 0 (clamped)
  c->observe(f);
  EXPECT_GE(c->current_k(), 1);
}

}  // namespace
}  // namespace fabk
