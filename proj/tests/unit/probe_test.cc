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

#include "fabk/probe.h"

#include <cmath>

#include <gtest/gtest.h>

#include "fabk/data.h"
#include "fabk/error.h"
#include "fabk/regret.h"
#include "fabk/timing.h"
#include "support/instances.h"

namespace fabk {
namespace {

ProbeRecord record(double prev, double cur, double alt, double theta_alt) {
  return ProbeRecord{prev, cur, alt, 0.0, theta_alt, 10.0, 9.0};
}

TEST(TauAlt, EqualProgressGivesThetaAlt) {
  EXPECT_DOUBLE_EQ(*estimate_tau_alt(record(2.0, 1.5, 1.5, 3.25)), 3.25);
}

TEST(TauAlt, HalfProgressDoublesTime) {
  EXPECT_DOUBLE_EQ(*estimate_tau_alt(record(2.0, 1.0, 1.5, 3.0)), 6.0);
}

TEST(TauAlt, UnavailableWhenNoProgress) {
  EXPECT_FALSE(estimate_tau_alt(record(1.0, 1.0, 0.5, 1.0)));
  EXPECT_FALSE(estimate_tau_alt(record(1.0, 1.2, 0.5, 1.0)));
  EXPECT_FALSE(estimate_tau_alt(record(1.0, 0.5, 1.0, 1.0)));
  EXPECT_FALSE(estimate_tau_alt(record(1.0, 0.5, NAN, 1.0)));
}

TEST(Sign, Examples) {
  EXPECT_EQ(estimate_sign(11.0, 10.0, 10.0, 9.0), SignFeedback::kPlus);
  EXPECT_EQ(estimate_sign(10.0, 10.0, 10.0, 9.0), SignFeedback::kZero);
  EXPECT_EQ(estimate_sign(9.0, 10.0, 10.0, 9.0), SignFeedback::kMinus);
  EXPECT_DOUBLE_EQ(estimate_derivative(11.0, 10.0, 10.0, 8.0), 0.5);
  EXPECT_THROW(estimate_sign(1.0, 2.0, 3.0, 3.0), ContractViolation);
}

// One round at k takes theta(k) and lowers the loss by theta(k) / t(k) on the
// synthetic family, plus noise. The estimated sign should track the analytic one.
TEST(Sign, TracksSyntheticFamily) {
  CostShape shape;
  shape.dim = 1000;
  shape.profile_slope = 0.0;
  const SyntheticCostFamily family(shape, {1.0});
  auto theta = [](double k) { return 1.0 + 0.01 * k; };
  Rng rng(3);
  int agree = 0, total = 0;
  for (int draw = 0; draw < 2000; ++draw) {
    const double k = 2 + rng.uniform() * 990;
    const double kp = k - 5.0;
    if (kp < 1) continue;
    const auto exact = family.exact_sign(k);
    if (exact == SignFeedback::kZero) continue;
    const double noise = 0.02;
    const double prev = 10.0;
    const double cur = prev - theta(k) / family.unit_cost(k) * (1 + noise * rng.normal());
    const double alt = prev - theta(kp) / family.unit_cost(kp) * (1 + noise * rng.normal());
    const auto tau_alt = estimate_tau_alt(ProbeRecord{prev, cur, alt, theta(k), theta(kp), k, kp});
    if (!tau_alt) continue;
    ++total;
    agree += estimate_sign(theta(k), *tau_alt, k, kp) == exact;
  }
  ASSERT_GT(total, 1000);
  EXPECT_GT(static_cast<double>(agree) / total, 0.5);
}

TEST(CollectProbes, IdenticalClientsAverageToTheirValues) {
  const Model model({2, 0, 2});
  const Sample s{{1.0, -1.0}, 0};
  const std::vector<std::vector<Sample>> batches(4, std::vector<Sample>{s, s});
  DenseVector w0(model.dimension()), w1(model.dimension()), w2(model.dimension());
  w1[0] = 0.5;
  w2[0] = -0.5;
  Rng rng(1);
  const auto p = collect_probes(model, batches, w0, w1, w2, rng);
  EXPECT_DOUBLE_EQ(p.prev, model.sample_loss(w0, s));
  EXPECT_DOUBLE_EQ(p.cur, model.sample_loss(w1, s));
  EXPECT_DOUBLE_EQ(p.alt, model.sample_loss(w2, s));
}

TEST(CollectProbes, MatchesRecomputation) {
  Rng data_rng(2);
  const auto samples = synth_classification(4, 3, 5, 20);
  const Model model({5, 4, 3});
  std::vector<std::vector<Sample>> batches;
  for (int i = 0; i < 5; ++i) batches.push_back(sample_minibatch(samples, 7, data_rng));
  Rng wr(9);
  const auto w0 = model.initial_weights(wr), w1 = model.initial_weights(wr), w2 = model.initial_weights(wr);
  Rng a(11);
  const auto p = collect_probes(model, batches, w0, w1, w2, a);
  ASSERT_EQ(p.picks.size(), 5u);
  double sp = 0, sc = 0, sa = 0;
  Rng b(11);
  for (std::size_t i = 0; i < 5; ++i) {
    const auto h = b.uniform_index(batches[i].size());
    EXPECT_EQ(h, p.picks[i]);
    sp += model.sample_loss(w0, batches[i][h]);
    sc += model.sample_loss(w1, batches[i][h]);
    sa += model.sample_loss(w2, batches[i][h]);
  }
  EXPECT_NEAR(p.prev, sp / 5, 1e-14);
  EXPECT_NEAR(p.cur, sc / 5, 1e-14);
  EXPECT_NEAR(p.alt, sa / 5, 1e-14);
}

TEST(AltWeights, FullKReproducesCurrentWeights) {
  Rng rng(5);
  const std::size_t n = 4, dim = 80, k = 15;
  auto inst = testing::random_reports(rng, n, dim, k);
  std::vector<ClientState> clients;
  DenseVector w(dim);
  for (std::size_t j = 0; j < dim; ++j) w[j] = rng.normal();
  for (std::size_t i = 0; i < n; ++i)
    clients.push_back(ClientState{w, inst.accumulators[i], {}, inst.counts[i]});
  const auto accumulators = inst.accumulators;
  const auto alt = build_alt_weights(w, inst.reports, k, 0.3, inst.counts);
  for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(clients[i].accumulator, accumulators[i]);
  apply_and_reset(clients, fab_select(inst.reports, k, inst.counts), 0.3);
  EXPECT_EQ(alt.weights, clients[0].weights);
  EXPECT_EQ(alt.comm_slots, topk_slots(k, alt.selection.selected.size()));
}

TEST(AltWeights, KOneTouchesAtMostNCoordinates) {
  Rng rng(6);
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 2 + rng.uniform_index(8), dim = 100;
    auto inst = testing::random_reports(rng, n, dim, 20);
    DenseVector w(dim, 1.0);
    const auto alt = build_alt_weights(w, inst.reports, 1, 0.1, inst.counts);
    std::size_t changed = 0;
    for (std::size_t j = 0; j < dim; ++j) changed += alt.weights[j] != w[j];
    EXPECT_LE(changed, n);
    EXPECT_LE(alt.selection.selected.size(), 1u);
  }
  auto inst = testing::random_reports(rng, 3, 30, 5);
  EXPECT_NO_THROW(build_alt_weights(DenseVector(30), inst.reports, 0, 0.1, inst.counts));
}

}  // namespace
}  // namespace fabk
