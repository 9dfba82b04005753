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

#include <algorithm>

#include "fabk/error.h"
#include "fabk/timing.h"

namespace fabk {

ProbeLosses collect_probes(const Model& model, std::span<const std::vector<Sample>> minibatches,
                           const DenseVector& w_prev, const DenseVector& w_cur,
                           const DenseVector& w_alt, Rng& rng) {
  FABK_REQUIRE(!minibatches.empty(), "probe needs at least one client");
  ProbeLosses out;
  double sp = 0.0, sc = 0.0, sa = 0.0;
  for (const auto& batch : minibatches) {
    FABK_REQUIRE(!batch.empty(), "probe minibatch is empty");
    const std::size_t h = rng.uniform_index(batch.size());
    out.picks.push_back(h);
    sp += model.sample_loss(w_prev, batch[h]);
    sc += model.sample_loss(w_cur, batch[h]);
    sa += model.sample_loss(w_alt, batch[h]);
  }
  const double n = static_cast<double>(minibatches.size());
  out.prev = sp / n;
  out.cur = sc / n;
  out.alt = sa / n;
  return out;
}

std::optional<double> estimate_tau_alt(const ProbeRecord& rec) {
  if (!(rec.loss_prev > rec.loss_cur) || !(rec.loss_prev > rec.loss_alt)) return std::nullopt;
  return rec.theta_kprime * (rec.loss_prev - rec.loss_cur) / (rec.loss_prev - rec.loss_alt);
}

double estimate_derivative(double tau_k, double tau_alt, double k, double k_prime) {
  FABK_REQUIRE(k != k_prime, "derivative estimate needs k != k'");
  return (tau_k - tau_alt) / (k - k_prime);
}

SignFeedback estimate_sign(double tau_k, double tau_alt, double k, double k_prime) {
  return sign_of(estimate_derivative(tau_k, tau_alt, k, k_prime));
}

AltUpdate build_alt_weights(const DenseVector& w_prev, std::span<const SparseGradient> reports,
                            std::size_t k_prime, double eta,
                            std::span<const double> sample_counts) {
  k_prime = std::max<std::size_t>(k_prime, 1);
  std::vector<SparseGradient> truncated;
  truncated.reserve(reports.size());
  std::size_t uplink = 0;
  for (const auto& r : reports) {
    truncated.push_back(truncate_report(r, k_prime));
    uplink = std::max(uplink, truncated.back().nnz());
  }
  AltUpdate out;
  out.selection = fab_select(truncated, k_prime, sample_counts);
  out.weights = dense_axpy(w_prev, out.selection.aggregate, -eta);
  out.comm_slots = topk_slots(uplink, out.selection.selected.size());
  return out;
}

}  // namespace fabk
