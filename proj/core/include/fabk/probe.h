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

#ifndef FABK_PROBE_H_
#define FABK_PROBE_H_

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "fabk/controller.h"
#include "fabk/model.h"
#include "fabk/rng.h"
#include "fabk/sparsify.h"
#include "fabk/vector.h"

namespace fabk {

// Unweighted means over clients of single-sample losses at the previous,
// current, and alternative weights.
struct ProbeLosses {
  double prev = 0.0;
  double cur = 0.0;
  double alt = 0.0;
  std::vector<std::size_t> picks;  // per client: position in its minibatch
};

// Each client draws one sample uniformly from its round minibatch and
// evaluates it at the three weight vectors.
ProbeLosses collect_probes(const Model& model, std::span<const std::vector<Sample>> minibatches,
                           const DenseVector& w_prev, const DenseVector& w_cur,
                           const DenseVector& w_alt, Rng& rng);

struct ProbeRecord {
  double loss_prev = 0.0;
  double loss_cur = 0.0;
  double loss_alt = 0.0;
  double theta_k = 0.0;       // measured time of the round at k_m
  double theta_kprime = 0.0;  // time one round at k'_m would take
  double k = 0.0;
  double k_prime = 0.0;
};

// Time the k'_m update would need to cover the loss decrease obtained at k_m:
//   theta(k') * (L_prev - L_cur) / (L_prev - L_alt).
// Unavailable unless L_prev exceeds both L_cur and L_alt.
std::optional<double> estimate_tau_alt(const ProbeRecord& rec);

// sign((tau_k - tau_alt) / (k - k')). Requires k != k'.
SignFeedback estimate_sign(double tau_k, double tau_alt, double k, double k_prime);
double estimate_derivative(double tau_k, double tau_alt, double k, double k_prime);

struct AltUpdate {
  DenseVector weights;
  SelectionResult selection;
  std::size_t comm_slots = 0;
};

// Weights obtained by running the fairness-aware selection at k_prime over
// the same client reports (each truncated to its top k_prime entries).
// Does not touch any client state. k_prime < 1 is treated as 1.
AltUpdate build_alt_weights(const DenseVector& w_prev, std::span<const SparseGradient> reports,
                            std::size_t k_prime, double eta,
                            std::span<const double> sample_counts);

}  // namespace fabk

#endif  // FABK_PROBE_H_
