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

#include <algorithm>
#include <cmath>
#include <string>

#include "fabk/error.h"

namespace fabk {

SyntheticCostFamily::SyntheticCostFamily(CostShape shape, std::vector<double> decrements)
    : shape_(shape), decrements_(std::move(decrements)) {
  FABK_REQUIRE(shape.dim >= 2, "cost family needs D >= 2");
  FABK_REQUIRE(shape.comm_coeff > 0.0 && shape.comp_coeff > 0.0 && shape.exponent > 0.0,
               "cost coefficients must be positive");
  FABK_REQUIRE(shape.profile_slope >= 0.0, "profile slope must be nonnegative");
  FABK_REQUIRE(!decrements_.empty(), "cost family needs at least one round");
  for (double d : decrements_) FABK_REQUIRE(d > 0.0 && std::isfinite(d), "decrements must be positive");

  loss_.assign(decrements_.size() + 1, 0.0);
  for (std::size_t m = decrements_.size(); m-- > 0;) loss_[m] = loss_[m + 1] + decrements_[m];

  base_.assign(shape.dim + 1, 0.0);
  for (std::size_t k = 1; k <= shape.dim; ++k) {
    const double kd = static_cast<double>(k);
    base_[k] = shape.comm_coeff * kd + shape.comp_coeff / std::pow(kd, shape.exponent);
  }
  k_star_ = static_cast<std::size_t>(std::min_element(base_.begin() + 1, base_.end()) - base_.begin());
}

double SyntheticCostFamily::unit_cost(double k) const {
  FABK_REQUIRE(k >= 1.0 && k <= static_cast<double>(shape_.dim), "k outside [1, D]");
  const double lo = std::floor(k);
  const auto i = static_cast<std::size_t>(lo);
  const double frac = k - lo;
  if (frac == 0.0) return base_[i];
  return (1.0 - frac) * base_[i] + frac * base_[i + 1];
}

double SyntheticCostFamily::profile(double l) const {
  return 1.0 + shape_.profile_slope * l / loss_.front();
}

double SyntheticCostFamily::integral_weight(std::size_t m) const {
  FABK_REQUIRE(m >= 1 && m <= decrements_.size(), "round index out of range");
  const double hi = loss_[m - 1];
  const double lo = loss_[m];
  return (hi - lo) + shape_.profile_slope * (hi * hi - lo * lo) / (2.0 * loss_.front());
}

double SyntheticCostFamily::tau(std::size_t m, double k) const {
  return unit_cost(k) * integral_weight(m);
}

SignFeedback SyntheticCostFamily::exact_sign(double k) const {
  FABK_REQUIRE(k >= 1.0 && k <= static_cast<double>(shape_.dim), "k outside [1, D]");
  const double lo = std::floor(k);
  const auto i = static_cast<std::size_t>(lo);
  if (k != lo) return sign_of(base_[i + 1] - base_[i]);
  // At a vertex: zero when the subdifferential contains 0.
  const bool left_ok = i == 1 || base_[i] - base_[i - 1] <= 0.0;
  const bool right_ok = i == shape_.dim || base_[i + 1] - base_[i] >= 0.0;
  if (left_ok && right_ok) return SignFeedback::kZero;
  return i > 1 && base_[i] - base_[i - 1] > 0.0 ? SignFeedback::kPlus : SignFeedback::kMinus;
}

double SyntheticCostFamily::slope_bound(double k_lo, double k_hi) const {
  const auto first = static_cast<std::size_t>(std::max(1.0, std::floor(k_lo)));
  const auto last = static_cast<std::size_t>(
      std::min(static_cast<double>(shape_.dim), std::ceil(k_hi)));
  double g = 0.0;
  for (std::size_t k = first; k < last; ++k) g = std::max(g, std::abs(base_[k + 1] - base_[k]));
  return g * (1.0 + shape_.profile_slope);
}

double SyntheticCostFamily::max_decrement() const {
  return *std::max_element(decrements_.begin(), decrements_.end());
}

SignFeedback noisy_sign(SignFeedback exact, double p, Rng& rng) {
  if (p <= 0.0) return exact;
  const double u = rng.uniform();
  if (exact == SignFeedback::kZero) {
    if (u < 0.5 * p) return SignFeedback::kPlus;
    if (u < p) return SignFeedback::kMinus;
    return exact;
  }
  return u < p ? flip(exact) : exact;
}

RegretTrace run_regret_trial(const SyntheticCostFamily& family, RegretAlgorithm algorithm,
                             const SearchInterval& interval, double k_initial,
                             double flip_probability, Rng& rng, VaryingIntervalParams params) {
  FABK_REQUIRE(flip_probability >= 0.0 && flip_probability < 0.5,
               "flip probability must lie in [0, 0.5)");
  const std::size_t rounds = family.rounds();
  RegretTrace trace;
  trace.k.reserve(rounds);
  trace.tau_chosen.reserve(rounds);
  trace.tau_best.reserve(rounds);
  trace.cumulative.reserve(rounds);
  const auto k_star = static_cast<double>(family.k_star());

  SignDescent sign_descent(interval, k_initial);
  VaryingIntervalDescent varying(interval, k_initial, params);
  const bool use_varying = algorithm == RegretAlgorithm::kVaryingInterval;
  double total = 0.0;
  for (std::size_t m = 1; m <= rounds; ++m) {
    const double k = use_varying ? varying.k() : sign_descent.k();
    const double chosen = family.tau(m, k);
    const double best = family.tau(m, k_star);
    total += chosen - best;
    trace.k.push_back(k);
    trace.tau_chosen.push_back(chosen);
    trace.tau_best.push_back(best);
    trace.cumulative.push_back(total);
    const SignFeedback s = noisy_sign(family.exact_sign(k), flip_probability, rng);
    if (use_varying)
      varying.step(s);
    else
      sign_descent.step(s);
  }
  return trace;
}

RegretSummary run_regret_experiment(const RegretExperimentConfig& cfg) {
  if (!(cfg.flip_probability >= 0.0 && cfg.flip_probability < 0.5))
    throw InputError("flip probability must lie in [0, 0.5); p >= 0.5 makes the sign uninformative");
  FABK_REQUIRE(cfg.rounds >= 1 && cfg.trials >= 1, "need at least one round and one trial");
  FABK_REQUIRE(cfg.decrement_min > 0.0 && cfg.decrement_min <= cfg.decrement_max,
               "invalid decrement range");
  const double k_max = cfg.k_max > 0.0 ? cfg.k_max : static_cast<double>(cfg.shape.dim);
  const SearchInterval interval(cfg.k_min, k_max);

  RegretSummary summary;
  summary.rounds = cfg.rounds;
  summary.B = interval.width();
  summary.H = 1.0 / (1.0 - 2.0 * cfg.flip_probability);
  summary.per_trial.reserve(cfg.trials);

  for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
    Rng rng = Rng::derive(cfg.seed, {tag(Stream::kRegret), cfg.rounds, trial});
    std::vector<double> decrements(cfg.rounds);
    for (double& d : decrements) d = rng.uniform(cfg.decrement_min, cfg.decrement_max);
    SyntheticCostFamily family(cfg.shape, std::move(decrements));
    if (trial == 0) {
      FABK_REQUIRE(interval.contains(static_cast<double>(family.k_star())),
                   "search interval must contain the minimizer");
      summary.g = family.slope_bound(interval.k_min(), interval.k_max());
      summary.G = summary.g * cfg.decrement_max;
      summary.bound = summary.G * summary.H * summary.B *
                      std::sqrt(2.0 * static_cast<double>(cfg.rounds));
    }
    const double k0 = rng.uniform(interval.k_min(), interval.k_max());
    const auto trace = run_regret_trial(family, cfg.algorithm, interval, k0,
                                        cfg.flip_probability, rng, cfg.varying);
    const double r = trace.regret();
    summary.per_trial.push_back(r);
    summary.mean_regret += r;
    summary.max_regret = trial == 0 ? r : std::max(summary.max_regret, r);
    if (r > summary.bound) ++summary.violations;
  }
  summary.mean_regret /= static_cast<double>(cfg.trials);
  return summary;
}

void write_regret_csv(std::ostream& out, const std::vector<RegretSummary>& summaries) {
  out << "M,trial,R,bound,violated\n";
  const auto old_precision = out.precision(17);
  for (const auto& s : summaries)
    for (std::size_t t = 0; t < s.per_trial.size(); ++t)
      out << s.rounds << ',' << t << ',' << s.per_trial[t] << ',' << s.bound << ','
          << (s.per_trial[t] > s.bound ? "true" : "false") << '\n';
  out.precision(old_precision);
}

}  // namespace fabk
