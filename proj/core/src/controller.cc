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

#include <algorithm>
#include <cmath>
#include <string>

#include "fabk/error.h"

namespace fabk {

SearchInterval::SearchInterval(double k_min, double k_max) : k_min_(k_min), k_max_(k_max) {
  FABK_REQUIRE(std::isfinite(k_min) && std::isfinite(k_max) && k_min < k_max,
               "search interval needs k_min < k_max (got [" + std::to_string(k_min) + ", " +
                   std::to_string(k_max) + "])");
}

double SearchInterval::project(double k) const { return std::clamp(k, k_min_, k_max_); }

int sign_value(SignFeedback s) {
  switch (s) {
    case SignFeedback::kMinus: return -1;
    case SignFeedback::kPlus: return 1;
    default: return 0;
  }
}

SignFeedback sign_of(double x) {
  if (x > 0) return SignFeedback::kPlus;
  if (x < 0) return SignFeedback::kMinus;
  return SignFeedback::kZero;
}

SignFeedback flip(SignFeedback s) {
  if (s == SignFeedback::kPlus) return SignFeedback::kMinus;
  if (s == SignFeedback::kMinus) return SignFeedback::kPlus;
  return s;
}

// ---------------------------------------------------------------------------

SignDescent::SignDescent(SearchInterval interval, double k_initial)
    : interval_(interval), k_(interval.project(k_initial)) {}

double SignDescent::step_size() const {
  return interval_.width() / std::sqrt(2.0 * static_cast<double>(m_));
}

void SignDescent::step(SignFeedback s) {
  if (s != SignFeedback::kUnavailable) k_ = interval_.project(k_ - step_size() * sign_value(s));
  ++m_;
}

// ---------------------------------------------------------------------------

VaryingIntervalDescent::VaryingIntervalDescent(SearchInterval global, double k_initial,
                                               VaryingIntervalParams params)
    : global_(global), interval_(global), params_(params), k_(global.project(k_initial)) {
  FABK_REQUIRE(params.alpha >= 1.0, "alpha must be >= 1");
  FABK_REQUIRE(params.update_window >= 1, "update window must be >= 1");
}

bool VaryingIntervalDescent::should_restart(double new_width, double width,
                                            std::size_t current_length,
                                            std::size_t previous_length) {
  return new_width < (std::sqrt(2.0) - 1.0) * width && current_length >= previous_length;
}

double VaryingIntervalDescent::step_size() const {
  const std::size_t elapsed = std::max<std::size_t>(1, m_ - m0_);
  return interval_.width() / std::sqrt(2.0 * static_cast<double>(elapsed));
}

std::pair<double, double> VaryingIntervalDescent::candidate_bounds(double window_min,
                                                                   double window_max, double alpha,
                                                                   const SearchInterval& global) {
  return {std::max(window_min / alpha, global.k_min()),
          std::min(alpha * window_max, global.k_max())};
}

void VaryingIntervalDescent::step(SignFeedback s) {
  restarted_ = false;
  double next = k_;
  if (s != SignFeedback::kUnavailable) next = interval_.project(k_ - step_size() * sign_value(s));
  cur_len_ = m_ - m0_;
  const bool changed = next != k_;
  k_ = next;
  // Window bookkeeping only counts rounds in which k moved.
  if (changed) {
    window_min_ = std::min(window_min_, k_);
    window_max_ = std::max(window_max_, k_);
    ++n_;
    if (n_ >= params_.update_window) {
      const auto [lo, hi] = candidate_bounds(window_min_, window_max_, params_.alpha, global_);
      const double candidate = hi - lo;
      last_candidate_ = candidate;
      // candidate > 0 keeps the new interval non-degenerate when alpha = 1.
      if (candidate > 0.0 && should_restart(candidate, interval_.width(), cur_len_, prev_len_)) {
        interval_ = SearchInterval(lo, hi);
        prev_len_ = cur_len_;
        m0_ = m_;
        restarted_ = true;
      }
      n_ = 0;
      window_min_ = std::numeric_limits<double>::infinity();
      window_max_ = 0.0;
    }
  }
  ++m_;
}

// ---------------------------------------------------------------------------

ValueDescent::ValueDescent(SearchInterval interval, double k_initial)
    : interval_(interval), k_(interval.project(k_initial)) {}

double ValueDescent::step_size() const {
  return interval_.width() / std::sqrt(2.0 * static_cast<double>(m_));
}

void ValueDescent::step(std::optional<double> derivative) {
  if (derivative && std::isfinite(*derivative))
    k_ = interval_.project(k_ - step_size() * *derivative);
  ++m_;
}

// ---------------------------------------------------------------------------

std::vector<double> log_spaced_arms(const SearchInterval& interval, std::size_t count) {
  FABK_REQUIRE(count >= 1, "need at least one arm");
  const double lo = std::max(1.0, std::ceil(interval.k_min()));
  const double hi = std::max(lo, std::floor(interval.k_max()));
  std::vector<double> arms;
  for (std::size_t t = 0; t < count; ++t) {
    const double frac = count == 1 ? 0.0 : static_cast<double>(t) / static_cast<double>(count - 1);
    const double v = std::round(std::exp(std::log(lo) + frac * (std::log(hi) - std::log(lo))));
    const double arm = std::clamp(v, lo, hi);
    if (arms.empty() || arm != arms.back()) arms.push_back(arm);
  }
  return arms;
}

Exp3::Exp3(const SearchInterval& interval, Exp3Params params, Rng rng)
    : arms_(log_spaced_arms(interval, params.arms)),
      log_weights_(arms_.size(), 0.0),
      params_(params),
      rate_(params.learning_rate > 0.0 ? params.learning_rate
                                       : params.gamma / static_cast<double>(arms_.size())),
      rng_(rng) {
  FABK_REQUIRE(params.gamma >= 0.0 && params.gamma <= 1.0, "EXP3 gamma must lie in [0, 1]");
  current_ = draw();
}

std::vector<double> Exp3::probabilities() const {
  const double top = *std::max_element(log_weights_.begin(), log_weights_.end());
  std::vector<double> p(arms_.size());
  double sum = 0.0;
  for (std::size_t a = 0; a < p.size(); ++a) {
    p[a] = std::exp(log_weights_[a] - top);
    sum += p[a];
  }
  const double uniform = 1.0 / static_cast<double>(p.size());
  for (double& x : p) x = (1.0 - params_.gamma) * x / sum + params_.gamma * uniform;
  return p;
}

std::size_t Exp3::draw() {
  const auto p = probabilities();
  double u = rng_.uniform();
  for (std::size_t a = 0; a < p.size(); ++a) {
    if (u < p[a]) return a;
    u -= p[a];
  }
  return p.size() - 1;
}

void Exp3::update_reward(double reward) {
  if (!(reward >= 0.0 && reward <= 1.0)) {
    ++clamps_;
    reward = std::isnan(reward) ? 0.0 : std::clamp(reward, 0.0, 1.0);
  }
  const double p = probabilities()[current_];
  log_weights_[current_] += rate_ * reward / p;
  current_ = draw();
}

void Exp3::update_cost(double cost, double cost_scale) {
  FABK_REQUIRE(cost_scale > 0.0, "EXP3 cost scale must be positive");
  update_reward(1.0 - cost / cost_scale);
}

// ---------------------------------------------------------------------------

std::string_view to_string(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::kFixed: return "fixed";
    case ControllerKind::kSignDescent: return "sign_descent";
    case ControllerKind::kVaryingInterval: return "varying_interval";
    case ControllerKind::kValueDescent: return "value_descent";
    case ControllerKind::kExp3: return "exp3";
    case ControllerKind::kReplay: return "replay";
  }
  return "unknown";
}

ControllerKind parse_controller_kind(std::string_view name) {
  for (auto kind : {ControllerKind::kFixed, ControllerKind::kSignDescent,
                    ControllerKind::kVaryingInterval, ControllerKind::kValueDescent,
                    ControllerKind::kExp3, ControllerKind::kReplay})
    if (to_string(kind) == name) return kind;
  throw InputError("unknown controller kind '" + std::string(name) + "'");
}

namespace {

class FixedController final : public KController {
 public:
  explicit FixedController(double k) : k_(k) {}
  ControllerKind kind() const override { return ControllerKind::kFixed; }
  double current_k() const override { return k_; }
  void observe(const ControllerFeedback&) override {}

 private:
  double k_;
};

class ReplayController final : public KController {
 public:
  explicit ReplayController(std::vector<double> seq) : seq_(std::move(seq)) {
    if (seq_.empty()) throw InputError("replay controller needs a nonempty k sequence");
  }
  ControllerKind kind() const override { return ControllerKind::kReplay; }
  double current_k() const override { return seq_[std::min(pos_, seq_.size() - 1)]; }
  void observe(const ControllerFeedback&) override { ++pos_; }

 private:
  std::vector<double> seq_;
  std::size_t pos_ = 0;
};

class SignDescentController final : public KController {
 public:
  SignDescentController(SearchInterval interval, double k0) : alg_(interval, k0) {}
  ControllerKind kind() const override { return ControllerKind::kSignDescent; }
  double current_k() const override { return alg_.k(); }
  bool needs_probe() const override { return true; }
  double step_size() const override { return alg_.step_size(); }
  void observe(const ControllerFeedback& f) override { alg_.step(f.sign); }

 private:
  SignDescent alg_;
};

class VaryingIntervalController final : public KController {
 public:
  VaryingIntervalController(SearchInterval interval, double k0, VaryingIntervalParams p)
      : alg_(interval, k0, p) {}
  ControllerKind kind() const override { return ControllerKind::kVaryingInterval; }
  double current_k() const override { return alg_.k(); }
  bool needs_probe() const override { return true; }
  double step_size() const override { return alg_.step_size(); }
  bool restarted() const override { return alg_.restarted(); }
  void observe(const ControllerFeedback& f) override { alg_.step(f.sign); }

 private:
  VaryingIntervalDescent alg_;
};

class ValueDescentController final : public KController {
 public:
  ValueDescentController(SearchInterval interval, double k0) : alg_(interval, k0) {}
  ControllerKind kind() const override { return ControllerKind::kValueDescent; }
  double current_k() const override { return alg_.k(); }
  bool needs_probe() const override { return true; }
  double step_size() const override { return alg_.step_size(); }
  void observe(const ControllerFeedback& f) override { alg_.step(f.derivative); }

 private:
  ValueDescent alg_;
};

// Cost of a round is its time per unit decrease of the probed loss.
class Exp3Controller final : public KController {
 public:
  Exp3Controller(SearchInterval interval, Exp3Params p, double cost_scale, Rng rng)
      : alg_(interval, p, rng), cost_scale_(cost_scale) {}
  ControllerKind kind() const override { return ControllerKind::kExp3; }
  double current_k() const override { return alg_.k(); }
  bool needs_probe() const override { return true; }
  void observe(const ControllerFeedback& f) override {
    const bool progressed = f.probe_loss_decrease && *f.probe_loss_decrease > 0.0;
    const double cost = progressed ? f.round_time / *f.probe_loss_decrease
                                   : std::numeric_limits<double>::infinity();
    if (cost_scale_ <= 0.0) {
      if (!std::isfinite(cost)) {
        alg_.update_reward(0.0);
        return;
      }
      cost_scale_ = 2.0 * cost;
    }
    alg_.update_cost(cost, cost_scale_);
  }

 private:
  Exp3 alg_;
  double cost_scale_;
};

}  // namespace

std::unique_ptr<KController> make_controller(const ControllerSettings& s, Rng rng) {
  if (s.kind == ControllerKind::kFixed) return std::make_unique<FixedController>(s.k_initial);
  if (s.kind == ControllerKind::kReplay) return std::make_unique<ReplayController>(s.replay);
  const SearchInterval interval(s.k_min, s.k_max);
  switch (s.kind) {
    case ControllerKind::kSignDescent:
      return std::make_unique<SignDescentController>(interval, s.k_initial);
    case ControllerKind::kVaryingInterval:
      return std::make_unique<VaryingIntervalController>(interval, s.k_initial, s.varying);
    case ControllerKind::kValueDescent:
      return std::make_unique<ValueDescentController>(interval, s.k_initial);
    case ControllerKind::kExp3:
      return std::make_unique<Exp3Controller>(interval, s.exp3, s.exp3_cost_scale, rng);
    default:
      break;
  }
  throw InputError("unsupported controller kind");
}

}  // namespace fabk
