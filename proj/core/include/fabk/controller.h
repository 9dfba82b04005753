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

#ifndef FABK_CONTROLLER_H_
#define FABK_CONTROLLER_H_

#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "fabk/rng.h"

namespace fabk {

// Admissible range [k_min, k_max] for the sparsity degree.
class SearchInterval {
 public:
  SearchInterval(double k_min, double k_max);

  double k_min() const { return k_min_; }
  double k_max() const { return k_max_; }
  double width() const { return k_max_ - k_min_; }
  double project(double k) const;
  bool contains(double k) const { return k >= k_min_ && k <= k_max_; }
  double midpoint() const { return 0.5 * (k_min_ + k_max_); }

 private:
  double k_min_;
  double k_max_;
};

enum class SignFeedback { kMinus, kZero, kPlus, kUnavailable };

// -1, 0, +1; kUnavailable maps to 0.
int sign_value(SignFeedback s);
SignFeedback sign_of(double x);
SignFeedback flip(SignFeedback s);

// Projected descent on the derivative sign with step B / sqrt(2m).
class SignDescent {
 public:
  SignDescent(SearchInterval interval, double k_initial);

  double k() const { return k_; }
  std::size_t m() const { return m_; }
  const SearchInterval& interval() const { return interval_; }
  // Step size for the current round m.
  double step_size() const;
  // Unavailable feedback leaves k unchanged but still advances m.
  void step(SignFeedback s);

 private:
  SearchInterval interval_;
  double k_;
  std::size_t m_ = 1;
};

struct VaryingIntervalParams {
  double alpha = 1.5;
  std::size_t update_window = 20;  // M_u
};

// Sign descent that restarts on a narrower interval once the recent window
// of k values suggests the optimum lies in a range of width
// B' < (sqrt(2) - 1) B and the current instance has run at least as long
// as the previous one.
class VaryingIntervalDescent {
 public:
  VaryingIntervalDescent(SearchInterval global, double k_initial,
                         VaryingIntervalParams params = {});

  static bool should_restart(double new_width, double width,
                             std::size_t current_length, std::size_t previous_length);
  // Window extrema expanded by alpha and clamped to the global interval, as
  // {lo, hi}. May be degenerate (lo >= hi).
  static std::pair<double, double> candidate_bounds(double window_min, double window_max,
                                                    double alpha, const SearchInterval& global);

  double k() const { return k_; }
  std::size_t m() const { return m_; }
  std::size_t instance_start() const { return m0_; }
  std::size_t previous_length() const { return prev_len_; }
  std::size_t current_length() const { return cur_len_; }
  std::size_t window_count() const { return n_; }
  double width() const { return interval_.width(); }
  const SearchInterval& interval() const { return interval_; }
  const SearchInterval& global_interval() const { return global_; }
  bool restarted() const { return restarted_; }
  // Width B' evaluated at the most recent window close, if any.
  std::optional<double> last_candidate_width() const { return last_candidate_; }

  // B / sqrt(2 max(1, m - m0)).
  double step_size() const;
  void step(SignFeedback s);

 private:
  SearchInterval global_;
  SearchInterval interval_;
  VaryingIntervalParams params_;
  double k_;
  std::size_t m_ = 1;
  std::size_t m0_ = 1;
  std::size_t prev_len_ = 0;  // M'
  std::size_t cur_len_ = 0;   // M''
  std::size_t n_ = 0;
  double window_min_ = std::numeric_limits<double>::infinity();
  double window_max_ = 0.0;
  bool restarted_ = false;
  std::optional<double> last_candidate_;
};

// Projected descent on the estimated derivative value (not its sign).
class ValueDescent {
 public:
  ValueDescent(SearchInterval interval, double k_initial);

  double k() const { return k_; }
  std::size_t m() const { return m_; }
  double step_size() const;
  void step(std::optional<double> derivative);

 private:
  SearchInterval interval_;
  double k_;
  std::size_t m_ = 1;
};

struct Exp3Params {
  std::size_t arms = 32;
  double gamma = 0.1;  // exploration mix
  // Exponential-weights learning rate; <= 0 selects the classic gamma / arms.
  double learning_rate = 0.0;
};

// EXP3 over a log-spaced integer grid on the interval.
class Exp3 {
 public:
  Exp3(const SearchInterval& interval, Exp3Params params, Rng rng);

  const std::vector<double>& arms() const { return arms_; }
  std::vector<double> probabilities() const;
  std::size_t current_arm() const { return current_; }
  double k() const { return arms_[current_]; }
  double learning_rate() const { return rate_; }
  std::size_t clamp_events() const { return clamps_; }

  // Consumes the chosen arm's reward in [0, 1] (clamped otherwise) and draws
  // the next arm.
  void update_reward(double reward);
  // Reward = 1 - cost / cost_scale.
  void update_cost(double cost, double cost_scale);

 private:
  std::size_t draw();

  std::vector<double> arms_;
  std::vector<double> log_weights_;
  Exp3Params params_;
  double rate_;
  Rng rng_;
  std::size_t current_ = 0;
  std::size_t clamps_ = 0;
};

std::vector<double> log_spaced_arms(const SearchInterval& interval, std::size_t count);

// Per-round information available to a controller after the exchange.
struct ControllerFeedback {
  SignFeedback sign = SignFeedback::kUnavailable;
  std::optional<double> derivative;
  std::optional<double> probe_loss_decrease;  // L~(w(m-1)) - L~(w(m))
  double round_time = 0.0;
};

enum class ControllerKind { kFixed, kSignDescent, kVaryingInterval, kValueDescent, kExp3, kReplay };

std::string_view to_string(ControllerKind kind);
ControllerKind parse_controller_kind(std::string_view name);

// Chooses k_m each round from feedback about previous rounds.
class KController {
 public:
  virtual ~KController() = default;
  virtual ControllerKind kind() const = 0;
  virtual double current_k() const = 0;
  // Whether the round loop must run the three-loss probe.
  virtual bool needs_probe() const { return false; }
  // delta_m for the current round (probe offset is delta_m / 2).
  virtual double step_size() const { return 0.0; }
  virtual bool restarted() const { return false; }
  virtual void observe(const ControllerFeedback& feedback) = 0;
};

struct ControllerSettings {
  ControllerKind kind = ControllerKind::kFixed;
  double k_min = 1.0;
  double k_max = 1.0;
  double k_initial = 1.0;
  VaryingIntervalParams varying;
  Exp3Params exp3;
  double exp3_cost_scale = 0.0;  // <= 0: twice the first observed cost
  std::vector<double> replay;    // k sequence; last value is held afterwards
};

std::unique_ptr<KController> make_controller(const ControllerSettings& settings, Rng rng);

}  // namespace fabk

#endif  // FABK_CONTROLLER_H_
