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

#include "fabk/timing.h"

#include <cmath>
#include <string>

#include "fabk/error.h"

namespace fabk {

RoundTime round_time(const TimingConfig& cfg, std::size_t comm_slots, std::size_t dim) {
  FABK_REQUIRE(dim > 0, "round_time needs D > 0");
  FABK_REQUIRE(cfg.comm_time_full >= 0.0 && cfg.compute_time >= 0.0,
               "timing parameters must be nonnegative");
  RoundTime t;
  t.compute = cfg.compute_time;
  t.comm = cfg.comm_time_full * static_cast<double>(comm_slots) / (2.0 * static_cast<double>(dim));
  t.total = t.compute + t.comm;
  return t;
}

std::size_t stochastic_round(double k, std::size_t dim, Rng& rng) {
  FABK_REQUIRE(std::isfinite(k) && k >= 1.0 && k <= static_cast<double>(dim),
               "stochastic_round requires 1 <= k <= D (k=" + std::to_string(k) + ")");
  const double lo = std::floor(k);
  const double frac = k - lo;
  const auto base = static_cast<std::size_t>(lo);
  if (frac == 0.0) return base;
  return rng.uniform() < frac ? base + 1 : base;
}

}  // namespace fabk
