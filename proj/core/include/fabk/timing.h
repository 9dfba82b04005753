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

#ifndef FABK_TIMING_H_
#define FABK_TIMING_H_

#include <cstddef>

#include "fabk/rng.h"

namespace fabk {

// Normalized time: one round of computation (all clients in parallel) costs
// compute_time; moving all D values up and all D values down costs
// comm_time_full. Communication scales linearly in slots sent.
struct TimingConfig {
  double comm_time_full = 10.0;
  double compute_time = 1.0;
};

struct RoundTime {
  double compute = 0.0;
  double comm = 0.0;
  double total = 0.0;
};

RoundTime round_time(const TimingConfig& cfg, std::size_t comm_slots, std::size_t dim);

// Slots for a top-k style exchange: k index-value pairs up, `downlink`
// index-value pairs down.
inline std::size_t topk_slots(std::size_t k, std::size_t downlink) {
  return 2 * k + 2 * downlink;
}

// floor(k) with probability ceil(k) - k, ceil(k) otherwise.
// Requires 1 <= k <= dim.
std::size_t stochastic_round(double k, std::size_t dim, Rng& rng);

}  // namespace fabk

#endif  // FABK_TIMING_H_
