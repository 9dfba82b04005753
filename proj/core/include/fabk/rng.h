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

#ifndef FABK_RNG_H_
#define FABK_RNG_H_

#include <array>
#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace fabk {

// xoshiro256** seeded through SplitMix64. All sampling routines are
// implemented here rather than through <random> distributions, whose output
// is implementation-defined, so a seed yields the same stream everywhere.
class Rng {
 public:
  static constexpr std::string_view kAlgorithm = "xoshiro256**";

  explicit Rng(std::uint64_t seed = 0);

  // Independent stream keyed by (seed, tags...). Used to give every client,
  // round, and purpose its own stream.
  static Rng derive(std::uint64_t seed, std::initializer_list<std::uint64_t> tags);

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64();
  // Uniform on [0, 1) with 53 bits of precision.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, n). Requires n > 0.
  std::uint64_t uniform_index(std::uint64_t n);
  double normal();
  bool bernoulli(double p) { return uniform() < p; }

  template <typename It>
  void shuffle(It first, It last) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
      const auto j = uniform_index(i);
      using std::swap;
      swap(first[i - 1], first[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> s_{};
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Stream tags, kept in one place so streams never collide by accident.
enum class Stream : std::uint64_t {
  kData = 1,
  kTestData = 2,
  kPartition = 3,
  kInit = 4,
  kMinibatch = 5,
  kRounding = 6,
  kProbe = 7,
  kStrategy = 8,
  kController = 9,
  kRegret = 10,
};

inline std::uint64_t tag(Stream s) { return static_cast<std::uint64_t>(s); }

}  // namespace fabk

#endif  // FABK_RNG_H_
