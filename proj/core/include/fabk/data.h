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

#ifndef FABK_DATA_H_
#define FABK_DATA_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <span>
#include <string>
#include <vector>

#include "fabk/model.h"
#include "fabk/rng.h"

namespace fabk {

// Gaussian class clusters. Class means are seed-determined random directions
// of length `separation`; every coordinate gets N(0, noise^2) noise.
struct SynthSpec {
  std::size_t num_classes = 10;
  std::size_t dim = 20;
  std::size_t samples_per_class = 100;
  double separation = 4.0;
  double noise = 1.0;
};

std::vector<Sample> synth_classification(std::uint64_t seed, const SynthSpec& spec);
std::vector<Sample> synth_classification(std::uint64_t seed, std::size_t num_classes,
                                         std::size_t dim, std::size_t samples_per_class);
// Held-out draw from the same class means as synth_classification(seed, spec).
std::vector<Sample> synth_holdout(std::uint64_t seed, const SynthSpec& spec,
                                  std::size_t samples_per_class);

// Samples split across N clients. Every shard is nonempty.
class FederatedDataset {
 public:
  FederatedDataset() = default;
  explicit FederatedDataset(std::vector<std::vector<Sample>> shards,
                            std::vector<std::string> client_ids = {});

  std::size_t num_clients() const { return shards_.size(); }
  std::span<const Sample> shard(std::size_t i) const { return shards_.at(i); }
  std::size_t count(std::size_t i) const { return shards_.at(i).size(); }
  // Per-client sample counts C_i as reals, in client order.
  std::vector<double> counts() const;
  std::size_t total() const { return total_; }
  const std::vector<std::string>& client_ids() const { return client_ids_; }
  std::size_t feature_dim() const;
  std::size_t num_classes() const;  // 1 + max label
  std::vector<Sample> all_samples() const;

 private:
  std::vector<std::vector<Sample>> shards_;
  std::vector<std::string> client_ids_;
  std::size_t total_ = 0;
};

// Each client receives samples of exactly one class. Clients are spread as
// evenly as class sizes allow; client order is a seeded permutation.
FederatedDataset partition_one_class_per_client(std::span<const Sample> samples,
                                                std::size_t num_clients,
                                                std::uint64_t seed);

// CSV with header `client_id,label,f0,...,f{d-1}`; one shard per distinct
// client_id in order of first appearance, row order preserved.
FederatedDataset partition_by_writer_csv(const std::filesystem::path& path);
FederatedDataset parse_writer_csv(std::istream& in, const std::string& source);

// Fraction of clients whose shard spans two or more labels.
double label_skew(const FederatedDataset& data);

// Uniform sampling with replacement.
std::vector<Sample> sample_minibatch(std::span<const Sample> shard, std::size_t size,
                                     Rng& rng);

}  // namespace fabk

#endif  // FABK_DATA_H_
