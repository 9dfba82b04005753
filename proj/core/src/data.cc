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

#include "fabk/data.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string_view>
#include <unordered_map>

#include "fabk/error.h"

namespace fabk {
namespace {

std::vector<std::vector<double>> class_means(std::uint64_t seed, const SynthSpec& spec) {
  Rng rng = Rng::derive(seed, {tag(Stream::kData), 0});
  std::vector<std::vector<double>> means(spec.num_classes, std::vector<double>(spec.dim));
  for (auto& mu : means) {
    double norm = 0.0;
    for (double& x : mu) {
      x = rng.normal();
      norm += x * x;
    }
    norm = std::sqrt(norm);
    for (double& x : mu) x *= spec.separation / norm;
  }
  return means;
}

std::vector<Sample> draw(const std::vector<std::vector<double>>& means,
                         const SynthSpec& spec, std::size_t per_class, Rng& rng) {
  std::vector<Sample> out;
  out.reserve(means.size() * per_class);
  for (std::size_t c = 0; c < means.size(); ++c) {
    for (std::size_t t = 0; t < per_class; ++t) {
      Sample s{std::vector<double>(spec.dim), static_cast<int>(c)};
      for (std::size_t d = 0; d < spec.dim; ++d) s.features[d] = means[c][d] + spec.noise * rng.normal();
      out.push_back(std::move(s));
    }
  }
  return out;
}

void check_spec(const SynthSpec& spec) {
  FABK_REQUIRE(spec.num_classes > 0 && spec.dim > 0 && spec.samples_per_class > 0,
               "synthetic dataset counts must be positive");
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return cells;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

[[noreturn]] void csv_error(const std::string& source, std::size_t line, const std::string& what) {
  throw InputError(source + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

std::vector<Sample> synth_classification(std::uint64_t seed, const SynthSpec& spec) {
  check_spec(spec);
  Rng rng = Rng::derive(seed, {tag(Stream::kData), 1});
  return draw(class_means(seed, spec), spec, spec.samples_per_class, rng);
}

std::vector<Sample> synth_classification(std::uint64_t seed, std::size_t num_classes,
                                         std::size_t dim, std::size_t samples_per_class) {
  SynthSpec spec;
  spec.num_classes = num_classes;
  spec.dim = dim;
  spec.samples_per_class = samples_per_class;
  return synth_classification(seed, spec);
}

std::vector<Sample> synth_holdout(std::uint64_t seed, const SynthSpec& spec,
                                  std::size_t samples_per_class) {
  check_spec(spec);
  FABK_REQUIRE(samples_per_class > 0, "holdout size must be positive");
  Rng rng = Rng::derive(seed, {tag(Stream::kTestData)});
  return draw(class_means(seed, spec), spec, samples_per_class, rng);
}

FederatedDataset::FederatedDataset(std::vector<std::vector<Sample>> shards,
                                   std::vector<std::string> client_ids)
    : shards_(std::move(shards)), client_ids_(std::move(client_ids)) {
  if (shards_.empty()) throw InputError("federated dataset has no clients");
  if (client_ids_.empty()) {
    for (std::size_t i = 0; i < shards_.size(); ++i) client_ids_.push_back(std::to_string(i));
  }
  FABK_REQUIRE(client_ids_.size() == shards_.size(), "client id count mismatch");
  const std::size_t dim = shards_.front().empty() ? 0 : shards_.front().front().features.size();
  for (std::size_t i = 0; i < shards_.size(); ++i) {
    if (shards_[i].empty()) throw InputError("client " + client_ids_[i] + " has no samples");
    for (const auto& s : shards_[i])
      if (s.features.size() != dim) throw InputError("inconsistent feature dimension");
    total_ += shards_[i].size();
  }
}

std::vector<double> FederatedDataset::counts() const {
  std::vector<double> c;
  c.reserve(shards_.size());
  for (const auto& s : shards_) c.push_back(static_cast<double>(s.size()));
  return c;
}

std::size_t FederatedDataset::feature_dim() const {
  return shards_.empty() ? 0 : shards_.front().front().features.size();
}

std::size_t FederatedDataset::num_classes() const {
  int max_label = -1;
  for (const auto& shard : shards_)
    for (const auto& s : shard) max_label = std::max(max_label, s.label);
  return static_cast<std::size_t>(max_label + 1);
}

std::vector<Sample> FederatedDataset::all_samples() const {
  std::vector<Sample> out;
  out.reserve(total_);
  for (const auto& shard : shards_) out.insert(out.end(), shard.begin(), shard.end());
  return out;
}

FederatedDataset partition_one_class_per_client(std::span<const Sample> samples,
                                                std::size_t num_clients,
                                                std::uint64_t seed) {
  if (num_clients == 0) throw InputError("need at least one client");
  if (num_clients > samples.size())
    throw InputError("more clients (" + std::to_string(num_clients) + ") than samples (" +
                     std::to_string(samples.size()) + ")");
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t t = 0; t < samples.size(); ++t) by_class[samples[t].label].push_back(t);
  const std::size_t classes = by_class.size();
  if (num_clients < classes)
    throw InputError("one-class partitioning needs at least as many clients (" +
                     std::to_string(num_clients) + ") as classes (" +
                     std::to_string(classes) + ")");

  Rng rng = Rng::derive(seed, {tag(Stream::kPartition)});
  std::vector<int> labels;
  std::vector<std::size_t> capacity, quota;
  for (const auto& [label, idx] : by_class) {
    labels.push_back(label);
    capacity.push_back(idx.size());
  }
  // Even split, remainder to a seeded class order, then move any overflow
  // (class smaller than its quota) onto classes with spare samples.
  quota.assign(classes, num_clients / classes);
  std::vector<std::size_t> order(classes);
  for (std::size_t c = 0; c < classes; ++c) order[c] = c;
  rng.shuffle(order.begin(), order.end());
  for (std::size_t r = 0; r < num_clients % classes; ++r) ++quota[order[r]];
  std::size_t overflow = 0;
  for (std::size_t c = 0; c < classes; ++c) {
    if (quota[c] > capacity[c]) {
      overflow += quota[c] - capacity[c];
      quota[c] = capacity[c];
    }
  }
  for (std::size_t r = 0; overflow > 0; r = (r + 1) % classes) {
    const std::size_t c = order[r];
    if (quota[c] < capacity[c]) {
      ++quota[c];
      --overflow;
    }
  }

  std::vector<int> client_class;
  for (std::size_t c = 0; c < classes; ++c)
    client_class.insert(client_class.end(), quota[c], static_cast<int>(c));
  rng.shuffle(client_class.begin(), client_class.end());

  // Within each class, shuffle samples then deal contiguous even blocks.
  std::vector<std::vector<std::size_t>> class_clients(classes);
  for (std::size_t i = 0; i < num_clients; ++i) class_clients[client_class[i]].push_back(i);
  std::vector<std::vector<Sample>> shards(num_clients);
  std::size_t c = 0;
  for (auto& [label, idx] : by_class) {
    rng.shuffle(idx.begin(), idx.end());
    const auto& owners = class_clients[c];
    const std::size_t n = owners.size();
    for (std::size_t o = 0; o < n; ++o) {
      const std::size_t begin = idx.size() * o / n;
      const std::size_t end = idx.size() * (o + 1) / n;
      for (std::size_t t = begin; t < end; ++t) shards[owners[o]].push_back(samples[idx[t]]);
    }
    ++c;
  }
  return FederatedDataset(std::move(shards));
}

FederatedDataset parse_writer_csv(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) csv_error(source, 1, "empty file (expected header)");
  ++line_no;
  const auto header = split_csv(trim(line));
  if (header.size() < 3 || trim(header[0]) != "client_id" || trim(header[1]) != "label")
    csv_error(source, line_no, "header must be client_id,label,f0,...");
  const std::size_t dim = header.size() - 2;
  for (std::size_t d = 0; d < dim; ++d)
    if (trim(header[d + 2]) != "f" + std::to_string(d))
      csv_error(source, line_no, "expected column f" + std::to_string(d));

  std::vector<std::vector<Sample>> shards;
  std::vector<std::string> ids;
  std::unordered_map<std::string, std::size_t> slot;
  while (std::getline(in, line)) {
    ++line_no;
    const auto row = trim(line);
    if (row.empty()) continue;
    const auto cells = split_csv(row);
    if (cells.size() != dim + 2)
      csv_error(source, line_no, "expected " + std::to_string(dim + 2) + " fields, found " +
                                     std::to_string(cells.size()));
    const std::string id(trim(cells[0]));
    if (id.empty()) csv_error(source, line_no, "empty client_id");
    Sample s{std::vector<double>(dim), 0};
    const auto label_cell = trim(cells[1]);
    auto [lp, lec] = std::from_chars(label_cell.data(), label_cell.data() + label_cell.size(), s.label);
    if (lec != std::errc() || lp != label_cell.data() + label_cell.size() || s.label < 0)
      csv_error(source, line_no, "bad label '" + std::string(label_cell) + "'");
    for (std::size_t d = 0; d < dim; ++d) {
      const std::string cell(trim(cells[d + 2]));
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (cell.empty() || used != cell.size() || !std::isfinite(v))
        csv_error(source, line_no, "bad feature value '" + cell + "' in column f" + std::to_string(d));
      s.features[d] = v;
    }
    auto [it, inserted] = slot.try_emplace(id, shards.size());
    if (inserted) {
      shards.emplace_back();
      ids.push_back(id);
    }
    shards[it->second].push_back(std::move(s));
  }
  if (shards.empty()) csv_error(source, line_no, "no data rows");
  return FederatedDataset(std::move(shards), std::move(ids));
}

FederatedDataset partition_by_writer_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open dataset " + path.string());
  return parse_writer_csv(in, path.string());
}

double label_skew(const FederatedDataset& data) {
  std::size_t mixed = 0;
  for (std::size_t i = 0; i < data.num_clients(); ++i) {
    std::set<int> labels;
    for (const auto& s : data.shard(i)) labels.insert(s.label);
    if (labels.size() >= 2) ++mixed;
  }
  return static_cast<double>(mixed) / static_cast<double>(data.num_clients());
}

std::vector<Sample> sample_minibatch(std::span<const Sample> shard, std::size_t size,
                                     Rng& rng) {
  FABK_REQUIRE(!shard.empty() && size > 0, "minibatch needs a nonempty shard and size");
  std::vector<Sample> batch;
  batch.reserve(size);
  for (std::size_t t = 0; t < size; ++t) batch.push_back(shard[rng.uniform_index(shard.size())]);
  return batch;
}

}  // namespace fabk
