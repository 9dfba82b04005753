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

#include "fabk/vector.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fabk/error.h"

namespace fabk {

void DenseVector::set_zero() { std::fill(values_.begin(), values_.end(), 0.0); }

bool DenseVector::all_finite() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](double x) { return std::isfinite(x); });
}

SparseGradient::SparseGradient(std::size_t dim, std::vector<SparseEntry> entries)
    : dim_(dim), entries_(std::move(entries)) {
  for (std::size_t t = 0; t < entries_.size(); ++t) {
    FABK_REQUIRE(entries_[t].index < dim_,
                 "sparse index " + std::to_string(entries_[t].index) +
                     " out of range for dimension " + std::to_string(dim_));
    FABK_REQUIRE(t == 0 || entries_[t - 1].index < entries_[t].index,
                 "sparse indices must be strictly increasing");
  }
}

SparseGradient SparseGradient::gather(std::span<const double> dense,
                                      std::span<const std::size_t> indices) {
  std::vector<std::size_t> sorted(indices.begin(), indices.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<SparseEntry> entries;
  entries.reserve(sorted.size());
  for (std::size_t j : sorted) {
    FABK_REQUIRE(j < dense.size(), "gather index out of range");
    entries.push_back({static_cast<std::uint32_t>(j), dense[j]});
  }
  return SparseGradient(dense.size(), std::move(entries));
}

std::vector<std::size_t> top_k_indices(std::span<const double> v, std::size_t k) {
  FABK_REQUIRE(k >= 1 && k <= v.size(),
               "top-k requires 1 <= k <= D (k=" + std::to_string(k) +
                   ", D=" + std::to_string(v.size()) + ")");
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  auto before = [&](std::size_t a, std::size_t b) {
    return magnitude_before(v[a], a, v[b], b);
  };
  if (k < idx.size()) {
    std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k),
                     idx.end(), before);
    idx.resize(k);
  }
  std::sort(idx.begin(), idx.end(), before);
  return idx;
}

DenseVector sparse_to_dense(const SparseGradient& s) {
  DenseVector out(s.dimension());
  for (const auto& e : s.entries()) out[e.index] = e.value;
  return out;
}

void dense_axpy_inplace(DenseVector& w, const SparseGradient& s, double scale) {
  FABK_REQUIRE(s.dimension() == w.size(), "dense_axpy dimension mismatch");
  for (const auto& e : s.entries()) w[e.index] = w[e.index] + scale * e.value;
}

DenseVector dense_axpy(const DenseVector& w, const SparseGradient& s, double scale) {
  DenseVector out = w;
  dense_axpy_inplace(out, s, scale);
  return out;
}

}  // namespace fabk
