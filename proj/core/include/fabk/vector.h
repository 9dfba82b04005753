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

#ifndef FABK_VECTOR_H_
#define FABK_VECTOR_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace fabk {

// Fixed-length vector of doubles. The length is set at construction and
// never changes; element values are mutable.
class DenseVector {
 public:
  DenseVector() = default;
  explicit DenseVector(std::size_t dim, double fill = 0.0) : values_(dim, fill) {}
  explicit DenseVector(std::vector<double> values) : values_(std::move(values)) {}

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t j) const { return values_[j]; }
  double& operator[](std::size_t j) { return values_[j]; }

  std::span<const double> view() const { return values_; }
  std::span<double> mutable_view() { return values_; }
  const std::vector<double>& values() const { return values_; }

  void set_zero();
  bool all_finite() const;

  friend bool operator==(const DenseVector&, const DenseVector&) = default;

 private:
  std::vector<double> values_;
};

struct SparseEntry {
  std::uint32_t index;
  double value;

  friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};

// k-sparse view of a D-dimensional vector. Entries are kept sorted by
// strictly increasing index. Explicit zero values are allowed.
class SparseGradient {
 public:
  SparseGradient() = default;
  explicit SparseGradient(std::size_t dim) : dim_(dim) {}
  // Validates ordering and range; throws ContractViolation otherwise.
  SparseGradient(std::size_t dim, std::vector<SparseEntry> entries);

  // Builds from an arbitrary-order index list, reading values from `dense`.
  static SparseGradient gather(std::span<const double> dense,
                               std::span<const std::size_t> indices);

  std::size_t dimension() const { return dim_; }
  std::size_t nnz() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::span<const SparseEntry> entries() const { return entries_; }

  friend bool operator==(const SparseGradient&, const SparseGradient&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<SparseEntry> entries_;
};

// Indices of the k largest |v_j|, ordered by rank (largest first). Equal
// magnitudes rank the smaller index first. Requires 1 <= k <= v.size().
std::vector<std::size_t> top_k_indices(std::span<const double> v, std::size_t k);

// Rank comparator used by every top-k selection in the library.
inline bool magnitude_before(double a, std::size_t ia, double b, std::size_t ib) {
  const double ma = a < 0 ? -a : a;
  const double mb = b < 0 ? -b : b;
  return ma > mb || (ma == mb && ia < ib);
}

DenseVector sparse_to_dense(const SparseGradient& s);

// w'_j = w_j + scale * s_j on the support of s; untouched elsewhere.
DenseVector dense_axpy(const DenseVector& w, const SparseGradient& s, double scale);
void dense_axpy_inplace(DenseVector& w, const SparseGradient& s, double scale);

}  // namespace fabk

#endif  // FABK_VECTOR_H_
