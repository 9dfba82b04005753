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

#include <vector>

#include <benchmark/benchmark.h>

#include "fabk/rng.h"
#include "fabk/sparsify.h"
#include "fabk/vector.h"

namespace fabk {
namespace {

DenseVector random_vector(Rng& rng, std::size_t dim) {
  DenseVector v(dim);
  for (std::size_t j = 0; j < dim; ++j) v[j] = rng.normal();
  return v;
}

void BM_TopK(benchmark::State& state) {
  Rng rng(1);
  const auto dim = static_cast<std::size_t>(state.range(0));
  const auto v = random_vector(rng, dim);
  const std::size_t k = dim / 20;
  for (auto _ : state) benchmark::DoNotOptimize(top_k_indices(v.view(), k));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(dim));
}
BENCHMARK(BM_TopK)->Arg(2000)->Arg(20000)->Arg(400000);

void BM_FabSelect(benchmark::State& state) {
  Rng rng(2);
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t dim = 20000, k = dim / 20;
  std::vector<SparseGradient> reports;
  std::vector<double> counts(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto a = random_vector(rng, dim);
    reports.push_back(SparseGradient::gather(a.view(), top_k_indices(a.view(), k)));
  }
  for (auto _ : state) benchmark::DoNotOptimize(fab_select(reports, k, counts));
}
BENCHMARK(BM_FabSelect)->Arg(4)->Arg(20)->Arg(100);

}  // namespace
}  // namespace fabk
