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

#include "fabk/sparsify.h"

#include <algorithm>
#include <limits>
#include <string>

#include "fabk/error.h"

namespace fabk {
namespace {

constexpr std::uint32_t kUnreported = std::numeric_limits<std::uint32_t>::max();

// Report entries ordered by rank (largest magnitude first, lower index on ties).
std::vector<SparseEntry> ranked(const SparseGradient& report) {
  std::vector<SparseEntry> out(report.entries().begin(), report.entries().end());
  std::sort(out.begin(), out.end(), [](const SparseEntry& a, const SparseEntry& b) {
    return magnitude_before(a.value, a.index, b.value, b.index);
  });
  return out;
}

double total_count(std::span<const double> counts) {
  double c = 0.0;
  for (double x : counts) c += x;
  FABK_REQUIRE(c > 0.0, "total sample count must be positive");
  return c;
}

std::size_t common_dimension(std::span<const SparseGradient> reports) {
  if (reports.empty()) throw ContractViolation("selection needs at least one report");
  const std::size_t dim = reports.front().dimension();
  for (const auto& r : reports) FABK_REQUIRE(r.dimension() == dim, "report dimension mismatch");
  return dim;
}

// Fills contributed sets and b_j given the chosen index set J (sorted).
void aggregate_over(std::span<const SparseGradient> reports, std::span<const double> counts,
                    std::size_t dim, SelectionResult& out) {
  const double c_total = total_count(counts);
  std::vector<char> in_j(dim, 0);
  for (std::size_t j : out.selected) in_j[j] = 1;
  std::vector<double> sum(dim, 0.0);
  out.contributed.assign(reports.size(), {});
  for (std::size_t i = 0; i < reports.size(); ++i) {
    for (const auto& e : reports[i].entries()) {
      if (!in_j[e.index]) continue;
      sum[e.index] += counts[i] * e.value;
      out.contributed[i].push_back(e.index);
    }
  }
  std::vector<SparseEntry> b;
  b.reserve(out.selected.size());
  for (std::size_t j : out.selected) b.push_back({static_cast<std::uint32_t>(j), sum[j] / c_total});
  out.aggregate = SparseGradient(dim, std::move(b));
}

std::vector<SparseGradient> all_reports(std::span<const ClientState> clients, std::size_t k) {
  std::vector<SparseGradient> reports;
  reports.reserve(clients.size());
  for (const auto& c : clients) reports.push_back(client_report(c, k));
  return reports;
}

std::vector<double> client_counts(std::span<const ClientState> clients) {
  std::vector<double> counts;
  counts.reserve(clients.size());
  for (const auto& c : clients) counts.push_back(c.sample_count);
  return counts;
}

std::size_t max_report_size(std::span<const SparseGradient> reports) {
  std::size_t m = 0;
  for (const auto& r : reports) m = std::max(m, r.nnz());
  return m;
}

// Union of all reports, aggregated without any top-k restriction.
SelectionResult union_selection(std::span<const SparseGradient> reports,
                                std::span<const double> counts) {
  const std::size_t dim = common_dimension(reports);
  std::vector<char> seen(dim, 0);
  SelectionResult out;
  for (const auto& r : reports)
    for (const auto& e : r.entries())
      if (!seen[e.index]) {
        seen[e.index] = 1;
        out.selected.push_back(e.index);
      }
  std::sort(out.selected.begin(), out.selected.end());
  out.distinct_reported = out.selected.size();
  aggregate_over(reports, counts, dim, out);
  return out;
}

SelectionResult fub_select(std::span<const SparseGradient> reports, std::size_t k,
                           std::span<const double> counts) {
  SelectionResult all = union_selection(reports, counts);
  if (all.selected.size() <= k) return all;
  std::vector<SparseEntry> agg(all.aggregate.entries().begin(), all.aggregate.entries().end());
  std::nth_element(agg.begin(), agg.begin() + static_cast<std::ptrdiff_t>(k), agg.end(),
                   [](const SparseEntry& a, const SparseEntry& b) {
                     return magnitude_before(a.value, a.index, b.value, b.index);
                   });
  SelectionResult out;
  out.distinct_reported = all.distinct_reported;
  for (std::size_t t = 0; t < k; ++t) out.selected.push_back(agg[t].index);
  std::sort(out.selected.begin(), out.selected.end());
  aggregate_over(reports, counts, common_dimension(reports), out);
  return out;
}

// Dense aggregation of the full accumulators over `indices` (sorted).
SelectionResult dense_selection(std::span<const ClientState> clients,
                                std::vector<std::size_t> indices) {
  const std::size_t dim = clients.front().accumulator.size();
  const auto counts = client_counts(clients);
  const double c_total = total_count(counts);
  SelectionResult out;
  out.selected = std::move(indices);
  out.distinct_reported = out.selected.size();
  std::vector<SparseEntry> b;
  b.reserve(out.selected.size());
  for (std::size_t j : out.selected) {
    double s = 0.0;
    for (std::size_t i = 0; i < clients.size(); ++i) s += counts[i] * clients[i].accumulator[j];
    b.push_back({static_cast<std::uint32_t>(j), s / c_total});
  }
  out.aggregate = SparseGradient(dim, std::move(b));
  out.contributed.assign(clients.size(), out.selected);
  return out;
}

}  // namespace

std::size_t SelectionResult::min_contribution() const {
  std::size_t m = std::numeric_limits<std::size_t>::max();
  for (const auto& c : contributed) m = std::min(m, c.size());
  return contributed.empty() ? 0 : m;
}

SparseGradient client_report(const ClientState& client, std::size_t k) {
  const auto acc = client.accumulator.view();
  const auto idx = top_k_indices(acc, k);
  return SparseGradient::gather(acc, idx);
}

SparseGradient truncate_report(const SparseGradient& report, std::size_t k) {
  if (k >= report.nnz()) return report;
  auto entries = ranked(report);
  entries.resize(k);
  std::sort(entries.begin(), entries.end(),
            [](const SparseEntry& a, const SparseEntry& b) { return a.index < b.index; });
  return SparseGradient(report.dimension(), std::move(entries));
}

SelectionResult fab_select(std::span<const SparseGradient> reports, std::size_t k,
                           std::span<const double> sample_counts) {
  const std::size_t dim = common_dimension(reports);
  FABK_REQUIRE(k >= 1, "fab_select requires k >= 1");
  FABK_REQUIRE(sample_counts.size() == reports.size(), "one sample count per report required");

  // depth[j]: smallest 1-based rank at which any client reported j. The
  // union of top-kappa sets is exactly {j : depth[j] <= kappa}.
  std::vector<std::vector<SparseEntry>> by_rank;
  by_rank.reserve(reports.size());
  std::vector<std::uint32_t> depth(dim, kUnreported);
  for (const auto& r : reports) {
    by_rank.push_back(ranked(r));
    const auto& entries = by_rank.back();
    for (std::size_t pos = 0; pos < entries.size(); ++pos) {
      auto& d = depth[entries[pos].index];
      d = std::min<std::uint32_t>(d, static_cast<std::uint32_t>(pos + 1));
    }
  }
  std::vector<std::uint32_t> depths;
  for (auto d : depth)
    if (d != kUnreported) depths.push_back(d);
  std::sort(depths.begin(), depths.end());
  auto union_size = [&](std::size_t kappa) {
    return static_cast<std::size_t>(
        std::upper_bound(depths.begin(), depths.end(), kappa) - depths.begin());
  };

  SelectionResult out;
  out.distinct_reported = depths.size();
  if (union_size(k) <= k) {
    out.kappa = k;
  } else {
    // Invariant: union_size(lo) <= k < union_size(hi).
    std::size_t lo = 0, hi = k;
    while (hi - lo > 1) {
      const std::size_t mid = lo + (hi - lo) / 2;
      (union_size(mid) <= k ? lo : hi) = mid;
    }
    out.kappa = lo;
  }

  for (std::size_t j = 0; j < dim; ++j)
    if (depth[j] <= out.kappa) out.selected.push_back(j);

  if (out.selected.size() < k && out.kappa < k) {
    // Candidates enter the union at depth kappa + 1 and are scored by the
    // largest magnitude any client reported for them.
    std::vector<double> score(dim, -1.0);
    std::vector<std::size_t> candidates;
    for (const auto& entries : by_rank)
      for (const auto& e : entries) {
        if (depth[e.index] != out.kappa + 1) continue;
        const double mag = e.value < 0 ? -e.value : e.value;
        if (score[e.index] < 0.0) candidates.push_back(e.index);
        score[e.index] = std::max(score[e.index], mag);
      }
    std::sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
      return magnitude_before(score[a], a, score[b], b);
    });
    const std::size_t take = std::min(k - out.selected.size(), candidates.size());
    out.selected.insert(out.selected.end(), candidates.begin(),
                        candidates.begin() + static_cast<std::ptrdiff_t>(take));
    std::sort(out.selected.begin(), out.selected.end());
  }

  aggregate_over(reports, sample_counts, dim, out);
  return out;
}

DenseVector apply_and_reset(std::span<ClientState> clients, const SelectionResult& result,
                            double eta) {
  FABK_REQUIRE(!clients.empty(), "no clients");
  FABK_REQUIRE(result.contributed.size() == clients.size(),
               "selection result does not match client count");
  const auto& reference = clients.front().weights;
  for (std::size_t i = 1; i < clients.size(); ++i)
    if (!(clients[i].weights == reference))
      throw IntegrityError("client " + std::to_string(i) + " weights out of sync");
  for (std::size_t i = 0; i < clients.size(); ++i) {
    dense_axpy_inplace(clients[i].weights, result.aggregate, -eta);
    for (std::size_t j : result.contributed[i]) clients[i].accumulator[j] = 0.0;
  }
  return clients.front().weights;
}

std::string_view to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::kFabTopK: return "fab_topk";
    case StrategyKind::kUnidirectionalTopK: return "unidirectional_topk";
    case StrategyKind::kFubTopK: return "fub_topk";
    case StrategyKind::kPeriodicK: return "periodic_k";
    case StrategyKind::kFedAvg: return "fedavg";
    case StrategyKind::kSendAll: return "send_all";
  }
  return "unknown";
}

StrategyKind parse_strategy_kind(std::string_view name) {
  for (auto kind : {StrategyKind::kFabTopK, StrategyKind::kUnidirectionalTopK,
                    StrategyKind::kFubTopK, StrategyKind::kPeriodicK, StrategyKind::kFedAvg,
                    StrategyKind::kSendAll})
    if (to_string(kind) == name) return kind;
  throw InputError("unknown strategy kind '" + std::string(name) + "'");
}

std::size_t fedavg_period(std::size_t dim, std::size_t k) {
  FABK_REQUIRE(k >= 1, "fedavg period needs k >= 1");
  return std::max<std::size_t>(1, dim / (2 * k));
}

ExchangeOutcome exchange_round(StrategyKind kind, std::span<ClientState> clients,
                               std::size_t k, double eta, std::size_t round, Rng& rng) {
  FABK_REQUIRE(!clients.empty(), "no clients");
  const std::size_t dim = clients.front().accumulator.size();
  FABK_REQUIRE(k >= 1 && k <= dim, "k must lie in [1, D]");
  ExchangeOutcome out;

  switch (kind) {
    case StrategyKind::kFabTopK:
    case StrategyKind::kUnidirectionalTopK:
    case StrategyKind::kFubTopK: {
      out.reports = all_reports(clients, k);
      const auto counts = client_counts(clients);
      if (kind == StrategyKind::kFabTopK)
        out.selection = fab_select(out.reports, k, counts);
      else if (kind == StrategyKind::kFubTopK)
        out.selection = fub_select(out.reports, k, counts);
      else
        out.selection = union_selection(out.reports, counts);
      apply_and_reset(clients, out.selection, eta);
      out.uplink_slots = 2 * max_report_size(out.reports);
      out.downlink_slots = 2 * out.selection.selected.size();
      break;
    }
    case StrategyKind::kPeriodicK: {
      // Partial Fisher-Yates: k distinct uniform indices shared by all clients.
      std::vector<std::size_t> pool(dim);
      for (std::size_t j = 0; j < dim; ++j) pool[j] = j;
      for (std::size_t t = 0; t < k; ++t)
        std::swap(pool[t], pool[t + rng.uniform_index(dim - t)]);
      pool.resize(k);
      std::sort(pool.begin(), pool.end());
      out.selection = dense_selection(clients, std::move(pool));
      apply_and_reset(clients, out.selection, eta);
      out.uplink_slots = 2 * k;
      out.downlink_slots = 2 * k;
      break;
    }
    case StrategyKind::kSendAll: {
      std::vector<std::size_t> all(dim);
      for (std::size_t j = 0; j < dim; ++j) all[j] = j;
      out.selection = dense_selection(clients, std::move(all));
      apply_and_reset(clients, out.selection, eta);
      out.uplink_slots = dim;
      out.downlink_slots = dim;
      break;
    }
    case StrategyKind::kFedAvg: {
      // Local step on each client's own copy, then periodic C_i-weighted averaging.
      for (auto& c : clients) {
        auto w = c.weights.mutable_view();
        const auto g = c.accumulator.view();
        for (std::size_t j = 0; j < dim; ++j) w[j] = w[j] - eta * g[j];
        c.accumulator.set_zero();
      }
      out.selection.contributed.assign(clients.size(), {});
      out.aggregated = round % fedavg_period(dim, k) == 0;
      if (out.aggregated) {
        const auto counts = client_counts(clients);
        const double c_total = total_count(counts);
        DenseVector avg(dim);
        for (std::size_t i = 0; i < clients.size(); ++i)
          for (std::size_t j = 0; j < dim; ++j) avg[j] += counts[i] * clients[i].weights[j];
        for (std::size_t j = 0; j < dim; ++j) avg[j] /= c_total;
        for (auto& c : clients) c.weights = avg;
        out.uplink_slots = dim;
        out.downlink_slots = dim;
      }
      break;
    }
  }
  return out;
}

}  // namespace fabk
