//
// Copyright 2026 The DALab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "dalab/topdown/rounding.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "fmt/format.h"

namespace dalab {
namespace {

using Cost = __int128;

constexpr double kSnap = 1e-9;
// Rounding-up cost is round((1 - 2 frac) * 2^34) * 2^40 + flat index: the
// L1 change first, the index only among equal L1 changes.
constexpr double kFracScale = 17179869184.0;  // 2^34
constexpr Cost kIndexScale = Cost{1} << 40;
// Dominates any achievable sum of rounding costs.
constexpr Cost kBig = Cost{1} << 100;

struct Entry {
  int64_t floor;
  bool fractional;
  Cost up_cost;
};

Entry Classify(double v, int64_t index) {
  const double nearest = std::round(v);
  if (std::abs(v - nearest) <= kSnap) {
    return {static_cast<int64_t>(nearest), false, 0};
  }
  const double fl = std::floor(v);
  const double frac = v - fl;
  const Cost q = static_cast<Cost>(std::llround((1.0 - 2.0 * frac) * kFracScale));
  return {static_cast<int64_t>(fl), true, q * kIndexScale + index};
}

class MinCostFlow {
 public:
  explicit MinCostFlow(int nodes) : graph_(nodes) {}

  void AddEdge(int from, int to, int64_t cap, Cost cost) {
    graph_[from].push_back({to, cap, cost, static_cast<int>(graph_[to].size())});
    graph_[to].push_back(
        {from, 0, -cost, static_cast<int>(graph_[from].size()) - 1});
  }

  // Successive shortest paths; returns the flow pushed (at most 'limit').
  int64_t Run(int source, int sink, int64_t limit) {
    const int n = graph_.size();
    std::vector<Cost> potential(n, 0);
    // Initial potentials by Bellman-Ford (the initial graph is acyclic).
    {
      std::vector<Cost> dist(n, kInf);
      dist[source] = 0;
      for (int round = 0; round < n; ++round) {
        bool changed = false;
        for (int u = 0; u < n; ++u) {
          if (dist[u] == kInf) continue;
          for (const Edge& e : graph_[u]) {
            if (e.cap > 0 && dist[u] + e.cost < dist[e.to]) {
              dist[e.to] = dist[u] + e.cost;
              changed = true;
            }
          }
        }
        if (!changed) break;
      }
      for (int u = 0; u < n; ++u) potential[u] = dist[u] == kInf ? 0 : dist[u];
    }
    int64_t flow = 0;
    std::vector<Cost> dist(n);
    std::vector<int> prev_node(n), prev_edge(n);
    using Item = std::pair<Cost, int>;
    while (flow < limit) {
      std::fill(dist.begin(), dist.end(), kInf);
      dist[source] = 0;
      std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
      heap.push({0, source});
      while (!heap.empty()) {
        const auto [d, u] = heap.top();
        heap.pop();
        if (d != dist[u]) continue;
        for (int k = 0; k < static_cast<int>(graph_[u].size()); ++k) {
          const Edge& e = graph_[u][k];
          if (e.cap <= 0) continue;
          const Cost nd = d + e.cost + potential[u] - potential[e.to];
          if (nd < dist[e.to]) {
            dist[e.to] = nd;
            prev_node[e.to] = u;
            prev_edge[e.to] = k;
            heap.push({nd, e.to});
          }
        }
      }
      if (dist[sink] == kInf) break;
      for (int u = 0; u < n; ++u) {
        if (dist[u] != kInf) potential[u] += dist[u];
      }
      int64_t push = limit - flow;
      for (int v = sink; v != source; v = prev_node[v]) {
        push = std::min(push, graph_[prev_node[v]][prev_edge[v]].cap);
      }
      for (int v = sink; v != source; v = prev_node[v]) {
        Edge& e = graph_[prev_node[v]][prev_edge[v]];
        e.cap -= push;
        graph_[v][e.rev].cap += push;
      }
      flow += push;
    }
    return flow;
  }

  struct Edge {
    int to;
    int64_t cap;
    Cost cost;
    int rev;
  };
  const std::vector<Edge>& edges(int node) const { return graph_[node]; }

 private:
  static constexpr Cost kInf = std::numeric_limits<Cost>::max() / 4;
  std::vector<std::vector<Edge>> graph_;
};

absl::Status NoRounding(int row) {
  return absl::InternalError(
      fmt::format("no integer rounding meets the bounds of row {}", row));
}

}  // namespace

std::pair<int64_t, int64_t> RoundingRowBounds(double sum,
                                              const RowConstraint& constraint) {
  if (constraint.kind == RowConstraint::Kind::kEqual) {
    const int64_t v = std::llround(constraint.value);
    return {v, v};
  }
  int64_t lo = static_cast<int64_t>(std::floor(sum + kSnap));
  int64_t hi = static_cast<int64_t>(std::ceil(sum - kSnap));
  if (hi < lo) hi = lo;
  if (constraint.kind == RowConstraint::Kind::kAtLeast) {
    const int64_t bound = static_cast<int64_t>(std::ceil(constraint.value - kSnap));
    lo = std::max(lo, bound);
    hi = std::max(hi, bound);
  }
  lo = std::max<int64_t>(lo, 0);
  hi = std::max<int64_t>(hi, 0);
  return {lo, hi};
}

absl::StatusOr<std::vector<int64_t>> ControlledRound(
    const std::vector<double>& x, int rows, int cols,
    const std::vector<int64_t>& column_totals,
    const std::vector<int64_t>& row_lo, const std::vector<int64_t>& row_hi) {
  if (x.size() != static_cast<size_t>(rows) * cols ||
      row_lo.size() != static_cast<size_t>(rows) ||
      row_hi.size() != static_cast<size_t>(rows) ||
      (!column_totals.empty() && column_totals.size() != static_cast<size_t>(cols))) {
    return absl::InvalidArgumentError("rounding inputs have inconsistent sizes");
  }
  std::vector<Entry> entries(x.size());
  std::vector<int64_t> out(x.size());
  std::vector<int64_t> row_floor(rows, 0);
  std::vector<int64_t> col_floor(cols, 0);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int64_t idx = static_cast<int64_t>(r) * cols + c;
      if (x[idx] < -kSnap) {
        return absl::InternalError(
            fmt::format("cannot round negative value {} at ({}, {})", x[idx], r, c));
      }
      entries[idx] = Classify(std::max(0.0, x[idx]), idx);
      out[idx] = entries[idx].floor;
      row_floor[r] += entries[idx].floor;
      col_floor[c] += entries[idx].floor;
    }
  }

  if (column_totals.empty()) {
    // Rows are independent: take the cheapest fractional cells.
    for (int r = 0; r < rows; ++r) {
      std::vector<int64_t> frac;
      for (int c = 0; c < cols; ++c) {
        const int64_t idx = static_cast<int64_t>(r) * cols + c;
        if (entries[idx].fractional) frac.push_back(idx);
      }
      std::sort(frac.begin(), frac.end(), [&](int64_t a, int64_t b) {
        return entries[a].up_cost < entries[b].up_cost;
      });
      const int64_t need = std::max<int64_t>(0, row_lo[r] - row_floor[r]);
      const int64_t room = row_hi[r] - row_floor[r];
      if (room < need || need > static_cast<int64_t>(frac.size())) {
        return NoRounding(r);
      }
      for (int64_t k = 0; k < static_cast<int64_t>(frac.size()); ++k) {
        if (k >= room || (k >= need && entries[frac[k]].up_cost >= 0)) break;
        ++out[frac[k]];
      }
    }
    return out;
  }

  // Source -> column (units left after flooring) -> row (one unit per
  // fractional cell) -> sink (lower part at -kBig, then the slack).
  const int source = 0;
  const int sink = 1;
  MinCostFlow flow(2 + cols + rows);
  int64_t required = 0;
  for (int c = 0; c < cols; ++c) {
    const int64_t units = column_totals[c] - col_floor[c];
    if (units < 0) {
      return absl::InternalError(
          fmt::format("column {} floors exceed its total {}", c, column_totals[c]));
    }
    if (units > 0) flow.AddEdge(source, 2 + c, units, 0);
    required += units;
  }
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int64_t idx = static_cast<int64_t>(r) * cols + c;
      if (!entries[idx].fractional) continue;
      flow.AddEdge(2 + c, 2 + cols + r, 1, entries[idx].up_cost);
    }
  }
  std::vector<int64_t> must(rows);
  for (int r = 0; r < rows; ++r) {
    must[r] = std::max<int64_t>(0, row_lo[r] - row_floor[r]);
    const int64_t room = row_hi[r] - row_floor[r];
    if (room < must[r]) return NoRounding(r);
    if (must[r] > 0) flow.AddEdge(2 + cols + r, sink, must[r], -kBig);
    if (room > must[r]) flow.AddEdge(2 + cols + r, sink, room - must[r], 0);
  }
  if (flow.Run(source, sink, required) != required) {
    return absl::InternalError("no integer rounding meets the column totals");
  }
  for (int r = 0; r < rows; ++r) {
    for (const auto& e : flow.edges(2 + cols + r)) {
      if (e.to == sink && e.cost == -kBig && e.cap > 0) return NoRounding(r);
    }
  }
  // A used cell edge has no residual capacity left.
  for (int c = 0; c < cols; ++c) {
    for (const auto& e : flow.edges(2 + c)) {
      if (e.to < 2 + cols || e.cap != 0) continue;
      const int r = e.to - 2 - cols;
      ++out[static_cast<int64_t>(r) * cols + c];
    }
  }
  return out;
}

}  // namespace dalab
