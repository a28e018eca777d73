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

#include "dalab/sdl/suppression.h"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <tuple>
#include <utility>

#include "absl/status/status.h"
#include "dalab/common/integer_system.h"
#include "dalab/common/status_macros.h"
#include "fmt/format.h"

namespace dalab {
namespace {

// For each cell of 'fine', the cell of 'coarse' it falls in (-1 when outside
// the coarse table), or nullopt when 'fine' does not refine 'coarse'.
std::optional<std::vector<int>> Refinement(const TableSpec& fine,
                                           const TableSpec& coarse) {
  std::vector<int> to(fine.num_cells(), -2);
  for (size_t s = 0; s < fine.cell_map.size(); ++s) {
    const int f = fine.cell_map[s];
    const int c = coarse.cell_map[s];
    if (f < 0) {
      if (c >= 0) return std::nullopt;
      continue;
    }
    if (to[f] == -2) {
      to[f] = c;
    } else if (to[f] != c) {
      return std::nullopt;
    }
  }
  for (int& c : to) {
    if (c == -2) c = -1;
  }
  return to;
}

// Flat numbering of all cells in a table set.
struct CellIndex {
  std::vector<int> offset;

  explicit CellIndex(const PublishedTableSet& set) {
    offset.resize(set.tables.size() + 1, 0);
    for (size_t t = 0; t < set.tables.size(); ++t) {
      offset[t + 1] = offset[t] + static_cast<int>(set.tables[t].values.size());
    }
  }
  int Flat(const CellRef& c) const { return offset[c.table] + c.cell; }
  int size() const { return offset.back(); }
};

// Every published table is a marginal of one per-block histogram over the
// shared schema. Taking one record out of (block, schema cell) and adding one
// elsewhere changes the published cells by a vector that keeps every
// relation balanced; these moves are tried when a withheld cell needs a
// second feasible value.
class HistogramMoves {
 public:
  using Delta = std::vector<std::pair<int, int>>;  // (flat cell, +1 or -1)

  HistogramMoves(const PublishedTableSet& set, const GeoHierarchy& geo,
                 const CellIndex& index)
      : set_(set), geo_(geo), index_(index) {
    usable_ = !set.specs.empty();
    for (const TableSpec& spec : set.specs) {
      usable_ = usable_ && spec.schema == set.specs[0].schema &&
                static_cast<int>(spec.cell_map.size()) ==
                    spec.schema.num_cells();
    }
    if (!usable_) return;
    std::vector<std::vector<std::pair<int, int>>> at_unit(geo.size());
    for (size_t t = 0; t < set.tables.size(); ++t) {
      at_unit[set.tables[t].geounit].push_back(
          {set.tables[t].spec, static_cast<int>(t)});
    }
    chain_.resize(geo.size());
    for (int b : geo.blocks()) {
      for (int u = b; u >= 0; u = geo.unit(u).parent) {
        for (const auto& entry : at_unit[u]) chain_[b].push_back(entry);
      }
    }
    inverse_.resize(set.specs.size());
    for (size_t sp = 0; sp < set.specs.size(); ++sp) {
      inverse_[sp].resize(set.specs[sp].num_cells());
      for (size_t c = 0; c < set.specs[sp].cell_map.size(); ++c) {
        const int k = set.specs[sp].cell_map[c];
        if (k >= 0) inverse_[sp][k].push_back(static_cast<int>(c));
      }
    }
  }

  // Cheapest move that changes flat cell v, or false. Cells marked in
  // 'released' may change only when 'cost_released' is set, and each one
  // that does counts toward the cost. Cells that go down need value >= 1.
  bool Find(int v, const std::vector<int64_t>& value,
            const std::vector<char>& released, bool cost_released,
            Delta& best) const {
    if (!usable_) return false;
    const CellRef ref = RefOf(v);
    const PublishedTable& table = set_.tables[ref.table];
    std::vector<int> blocks;
    for (int b : geo_.blocks()) {
      if (geo_.IsDescendantOrSelf(b, table.geounit)) blocks.push_back(b);
    }
    const std::vector<int>& schema_cells = inverse_[table.spec][ref.cell];
    int64_t best_cost = -1;
    Delta delta;
    auto consider = [&](int b_out, int s_out, int b_in, int s_in) {
      if (!Build(b_out, s_out, b_in, s_in, delta)) return false;
      int64_t cost = 0;
      bool touches_v = false;
      for (const auto& [f, d] : delta) {
        if (f == v) touches_v = true;
        if (d < 0 && value[f] < 1) return false;
        if (released[f]) {
          if (!cost_released) return false;
          ++cost;
        }
      }
      if (!touches_v) return false;
      if (best_cost < 0 || cost < best_cost) {
        best_cost = cost;
        best = delta;
      }
      return best_cost == 0;
    };
    std::vector<std::pair<int, int>> near;
    // Records counted in v move out, then records elsewhere move in.
    for (int pass = 0; pass < 2; ++pass) {
      for (int b : blocks) {
        for (int sc : schema_cells) {
          if (pass == 0 && !Present(b, sc, value)) continue;
          Neighbors(b, sc, near);
          for (const auto& [b2, s2] : near) {
            if (pass == 0) {
              if (consider(b, sc, b2, s2)) return true;
            } else {
              if (!Present(b2, s2, value)) continue;
              if (consider(b2, s2, b, sc)) return true;
            }
          }
        }
      }
    }
    return best_cost >= 0;
  }

 private:
  CellRef RefOf(int flat) const {
    const auto it =
        std::upper_bound(index_.offset.begin(), index_.offset.end(), flat);
    const int t = static_cast<int>(it - index_.offset.begin()) - 1;
    return {t, flat - index_.offset[t]};
  }

  // Flat cells that count a record in block b with schema cell s.
  void CellsOf(int b, int s, std::vector<int>& out) const {
    out.clear();
    for (const auto& [spec, table] : chain_[b]) {
      const int k = set_.specs[spec].cell_map[s];
      if (k >= 0) out.push_back(index_.Flat({table, k}));
    }
  }

  // True when every cell counting (b, s) is at least one, so a record there
  // is consistent with the values.
  bool Present(int b, int s, const std::vector<int64_t>& value) const {
    CellsOf(b, s, scratch_);
    for (int f : scratch_) {
      if (value[f] < 1) return false;
    }
    return true;
  }

  bool Build(int b_out, int s_out, int b_in, int s_in, Delta& delta) const {
    delta.clear();
    CellsOf(b_out, s_out, scratch_);
    for (int f : scratch_) delta.push_back({f, -1});
    CellsOf(b_in, s_in, scratch_);
    for (int f : scratch_) delta.push_back({f, 1});
    std::sort(delta.begin(), delta.end());
    Delta merged;
    for (const auto& [f, d] : delta) {
      if (!merged.empty() && merged.back().first == f) {
        merged.back().second += d;
        if (merged.back().second == 0) merged.pop_back();
      } else {
        merged.push_back({f, d});
      }
    }
    delta = std::move(merged);
    return !delta.empty();
  }

  // One attribute changed in the same block, or the same record in another
  // block of the same tract.
  void Neighbors(int b, int s, std::vector<std::pair<int, int>>& out) const {
    out.clear();
    const CellSchema& schema = set_.specs[0].schema;
    const CellSchema::Attributes a = schema.Decompose(s);
    out.push_back({b, schema.Cell(1 - a.sex, a.age_level, a.race, a.ethnicity)});
    out.push_back({b, schema.Cell(a.sex, a.age_level, a.race, 1 - a.ethnicity)});
    for (int r = 0; r < schema.num_races(); ++r) {
      if (r != a.race) {
        out.push_back({b, schema.Cell(a.sex, a.age_level, r, a.ethnicity)});
      }
    }
    for (int d = -kAgeReach; d <= kAgeReach; ++d) {
      const int level = a.age_level + d;
      if (d == 0 || level < 0 || level >= schema.num_age_levels()) continue;
      out.push_back({b, schema.Cell(a.sex, level, a.race, a.ethnicity)});
    }
    const int tract = geo_.AncestorAt(b, GeoLevel::kTract);
    for (int other : geo_.blocks()) {
      if (other != b && geo_.IsDescendantOrSelf(other, tract)) {
        out.push_back({other, s});
      }
    }
  }

  static constexpr int kAgeReach = 5;

  const PublishedTableSet& set_;
  const GeoHierarchy& geo_;
  const CellIndex& index_;
  bool usable_ = false;
  // (spec, table) for every table published at a block or its ancestors.
  std::vector<std::vector<std::pair<int, int>>> chain_;
  std::vector<std::vector<std::vector<int>>> inverse_;
  mutable std::vector<int> scratch_;
};

// Relations as flat cell lists, total first.
std::vector<std::vector<int>> FlatRelations(
    const std::vector<TableRelation>& relations, const CellIndex& index) {
  std::vector<std::vector<int>> out;
  out.reserve(relations.size());
  for (const TableRelation& r : relations) {
    std::vector<int> cells = {index.Flat(r.total)};
    for (const CellRef& p : r.parts) cells.push_back(index.Flat(p));
    out.push_back(std::move(cells));
  }
  return out;
}

CellRef RefOf(const CellIndex& index, int flat) {
  const auto it =
      std::upper_bound(index.offset.begin(), index.offset.end(), flat);
  const int t = static_cast<int>(it - index.offset.begin()) - 1;
  return {t, flat - index.offset[t]};
}

struct ComponentBounds {
  VariableBounds outer;
  // A solution of the component; empty when none was found.
  std::vector<int64_t> base;
  std::vector<int64_t> wlo;
  std::vector<int64_t> whi;
};

// Looks for an integer move d with x_i changed by 'delta' such that base + d
// still satisfies every equation and bound. Depth-first repair: while some
// equation is off, change one of its variables by one unit toward balance,
// trying first the changes that leave the least total imbalance. Variables
// marked in 'costly' are tried only after the others.
class RepairSearch {
 public:
  RepairSearch(const IntegerSystem& system, const VariableBounds& outer,
               const std::vector<int64_t>& base, int64_t node_limit,
               const std::vector<char>* costly = nullptr)
      : system_(system),
        outer_(outer),
        base_(base),
        node_limit_(node_limit),
        costly_(costly),
        d_(system.num_variables(), 0),
        r_(system.num_equations(), 0) {}

  // On success fills 'moves' with (variable, change) pairs.
  bool Find(int i, int delta, int max_depth,
            std::vector<std::pair<int, int64_t>>& moves) {
    moves.clear();
    nodes_ = 0;
    touched_.clear();
    if (!Apply(i, delta)) return false;
    const bool found = Search(max_depth);
    if (found) {
      for (int v : changed_) {
        if (d_[v] != 0) moves.push_back({v, d_[v]});
      }
    }
    for (int v : changed_) d_[v] = 0;
    changed_.clear();
    for (int e : touched_) r_[e] = 0;
    touched_.clear();
    return found;
  }

 private:
  bool Apply(int v, int delta) {
    const int64_t x = base_[v] + d_[v] + delta;
    if (x < outer_.lo[v] || x > outer_.hi[v]) return false;
    if (d_[v] == 0) changed_.push_back(v);
    d_[v] += delta;
    const std::vector<int>& eqs = system_.equations_of(v);
    const std::vector<int>& cs = system_.coeffs_of(v);
    for (size_t k = 0; k < eqs.size(); ++k) {
      r_[eqs[k]] += cs[k] * delta;
      touched_.push_back(eqs[k]);
    }
    return true;
  }

  void Undo(int v, int delta) {
    d_[v] -= delta;
    const std::vector<int>& eqs = system_.equations_of(v);
    const std::vector<int>& cs = system_.coeffs_of(v);
    for (size_t k = 0; k < eqs.size(); ++k) r_[eqs[k]] -= cs[k] * delta;
  }

  int64_t Imbalance(int v, int delta) const {
    int64_t change = 0;
    const std::vector<int>& eqs = system_.equations_of(v);
    const std::vector<int>& cs = system_.coeffs_of(v);
    for (size_t k = 0; k < eqs.size(); ++k) {
      const int64_t now = r_[eqs[k]];
      const int64_t next = now + cs[k] * delta;
      change += (next < 0 ? -next : next) - (now < 0 ? -now : now);
    }
    return change;
  }

  bool Search(int depth) {
    if (++nodes_ > node_limit_) return false;
    // The shortest off equation; ties go to the most recent.
    int best_e = -1;
    for (size_t t = touched_.size(); t-- > 0;) {
      const int e = touched_[t];
      if (r_[e] == 0) continue;
      if (best_e < 0 ||
          system_.equation(e).size() < system_.equation(best_e).size()) {
        best_e = e;
      }
    }
    if (best_e < 0) return true;
    if (depth == 0) return false;
    // (costly, imbalance, signed variable code)
    std::vector<std::tuple<int, int64_t, int>> best_moves;
    const std::vector<int>& ev = system_.equation(best_e);
    for (size_t k = 0; k < ev.size(); ++k) {
      const int v = ev[k];
      const int delta =
          (r_[best_e] > 0 ? -1 : 1) * system_.coeff(best_e, static_cast<int>(k));
      // Never reverse an earlier change.
      if (d_[v] * delta < 0) continue;
      const int64_t x = base_[v] + d_[v] + delta;
      if (x < outer_.lo[v] || x > outer_.hi[v]) continue;
      const int cost = costly_ != nullptr && (*costly_)[v] ? 1 : 0;
      best_moves.push_back(
          {cost, Imbalance(v, delta), delta > 0 ? v + 1 : -(v + 1)});
    }
    std::sort(best_moves.begin(), best_moves.end());
    size_t width = std::min<size_t>(best_moves.size(), 3);
    if (width > 0 && std::get<0>(best_moves[width - 1]) == 0) {
      // Keep the best costly move in reach.
      for (size_t m = width; m < best_moves.size(); ++m) {
        if (std::get<0>(best_moves[m]) == 1) {
          std::swap(best_moves[width], best_moves[m]);
          ++width;
          break;
        }
      }
    }
    for (size_t m = 0; m < width; ++m) {
      const int code = std::get<2>(best_moves[m]);
      const int v = code > 0 ? code - 1 : -code - 1;
      const int delta = code > 0 ? 1 : -1;
      const size_t touched_mark = touched_.size();
      const size_t changed_mark = changed_.size();
      Apply(v, delta);
      if (Search(depth - 1)) return true;
      Undo(v, delta);
      touched_.resize(touched_mark);
      changed_.resize(changed_mark);
      if (nodes_ > node_limit_) return false;
    }
    return false;
  }

  const IntegerSystem& system_;
  const VariableBounds& outer_;
  const std::vector<int64_t>& base_;
  int64_t node_limit_;
  const std::vector<char>* costly_;
  int64_t nodes_ = 0;
  std::vector<int64_t> d_;
  std::vector<int64_t> r_;
  std::vector<int> touched_;
  std::vector<int> changed_;
};

// Outer bounds by propagation, then witnesses. Small components get exact
// bounds by full searches; large ones only need two distinct witnesses per
// variable, found by local moves around a first solution.
absl::Status AuditComponent(const IntegerSystem& system,
                            const std::vector<int64_t>& candidate,
                            const AttackOptions& options,
                            const std::string& where, ComponentBounds& out) {
  constexpr int64_t kInf = IntegerSystem::kUnbounded;
  const int m = system.num_variables();
  out.outer = InitialBounds(system);
  out.wlo.assign(m, std::numeric_limits<int64_t>::max());
  out.whi.assign(m, std::numeric_limits<int64_t>::min());
  if (!PropagateBounds(system, out.outer)) {
    return absl::FailedPreconditionError(
        fmt::format("released cells around {} are inconsistent", where));
  }
  VariableBounds& outer = out.outer;
  auto record = [&](const std::vector<int64_t>& values) {
    for (int i = 0; i < m; ++i) {
      out.wlo[i] = std::min(out.wlo[i], values[i]);
      out.whi[i] = std::max(out.whi[i], values[i]);
    }
  };

  // The stored values under withheld cells only seed the search; they are
  // used after checking that they satisfy every equation.
  std::vector<int64_t> base;
  if (system.Satisfies(candidate)) {
    base = candidate;
  } else {
    SolveOptions o;
    o.node_limit = options.node_limit;
    const SolveResult any = FindSolution(system, o);
    if (any.outcome == SearchOutcome::kInfeasible) {
      return absl::FailedPreconditionError(
          fmt::format("released cells around {} admit no solution", where));
    }
    if (any.outcome == SearchOutcome::kNodeLimit) return absl::OkStatus();
    base = any.values;
  }
  record(base);
  out.base = base;
  const bool small = m <= options.exact_component_limit;
  RepairSearch repair(system, outer, base, options.node_limit);
  std::vector<std::pair<int, int64_t>> moves;
  for (int i = 0; i < m; ++i) {
    for (int dir = 0; dir < 2; ++dir) {
      while (true) {
        if (!small && out.whi[i] > out.wlo[i]) break;
        int64_t lo = outer.lo[i];
        int64_t hi = outer.hi[i];
        if (dir == 0) {
          if (out.whi[i] >= hi) break;
          lo = out.whi[i] + 1;
        } else {
          if (out.wlo[i] <= lo) break;
          hi = out.wlo[i] - 1;
        }
        bool found = false;
        if (small) {
          VariableBounds restrict = outer;
          restrict.lo[i] = lo;
          restrict.hi[i] = hi;
          SolveOptions o;
          o.node_limit = options.node_limit;
          o.hint = base;
          o.restrict_to = &restrict;
          const SolveResult r = FindSolution(system, o);
          if (r.outcome == SearchOutcome::kInfeasible) {
            if (dir == 0) {
              outer.hi[i] = out.whi[i];
            } else {
              outer.lo[i] = out.wlo[i];
            }
          }
          if (r.outcome == SearchOutcome::kFound) {
            record(r.values);
            found = true;
          }
        } else if (repair.Find(i, dir == 0 ? 1 : -1, options.repair_depth,
                               moves)) {
          for (const auto& [v, change] : moves) {
            out.wlo[v] = std::min(out.wlo[v], base[v] + change);
            out.whi[v] = std::max(out.whi[v], base[v] + change);
          }
          found = true;
        }
        if (!found) break;
        if (dir == 0 && outer.hi[i] >= kInf) break;
      }
    }
  }
  return absl::OkStatus();
}

}  // namespace

std::vector<TableRelation> TableRelations(const PublishedTableSet& set,
                                          const GeoHierarchy& hierarchy) {
  std::map<std::pair<int, int>, int> lookup;  // (spec, geounit) -> table
  std::vector<std::vector<int>> by_unit(hierarchy.size());
  for (size_t t = 0; t < set.tables.size(); ++t) {
    lookup[{set.tables[t].spec, set.tables[t].geounit}] = static_cast<int>(t);
    by_unit[set.tables[t].geounit].push_back(static_cast<int>(t));
  }
  std::vector<TableRelation> out;

  for (size_t t = 0; t < set.tables.size(); ++t) {
    const PublishedTable& parent = set.tables[t];
    const std::vector<int>& children = hierarchy.unit(parent.geounit).children;
    if (children.empty()) continue;
    std::vector<int> child_tables;
    for (int c : children) {
      auto it = lookup.find({parent.spec, c});
      if (it == lookup.end()) break;
      child_tables.push_back(it->second);
    }
    if (child_tables.size() != children.size()) continue;
    for (int k = 0; k < static_cast<int>(parent.values.size()); ++k) {
      TableRelation r{{static_cast<int>(t), k}, {}};
      for (int ct : child_tables) r.parts.push_back({ct, k});
      out.push_back(std::move(r));
    }
  }

  const int num_specs = static_cast<int>(set.specs.size());
  std::vector<std::vector<std::optional<std::vector<int>>>> refine(num_specs);
  for (int a = 0; a < num_specs; ++a) {
    refine[a].resize(num_specs);
    for (int b = 0; b < num_specs; ++b) {
      if (a != b) refine[a][b] = Refinement(set.specs[a], set.specs[b]);
    }
  }
  for (int u = 0; u < hierarchy.size(); ++u) {
    for (int ta : by_unit[u]) {
      for (int tb : by_unit[u]) {
        const PublishedTable& fine = set.tables[ta];
        const PublishedTable& coarse = set.tables[tb];
        const auto& map = refine[fine.spec][coarse.spec];
        if (ta == tb || !map.has_value()) continue;
        std::vector<TableRelation> rel(coarse.values.size());
        for (int k = 0; k < static_cast<int>(coarse.values.size()); ++k) {
          rel[k].total = {tb, k};
        }
        for (int j = 0; j < static_cast<int>(map->size()); ++j) {
          if ((*map)[j] >= 0) rel[(*map)[j]].parts.push_back({ta, j});
        }
        for (TableRelation& r : rel) {
          if (!r.parts.empty()) out.push_back(std::move(r));
        }
      }
    }
  }
  return out;
}

absl::Status SuppressionConfig::Validate() const {
  if (threshold < 1) {
    return absl::InvalidArgumentError(
        fmt::format("suppression threshold must be at least 1, got {}",
                    threshold));
  }
  if (node_limit < 1 || max_rounds < 0) {
    return absl::InvalidArgumentError("suppression search limits must be positive");
  }
  return absl::OkStatus();
}

absl::StatusOr<std::vector<CellInterval>> SubtractionAttack(
    const PublishedTableSet& tables, const GeoHierarchy& hierarchy,
    const AttackOptions& options) {
  const CellIndex index(tables);
  const std::vector<std::vector<int>> relations =
      FlatRelations(TableRelations(tables, hierarchy), index);

  std::vector<int> var_of(index.size(), -1);
  std::vector<CellRef> cells;
  for (int t = 0; t < static_cast<int>(tables.tables.size()); ++t) {
    for (int k = 0; k < static_cast<int>(tables.tables[t].values.size()); ++k) {
      if (tables.tables[t].IsSuppressed(k)) {
        var_of[index.Flat({t, k})] = static_cast<int>(cells.size());
        cells.push_back({t, k});
      }
    }
  }
  const int n = static_cast<int>(cells.size());
  auto value_of = [&](int flat) {
    const CellRef c = RefOf(index, flat);
    return tables.tables[c.table].values[c.cell];
  };

  // Each relation becomes sum(sign * var) = rhs over withheld cells.
  struct Row {
    std::vector<int> vars;
    std::vector<int> coeffs;
    int64_t rhs = 0;
  };
  std::vector<Row> rows;
  for (const std::vector<int>& rel : relations) {
    Row row;
    for (size_t i = 0; i < rel.size(); ++i) {
      const int sign = i == 0 ? 1 : -1;
      const int v = var_of[rel[i]];
      if (v >= 0) {
        row.vars.push_back(v);
        row.coeffs.push_back(sign);
      } else {
        row.rhs -= sign * value_of(rel[i]);
      }
    }
    if (row.vars.empty()) {
      if (row.rhs != 0) {
        const CellRef c = RefOf(index, rel[0]);
        return absl::FailedPreconditionError(fmt::format(
            "released cells of table '{}' at '{}' do not add up",
            tables.specs[tables.tables[c.table].spec].name,
            hierarchy.unit(tables.tables[c.table].geounit).code));
      }
      continue;
    }
    rows.push_back(std::move(row));
  }

  // Connected components of withheld cells.
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const Row& row : rows) {
    for (size_t i = 1; i < row.vars.size(); ++i) {
      parent[find(row.vars[i])] = find(row.vars[0]);
    }
  }
  std::vector<std::vector<int>> members(n);
  std::vector<std::vector<int>> comp_rows(n);
  for (int v = 0; v < n; ++v) members[find(v)].push_back(v);
  for (int r = 0; r < static_cast<int>(rows.size()); ++r) {
    comp_rows[find(rows[r].vars[0])].push_back(r);
  }

  std::vector<CellInterval> out(n);
  std::vector<int> local(n, -1);
  // Released values, then one solution for the withheld cells.
  std::vector<int64_t> value(index.size(), 0);
  std::vector<char> released(index.size(), 1);
  std::vector<char> has_base(n, 0);
  for (int f = 0; f < index.size(); ++f) {
    if (var_of[f] >= 0) {
      released[f] = 0;
    } else {
      value[f] = value_of(f);
    }
  }
  for (int root = 0; root < n; ++root) {
    const std::vector<int>& vars = members[root];
    if (vars.empty()) continue;
    IntegerSystem system;
    std::vector<int64_t> stored;
    for (size_t i = 0; i < vars.size(); ++i) {
      local[vars[i]] = static_cast<int>(i);
      system.AddVariable();
      const CellRef c = cells[vars[i]];
      stored.push_back(tables.tables[c.table].values[c.cell]);
    }
    for (int r : comp_rows[root]) {
      std::vector<int> lv;
      for (int v : rows[r].vars) lv.push_back(local[v]);
      system.AddSignedEquation(std::move(lv), rows[r].coeffs, rows[r].rhs);
    }
    const CellRef first = cells[vars[0]];
    const std::string where = fmt::format(
        "table '{}' at '{}'",
        tables.specs[tables.tables[first.table].spec].name,
        hierarchy.unit(tables.tables[first.table].geounit).code);
    ComponentBounds bounds;
    RETURN_IF_ERROR(AuditComponent(system, stored, options, where, bounds));
    for (size_t i = 0; i < vars.size(); ++i) {
      CellInterval& c = out[vars[i]];
      c.cell = cells[vars[i]];
      c.lo = bounds.outer.lo[i];
      c.hi = bounds.outer.hi[i];
      c.witnessed_lo = bounds.wlo[i];
      c.witnessed_hi = bounds.whi[i];
      if (!bounds.base.empty()) {
        has_base[vars[i]] = 1;
        value[index.Flat(c.cell)] = bounds.base[i];
      }
    }
  }

  // Cells still showing a single value: try moving one record.
  const HistogramMoves histogram(tables, hierarchy, index);
  HistogramMoves::Delta delta;
  for (int v = 0; v < n; ++v) {
    CellInterval& c = out[v];
    if (!has_base[v] || c.protected_cell() || c.disclosed()) continue;
    if (!histogram.Find(index.Flat(c.cell), value, released, false, delta)) {
      continue;
    }
    bool usable = true;
    for (const auto& [f, d] : delta) usable = usable && has_base[var_of[f]];
    if (!usable) continue;
    for (const auto& [f, d] : delta) {
      CellInterval& moved = out[var_of[f]];
      moved.witnessed_lo = std::min(moved.witnessed_lo, value[f] + d);
      moved.witnessed_hi = std::max(moved.witnessed_hi, value[f] + d);
    }
  }
  return out;
}

absl::StatusOr<SuppressionResult> SuppressTables(
    const PublishedTableSet& tables, const GeoHierarchy& hierarchy,
    const SuppressionConfig& config) {
  if (absl::Status s = config.Validate(); !s.ok()) return s;
  SuppressionResult result;
  result.tables = tables;
  PublishedTableSet& set = result.tables;
  for (PublishedTable& t : set.tables) {
    if (t.households.size() != t.values.size()) {
      return absl::InvalidArgumentError(fmt::format(
          "table '{}' at '{}' has no household counts",
          set.specs[t.spec].name, hierarchy.unit(t.geounit).code));
    }
    t.suppressed.assign(t.values.size(), 0);
    for (size_t k = 0; k < t.values.size(); ++k) {
      if (t.households[k] > 0 && t.households[k] < config.threshold) {
        t.suppressed[k] = 1;
        ++result.primary;
      }
    }
  }
  if (!config.complementary) return result;

  const CellIndex index(set);
  const std::vector<std::vector<int>> relations =
      FlatRelations(TableRelations(set, hierarchy), index);
  std::vector<std::vector<int>> relations_of(index.size());
  for (int r = 0; r < static_cast<int>(relations.size()); ++r) {
    for (int f : relations[r]) relations_of[f].push_back(r);
  }
  std::vector<int64_t> value(index.size());
  std::vector<char> released(index.size());
  for (int f = 0; f < index.size(); ++f) {
    const CellRef c = RefOf(index, f);
    value[f] = set.tables[c.table].values[c.cell];
    released[f] = set.tables[c.table].IsSuppressed(c.cell) ? 0 : 1;
  }
  auto suppress = [&](int f) {
    const CellRef c = RefOf(index, f);
    set.tables[c.table].suppressed[c.cell] = 1;
    released[f] = 0;
    ++result.complementary;
  };

  // Greedy pass: a relation with exactly one withheld cell gives it away by
  // subtraction, so withhold its smallest released cell, nonzero first.
  std::vector<int> queue(relations.size());
  std::iota(queue.begin(), queue.end(), 0);
  while (!queue.empty()) {
    const int r = queue.back();
    queue.pop_back();
    int withheld = 0;
    int best = -1;
    for (int f : relations[r]) {
      if (!released[f]) {
        ++withheld;
        continue;
      }
      auto key = [&](int g) { return std::make_pair(value[g] == 0, value[g]); };
      if (best < 0 || key(f) < key(best)) best = f;
    }
    if (withheld != 1 || best < 0) continue;
    suppress(best);
    for (int r2 : relations_of[best]) queue.push_back(r2);
  }

  // Audit and repair: for each withheld cell the audit cannot move, find a
  // balancing cycle through it over all cells, preferring withheld ones, and
  // withhold the released cells the cycle uses.
  IntegerSystem full;
  for (int f = 0; f < index.size(); ++f) full.AddVariable();
  for (const std::vector<int>& rel : relations) {
    std::vector<int> coeffs(rel.size(), -1);
    coeffs[0] = 1;
    full.AddSignedEquation(rel, std::move(coeffs), 0);
  }
  VariableBounds open = InitialBounds(full);
  const HistogramMoves histogram(set, hierarchy, index);
  HistogramMoves::Delta delta;
  AttackOptions attack;
  attack.node_limit = config.node_limit;
  for (int round = 0; round < config.max_rounds; ++round) {
    ++result.audit_rounds;
    ASSIGN_OR_RETURN(std::vector<CellInterval> intervals,
                     SubtractionAttack(set, hierarchy, attack));
    RepairSearch cycles(full, open, value, config.node_limit, &released);
    std::vector<std::pair<int, int64_t>> moves;
    std::vector<char> moved(index.size(), 0);
    bool added = false;
    for (const CellInterval& c : intervals) {
      const int f = index.Flat(c.cell);
      if (c.protected_cell() || moved[f]) continue;
      bool found = histogram.Find(f, value, released, true, delta);
      if (found) {
        moves.assign(delta.begin(), delta.end());
      } else {
        for (int d : {1, -1}) {
          found = cycles.Find(f, d, 2 * attack.repair_depth, moves);
          if (found) break;
        }
      }
      if (!found) continue;
      for (const auto& [g, change] : moves) {
        moved[g] = 1;
        if (released[g]) {
          suppress(g);
          added = true;
        }
      }
    }
    if (!added) break;
  }
  return result;
}

}  // namespace dalab
