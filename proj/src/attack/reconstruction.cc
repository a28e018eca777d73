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

#include "dalab/attack/reconstruction.h"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <tuple>
#include <utility>

#include "absl/status/status.h"
#include "dalab/common/status_macros.h"
#include "dalab/geo/age.h"
#include "fmt/format.h"

namespace dalab {
namespace {

CellSchema ProfileSchemaFor(const CellSchema& schema) {
  const AgeGranularity g = schema.age_granularity();
  if (g == AgeGranularity::kSingleYear || g == AgeGranularity::kAgeBin) {
    return CellSchema(AgeGranularity::kAgeBin, schema.num_races());
  }
  return schema;
}

int ProfileOf(const CellSchema& schema, const CellSchema& profile, int cell) {
  const CellSchema::Attributes a = schema.Decompose(cell);
  return profile.Cell(a.sex, profile.AgeLevel(schema.AgeLevelLow(a.age_level)),
                      a.race, a.ethnicity);
}

// Connected groups of table cells and profiles: a table cell is linked to
// every profile one of its schema cells falls in. Each group yields one
// equation, sum of table cells = sum of profile counts.
struct CellGroup {
  std::vector<int> cells;
  std::vector<int> profiles;
};

std::vector<CellGroup> GroupsOf(const TableSpec& spec,
                                const CellSchema& profile) {
  const int k = spec.num_cells();
  const int np = profile.num_cells();
  std::vector<int> parent(k + np);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  // A profile split between published and unpublished schema cells cannot
  // be equated to any sum of published cells.
  std::vector<char> inside(np, 0), outside(np, 0);
  for (int c = 0; c < spec.schema.num_cells(); ++c) {
    const int p = ProfileOf(spec.schema, profile, c);
    if (spec.cell_map[c] < 0) {
      outside[p] = 1;
      continue;
    }
    inside[p] = 1;
    parent[find(spec.cell_map[c])] = find(k + p);
  }
  std::map<int, CellGroup> by_root;
  for (int i = 0; i < k; ++i) by_root[find(i)].cells.push_back(i);
  for (int p = 0; p < np; ++p) {
    if (inside[p]) by_root[find(k + p)].profiles.push_back(p);
  }
  std::vector<int> tainted;
  for (int p = 0; p < np; ++p) {
    if (inside[p] && outside[p]) tainted.push_back(find(k + p));
  }
  std::vector<CellGroup> groups;
  for (auto& [root, group] : by_root) {
    if (group.cells.empty() || group.profiles.empty()) continue;
    if (std::find(tainted.begin(), tainted.end(), root) != tainted.end()) {
      continue;
    }
    groups.push_back(std::move(group));
  }
  return groups;
}

// Gaussian elimination modulo a large prime, ignoring bounds and
// integrality. A system with no rational solution has none modulo almost
// every prime, so this catches tables whose margins disagree before any
// search is spent on them.
bool LinearlyConsistent(const IntegerSystem& system) {
  constexpr uint64_t kPrime = (uint64_t{1} << 61) - 1;
  auto mul = [](uint64_t a, uint64_t b) {
    return static_cast<uint64_t>(static_cast<unsigned __int128>(a) * b %
                                 kPrime);
  };
  auto inverse = [&](uint64_t a) {
    uint64_t result = 1;
    for (uint64_t e = kPrime - 2; e > 0; e >>= 1, a = mul(a, a)) {
      if (e & 1) result = mul(result, a);
    }
    return result;
  };
  const int n = system.num_variables();
  const int m = system.num_equations();
  std::vector<std::vector<uint64_t>> rows(m, std::vector<uint64_t>(n + 1, 0));
  for (int e = 0; e < m; ++e) {
    const std::vector<int>& vars = system.equation(e);
    for (size_t i = 0; i < vars.size(); ++i) {
      rows[e][vars[i]] = system.coeff(e, static_cast<int>(i)) > 0 ? 1
                                                                  : kPrime - 1;
    }
    rows[e][n] = static_cast<uint64_t>(system.rhs(e)) % kPrime;
  }
  int rank = 0;
  for (int col = 0; col < n && rank < m; ++col) {
    int pivot = rank;
    while (pivot < m && rows[pivot][col] == 0) ++pivot;
    if (pivot == m) continue;
    std::swap(rows[rank], rows[pivot]);
    const uint64_t inv = inverse(rows[rank][col]);
    for (int j = col; j <= n; ++j) rows[rank][j] = mul(rows[rank][j], inv);
    for (int r = rank + 1; r < m; ++r) {
      const uint64_t f = rows[r][col];
      if (f == 0) continue;
      for (int j = col; j <= n; ++j) {
        rows[r][j] = (rows[r][j] + kPrime - mul(f, rows[rank][j])) % kPrime;
      }
    }
    ++rank;
  }
  for (int r = rank; r < m; ++r) {
    if (rows[r][n] != 0) return false;
  }
  return true;
}

class Builder {
 public:
  static absl::StatusOr<Builder> Create(const PublishedTableSet& tables,
                                        const GeoHierarchy& hierarchy) {
    if (tables.specs.empty()) {
      return absl::InvalidArgumentError("no table specs to reconstruct from");
    }
    const CellSchema schema = tables.specs[0].schema;
    for (const TableSpec& spec : tables.specs) {
      if (!(spec.schema == schema)) {
        return absl::InvalidArgumentError(fmt::format(
            "table {} uses a different cell schema", spec.name));
      }
    }
    Builder b(tables, hierarchy, schema);
    for (const TableSpec& spec : tables.specs) {
      b.groups_.push_back(GroupsOf(spec, b.profile_));
    }
    b.by_unit_.resize(hierarchy.size());
    for (int t = 0; t < static_cast<int>(tables.tables.size()); ++t) {
      const int u = tables.tables[t].geounit;
      if (u < 0 || u >= hierarchy.size()) {
        return absl::InvalidArgumentError("table geounit out of range");
      }
      b.by_unit_[u].push_back(t);
    }
    return b;
  }

  const CellSchema& schema() const { return schema_; }
  const CellSchema& profile() const { return profile_; }
  const TableSpec& spec(int s) const { return tables_.specs[s]; }

  // Equations from every table published at 'units' over the profiles of
  // 'blocks'. Profiles forced to zero are dropped. With 'derived', the
  // difference equations below are added as well.
  absl::StatusOr<ProfileSystem> Build(const std::vector<int>& blocks,
                                      const std::vector<int>& units,
                                      bool derived = true) const {
    const int np = profile_.num_cells();
    const int nb = static_cast<int>(blocks.size());
    std::vector<std::vector<int>> eqs;
    std::vector<int64_t> rhs_of;
    std::vector<int> family;  // the table an equation came from
    for (int u : units) {
      std::vector<int> under;
      for (int i = 0; i < nb; ++i) {
        if (hierarchy_.IsDescendantOrSelf(blocks[i], u)) under.push_back(i);
      }
      for (int t : by_unit_[u]) {
        const PublishedTable& table = tables_.tables[t];
        for (const CellGroup& g : groups_[table.spec]) {
          int64_t rhs = 0;
          bool withheld = false;
          for (int c : g.cells) {
            if (table.IsSuppressed(c)) withheld = true;
            rhs += table.values[c];
          }
          if (withheld) continue;
          if (rhs < 0) {
            return absl::FailedPreconditionError(fmt::format(
                "negative published count in {} at {}",
                tables_.specs[table.spec].name, hierarchy_.unit(u).code));
          }
          std::vector<int> vars;
          vars.reserve(under.size() * g.profiles.size());
          for (int i : under) {
            for (int p : g.profiles) vars.push_back(i * np + p);
          }
          std::sort(vars.begin(), vars.end());
          eqs.push_back(std::move(vars));
          rhs_of.push_back(rhs);
          family.push_back(t);
        }
      }
    }
    IntegerSystem full;
    for (int i = 0; i < nb * np; ++i) full.AddVariable();
    for (size_t e = 0; e < eqs.size(); ++e) full.AddEquation(eqs[e], rhs_of[e]);
    if (derived) AddDifferences(eqs, rhs_of, family, nb * np, full);
    VariableBounds bounds = InitialBounds(full);
    if (!PropagateBounds(full, bounds)) {
      return absl::FailedPreconditionError("published tables are infeasible");
    }
    ProfileSystem out;
    std::vector<int> index(nb * np, -1);
    for (int v = 0; v < nb * np; ++v) {
      if (bounds.hi[v] == 0) continue;
      index[v] = out.system.AddVariable(bounds.hi[v]);
      out.variables.emplace_back(blocks[v / np], v % np);
    }
    for (int e = 0; e < full.num_equations(); ++e) {
      std::vector<int> vars;
      for (int v : full.equation(e)) {
        if (index[v] >= 0) vars.push_back(index[v]);
      }
      if (!vars.empty()) out.system.AddEquation(std::move(vars), full.rhs(e));
    }
    return out;
  }

  // The cells of one table at one unit are disjoint. Where some of them lie
  // inside an equation of another table, the rest of that equation has a
  // known sum. Bounds propagation treats equations one at a time and misses
  // these, which leaves the search to rediscover them by backtracking.
  static void AddDifferences(const std::vector<std::vector<int>>& eqs,
                             const std::vector<int64_t>& rhs,
                             const std::vector<int>& family, int num_vars,
                             IntegerSystem& system) {
    std::vector<char> covered(num_vars, 0);
    std::vector<std::vector<int>> eqs_of(num_vars);
    for (size_t e = 0; e < eqs.size(); ++e) {
      for (int v : eqs[e]) eqs_of[v].push_back(static_cast<int>(e));
    }
    std::set<std::vector<int>> seen(eqs.begin(), eqs.end());
    std::vector<int> hits(eqs.size(), 0);
    for (size_t a = 0; a < eqs.size(); ++a) {
      // b lies inside a when every one of its variables is hit from a.
      std::vector<int> touched;
      for (int v : eqs[a]) {
        for (int b : eqs_of[v]) {
          if (hits[b]++ == 0) touched.push_back(b);
        }
      }
      std::map<int, std::vector<size_t>> inside;
      for (int b : touched) {
        if (family[b] != family[a] && eqs[b].size() < eqs[a].size() &&
            hits[b] == static_cast<int>(eqs[b].size())) {
          inside[family[b]].push_back(b);
        }
        hits[b] = 0;
      }
      for (const auto& [f, members] : inside) {
        int64_t rest = rhs[a];
        for (size_t b : members) {
          rest -= rhs[b];
          for (int v : eqs[b]) covered[v] = 1;
        }
        std::vector<int> vars;
        for (int v : eqs[a]) {
          if (!covered[v]) vars.push_back(v);
        }
        for (size_t b : members) {
          for (int v : eqs[b]) covered[v] = 0;
        }
        if (vars.empty() || !seen.insert(vars).second) continue;
        system.AddEquation(std::move(vars), rest);
      }
    }
  }

  // Units of the subtree below 'root' down to the blocks, root included.
  std::vector<int> SubtreeUnits(int root) const {
    std::vector<int> units = {root};
    for (size_t i = 0; i < units.size(); ++i) {
      for (int c : hierarchy_.unit(units[i]).children) units.push_back(c);
    }
    return units;
  }

  // Spec whose cells are exactly the schema cells, if any; the source of
  // single-year ages.
  int DetailSpec() const {
    if (schema_.age_granularity() != AgeGranularity::kSingleYear) return -1;
    for (int s = 0; s < static_cast<int>(tables_.specs.size()); ++s) {
      const TableSpec& spec = tables_.specs[s];
      if (spec.num_cells() != schema_.num_cells()) continue;
      std::vector<char> seen(spec.num_cells(), 0);
      bool injective = true;
      for (int k : spec.cell_map) {
        if (k < 0 || seen[k]) {
          injective = false;
          break;
        }
        seen[k] = 1;
      }
      if (injective) return s;
    }
    return -1;
  }

  const PublishedTable* TableAt(int unit, int spec) const {
    for (int t : by_unit_[unit]) {
      if (tables_.tables[t].spec == spec) return &tables_.tables[t];
    }
    return nullptr;
  }

 private:
  Builder(const PublishedTableSet& tables, const GeoHierarchy& hierarchy,
          const CellSchema& schema)
      : tables_(tables),
        hierarchy_(hierarchy),
        schema_(schema),
        profile_(ProfileSchemaFor(schema)) {}

  const PublishedTableSet& tables_;
  const GeoHierarchy& hierarchy_;
  CellSchema schema_;
  CellSchema profile_;
  std::vector<std::vector<CellGroup>> groups_;
  std::vector<std::vector<int>> by_unit_;
};

// Distributes published single-year ages over reconstructed records.
class AgePools {
 public:
  AgePools(const Builder& builder, const GeoHierarchy& hierarchy)
      : builder_(builder),
        hierarchy_(hierarchy),
        spec_(builder.DetailSpec()) {}

  int Next(int block, int profile) {
    const CellSchema& pschema = builder_.profile();
    const int fallback =
        pschema.AgeLevelLow(pschema.Decompose(profile).age_level);
    if (spec_ < 0) return fallback;
    const int source = SourceOf(block);
    if (source < 0) return fallback;
    auto& pool = pools_[source][profile];
    while (!pool.empty() && pool.back().second == 0) pool.pop_back();
    if (pool.empty()) return fallback;
    --pool.back().second;
    return pool.back().first;
  }

 private:
  int SourceOf(int block) {
    for (int u = hierarchy_.unit(block).parent; u >= 0;
         u = hierarchy_.unit(u).parent) {
      const PublishedTable* table = builder_.TableAt(u, spec_);
      if (table == nullptr) continue;
      if (!pools_.contains(u)) Fill(u, *table);
      return u;
    }
    return -1;
  }

  void Fill(int unit, const PublishedTable& table) {
    const CellSchema& schema = builder_.schema();
    const std::vector<int>& map = builder_.spec(spec_).cell_map;
    auto& pools = pools_[unit];
    // Stored oldest first so that pop_back hands out ascending ages.
    for (int c = schema.num_cells() - 1; c >= 0; --c) {
      const int k = map[c];
      if (table.IsSuppressed(k) || table.values[k] <= 0) continue;
      const int p = ProfileOf(schema, builder_.profile(), c);
      pools[p].emplace_back(schema.AgeLevelLow(schema.Decompose(c).age_level),
                            table.values[k]);
    }
  }

  const Builder& builder_;
  const GeoHierarchy& hierarchy_;
  int spec_;
  std::map<int, std::map<int, std::vector<std::pair<int, int64_t>>>> pools_;
};

}  // namespace

absl::StatusOr<ProfileSystem> BlockProfileSystem(const PublishedTableSet& tables,
                                                 const GeoHierarchy& hierarchy,
                                                 int block) {
  if (block < 0 || block >= hierarchy.size() ||
      hierarchy.unit(block).level != GeoLevel::kBlock) {
    return absl::InvalidArgumentError("not a block");
  }
  ASSIGN_OR_RETURN(Builder builder, Builder::Create(tables, hierarchy));
  return builder.Build({block}, {block});
}

absl::StatusOr<Reconstruction> Reconstruct(const PublishedTableSet& tables,
                                           const GeoHierarchy& hierarchy,
                                           const ReconstructionConfig& config) {
  ASSIGN_OR_RETURN(Builder builder, Builder::Create(tables, hierarchy));
  Reconstruction out;
  out.profile_schema = builder.profile();

  // Profile counts per block, keyed by unit index.
  std::map<int, std::map<int, int64_t>> counts;
  std::map<int, BlockReconstruction> info;
  auto take = [&](const ProfileSystem& ps, const std::vector<int64_t>& values) {
    for (int v = 0; v < static_cast<int>(values.size()); ++v) {
      if (values[v] > 0) {
        counts[ps.variables[v].first][ps.variables[v].second] += values[v];
      }
    }
  };

  for (int tract : hierarchy.AtLevel(GeoLevel::kTract)) {
    const std::vector<int> units = builder.SubtreeUnits(tract);
    std::vector<int> blocks;
    for (int u : units) {
      if (hierarchy.unit(u).level == GeoLevel::kBlock) blocks.push_back(u);
    }
    bool joint = false;
    absl::StatusOr<ProfileSystem> system = builder.Build(blocks, units, /*derived=*/false);
    if (system.ok() && LinearlyConsistent(system->system)) {
      SolveOptions options;
      options.node_limit = config.joint_node_limit;
      const SolveResult r = FindSolution(system->system, options);
      if (r.outcome == SearchOutcome::kFound) {
        take(*system, r.values);
        joint = true;
      }
    }
    for (int b : blocks) {
      info[b].block = b;
      info[b].joint = joint;
      if (joint) continue;
      absl::StatusOr<ProfileSystem> own = builder.Build({b}, {b});
      SolveResult r;
      if (own.ok() && LinearlyConsistent(own->system)) {
        SolveOptions options;
        options.node_limit = config.block_node_limit;
        r = FindSolution(own->system, options);
      }
      if (!own.ok() || r.outcome == SearchOutcome::kInfeasible) {
        return absl::FailedPreconditionError(fmt::format(
            "published tables for block {} admit no solution",
            hierarchy.unit(b).code));
      }
      if (r.outcome == SearchOutcome::kNodeLimit) {
        return absl::ResourceExhaustedError(fmt::format(
            "no solution for block {} within {} nodes",
            hierarchy.unit(b).code, config.block_node_limit));
      }
      take(*own, r.values);
    }
  }

  AgePools ages(builder, hierarchy);
  int64_t next_id = 0;
  for (int b : hierarchy.blocks()) {
    BlockReconstruction& bi = info[b];
    bi.block = b;
    if (config.count_node_limit > 0) {
      absl::StatusOr<ProfileSystem> own = builder.Build({b}, {b});
      if (own.ok()) {
        const CountResult c =
            CountSolutions(own->system, config.count_node_limit);
        bi.count_complete = c.complete;
        bi.feasible_count = c.count;
      }
    }
    for (const auto& [p, n] : counts[b]) {
      const CellSchema::Attributes a = builder.profile().Decompose(p);
      for (int64_t j = 0; j < n; ++j) {
        PersonRecord r;
        r.person_id = fmt::format("R{:07d}", next_id++);
        r.household_id = r.person_id;
        r.block = b;
        r.sex = a.sex;
        r.age = ages.Next(b, p);
        r.race = a.race;
        r.ethnicity = a.ethnicity;
        out.persons.push_back(std::move(r));
      }
      bi.persons += n;
    }
    out.blocks.push_back(bi);
  }
  return out;
}

int BlockSizeBin(int64_t persons) {
  static constexpr int64_t kUpper[kNumBlockSizeBins - 1] = {9,   49,  99,
                                                            249, 499, 999};
  for (int i = 0; i < kNumBlockSizeBins - 1; ++i) {
    if (persons <= kUpper[i]) return i;
  }
  return kNumBlockSizeBins - 1;
}

std::string BlockSizeBinLabel(int bin) {
  static constexpr const char* kLabels[kNumBlockSizeBins] = {
      "1-9", "10-49", "50-99", "100-249", "250-499", "500-999", "1000+"};
  return kLabels[bin];
}

double AgreementReport::Rate(int bin) const {
  return persons[bin] == 0 ? 0.0
                           : static_cast<double>(matched[bin]) /
                                 static_cast<double>(persons[bin]);
}

double AgreementReport::OverallRate() const {
  return total_persons == 0 ? 0.0
                            : static_cast<double>(total_matched) /
                                  static_cast<double>(total_persons);
}

AgreementReport AgreementRate(const std::vector<PersonRecord>& reconstructed,
                              const Population& truth) {
  using Key = std::tuple<int, int, int, int, int>;
  auto key = [](const PersonRecord& p) {
    return Key{p.block, p.sex, AgeBinOf(p.age), p.race, p.ethnicity};
  };
  std::map<Key, int64_t> recon;
  for (const PersonRecord& p : reconstructed) ++recon[key(p)];
  std::map<Key, int64_t> actual;
  std::map<int, int64_t> block_size;
  for (const PersonRecord& p : truth.persons) {
    ++actual[key(p)];
    ++block_size[p.block];
  }
  AgreementReport report;
  report.persons.assign(kNumBlockSizeBins, 0);
  report.matched.assign(kNumBlockSizeBins, 0);
  for (const auto& [k, n] : actual) {
    const int bin = BlockSizeBin(block_size[std::get<0>(k)]);
    auto it = recon.find(k);
    const int64_t m = it == recon.end() ? 0 : std::min(n, it->second);
    report.persons[bin] += n;
    report.matched[bin] += m;
    report.total_persons += n;
    report.total_matched += m;
  }
  return report;
}

std::string FormatAgreement(const AgreementReport& report) {
  std::string out = "bin,persons,matched,agreement\n";
  for (int b = 0; b < kNumBlockSizeBins; ++b) {
    out += fmt::format("{},{},{},{:.6f}\n", BlockSizeBinLabel(b),
                       report.persons[b], report.matched[b], report.Rate(b));
  }
  out += fmt::format("all,{},{},{:.6f}\n", report.total_persons,
                     report.total_matched, report.OverallRate());
  return out;
}

}  // namespace dalab
