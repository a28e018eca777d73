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

#include "dalab/tabulation/tables.h"

#include <algorithm>
#include <map>
#include <unordered_map>

#include "dalab/common/csv.h"
#include "dalab/common/status_macros.h"
#include "dalab/common/strings.h"
#include "dalab/geo/age.h"
#include "fmt/format.h"

namespace dalab {

bool TableSpec::PublishedAt(GeoLevel level) const {
  return std::find(levels.begin(), levels.end(), level) != levels.end();
}

absl::StatusOr<TableSpec> MarginalTable(const CellSchema& schema,
                                        std::string name, bool keep_sex,
                                        AgeAxis age, bool keep_race,
                                        bool keep_ethnicity,
                                        std::vector<GeoLevel> levels,
                                        int min_age) {
  const AgeGranularity g = schema.age_granularity();
  const bool too_coarse =
      (age == AgeAxis::kExact && g != AgeGranularity::kSingleYear) ||
      (age == AgeAxis::kAgeBin && g > AgeGranularity::kAgeBin) ||
      (age == AgeAxis::kVotingAge && g > AgeGranularity::kVotingAge) ||
      (min_age > 0 && g == AgeGranularity::kNone);
  if (too_coarse) {
    return absl::InvalidArgumentError(fmt::format(
        "table '{}' needs finer ages than schema '{}'", name,
        AgeGranularityName(g)));
  }
  // Table age resolution as a schema, used for level mapping and labels.
  const CellSchema age_view(
      age == AgeAxis::kExact     ? AgeGranularity::kSingleYear
      : age == AgeAxis::kAgeBin  ? AgeGranularity::kAgeBin
      : age == AgeAxis::kVotingAge ? AgeGranularity::kVotingAge
                                 : AgeGranularity::kNone,
      1);
  TableSpec spec;
  spec.name = std::move(name);
  spec.schema = schema;
  spec.levels = std::move(levels);
  spec.cell_map.assign(schema.num_cells(), -1);
  std::map<std::vector<int>, int> index;
  std::vector<std::vector<int>> keys;
  for (int cell = 0; cell < schema.num_cells(); ++cell) {
    const CellSchema::Attributes a = schema.Decompose(cell);
    const int low = schema.AgeLevelLow(a.age_level);
    if (low < min_age) {
      if (schema.AgeLevelHigh(a.age_level) >= min_age) {
        return absl::InvalidArgumentError(fmt::format(
            "table '{}': age cut {} splits a schema age level", spec.name,
            min_age));
      }
      continue;
    }
    std::vector<int> key = {keep_sex ? a.sex : -1,
                            age == AgeAxis::kDrop ? -1 : age_view.AgeLevel(low),
                            keep_race ? a.race : -1,
                            keep_ethnicity ? a.ethnicity : -1};
    auto [it, inserted] = index.emplace(key, 0);
    if (inserted) keys.push_back(key);
    spec.cell_map[cell] = 0;  // fixed below once keys are ordered
  }
  std::sort(keys.begin(), keys.end());
  for (size_t i = 0; i < keys.size(); ++i) index[keys[i]] = static_cast<int>(i);
  for (int cell = 0; cell < schema.num_cells(); ++cell) {
    if (spec.cell_map[cell] < 0) continue;
    const CellSchema::Attributes a = schema.Decompose(cell);
    std::vector<int> key = {
        keep_sex ? a.sex : -1,
        age == AgeAxis::kDrop ? -1
                              : age_view.AgeLevel(schema.AgeLevelLow(a.age_level)),
        keep_race ? a.race : -1, keep_ethnicity ? a.ethnicity : -1};
    spec.cell_map[cell] = index[key];
  }
  for (const std::vector<int>& key : keys) {
    std::vector<std::string> parts;
    if (key[0] >= 0) parts.push_back(fmt::format("sex={}", key[0]));
    if (key[1] >= 0) parts.push_back("age=" + age_view.AgeLevelLabel(key[1]));
    if (key[2] >= 0) parts.push_back(fmt::format("race={}", key[2]));
    if (key[3] >= 0) parts.push_back(fmt::format("eth={}", key[3]));
    if (parts.empty()) parts.push_back(min_age > 0 ? fmt::format("age>={}", min_age)
                                                   : std::string("total"));
    spec.labels.push_back(Join(parts, ";"));
  }
  return spec;
}

absl::StatusOr<std::vector<TableSpec>> DefaultTableSpecs(
    const CellSchema& schema) {
  const std::vector<GeoLevel> all = {GeoLevel::kNation, GeoLevel::kState,
                                     GeoLevel::kCounty, GeoLevel::kTract,
                                     GeoLevel::kBlockGroup, GeoLevel::kBlock};
  const std::vector<GeoLevel> tract_up = {GeoLevel::kNation, GeoLevel::kState,
                                          GeoLevel::kCounty, GeoLevel::kTract};
  std::vector<TableSpec> specs;
  ASSIGN_OR_RETURN(TableSpec t1, MarginalTable(schema, "T1", false, AgeAxis::kDrop,
                                               false, false, all));
  ASSIGN_OR_RETURN(TableSpec t2,
                   MarginalTable(schema, "T2", false, AgeAxis::kDrop, false,
                                 false, all, kVotingAge));
  ASSIGN_OR_RETURN(TableSpec t3, MarginalTable(schema, "T3", false, AgeAxis::kDrop,
                                               true, true, all));
  ASSIGN_OR_RETURN(TableSpec t4, MarginalTable(schema, "T4", true, AgeAxis::kAgeBin,
                                               false, false, all));
  ASSIGN_OR_RETURN(TableSpec t5, MarginalTable(schema, "T5", true, AgeAxis::kExact,
                                               true, true, tract_up));
  specs.push_back(std::move(t1));
  specs.push_back(std::move(t2));
  specs.push_back(std::move(t3));
  specs.push_back(std::move(t4));
  specs.push_back(std::move(t5));
  return specs;
}

absl::StatusOr<PublishedTable> ApplyTable(const CellHistogram& histogram,
                                          const CellSchema& schema,
                                          const TableSpec& spec) {
  if (!(schema == spec.schema) ||
      static_cast<int>(histogram.counts.size()) != schema.num_cells()) {
    return absl::InvalidArgumentError(
        fmt::format("table '{}' does not match the histogram schema", spec.name));
  }
  PublishedTable t;
  t.geounit = histogram.geounit;
  t.values.assign(spec.num_cells(), 0);
  for (int cell = 0; cell < schema.num_cells(); ++cell) {
    const int target = spec.cell_map[cell];
    if (target >= 0) t.values[target] += histogram.counts[cell];
  }
  return t;
}

absl::StatusOr<PublishedTableSet> PublishTables(const Population& population,
                                                std::vector<TableSpec> specs) {
  if (specs.empty()) return PublishedTableSet{};
  const CellSchema& schema = specs.front().schema;
  for (const TableSpec& s : specs) {
    if (!(s.schema == schema)) {
      return absl::InvalidArgumentError("table specs use different schemas");
    }
  }
  for (const PersonRecord& p : population.persons) {
    if (p.race >= schema.num_races()) {
      return absl::OutOfRangeError(fmt::format(
          "person '{}' race {} outside the schema", p.person_id, p.race));
    }
  }
  const GeoHierarchy& geo = population.hierarchy;
  const std::vector<CellHistogram> hist =
      TabulateAll(population.persons, geo, schema);

  PublishedTableSet set;
  set.specs = std::move(specs);
  // slot[spec][unit] -> table index, or -1.
  std::vector<std::vector<int>> slot(set.specs.size(),
                                     std::vector<int>(geo.size(), -1));
  std::vector<int> units(geo.size());
  for (int u = 0; u < geo.size(); ++u) units[u] = u;
  std::sort(units.begin(), units.end(), [&](int a, int b) {
    return geo.unit(a).code < geo.unit(b).code;
  });
  std::vector<int> spec_order(set.specs.size());
  for (size_t s = 0; s < spec_order.size(); ++s) spec_order[s] = static_cast<int>(s);
  std::sort(spec_order.begin(), spec_order.end(), [&](int a, int b) {
    return set.specs[a].name < set.specs[b].name;
  });
  for (int u : units) {
    for (int s : spec_order) {
      const TableSpec& spec = set.specs[s];
      if (!spec.PublishedAt(geo.unit(u).level)) continue;
      ASSIGN_OR_RETURN(PublishedTable t, ApplyTable(hist[u], schema, spec));
      t.spec = s;
      t.households.assign(spec.num_cells(), 0);
      slot[s][u] = static_cast<int>(set.tables.size());
      set.tables.push_back(std::move(t));
    }
  }
  // Household metadata: each household counts once per distinct table cell
  // it touches, in its block and every ancestor.
  std::vector<int> cells;
  for (const Household& h : population.households) {
    for (size_t s = 0; s < set.specs.size(); ++s) {
      const TableSpec& spec = set.specs[s];
      cells.clear();
      for (int m : h.members) {
        const int c = spec.cell_map[schema.CellOf(population.persons[m])];
        if (c >= 0) cells.push_back(c);
      }
      std::sort(cells.begin(), cells.end());
      cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
      for (int u = h.block; u >= 0; u = geo.unit(u).parent) {
        const int t = slot[s][u];
        if (t < 0) continue;
        for (int c : cells) ++set.tables[t].households[c];
      }
    }
  }
  return set;
}

std::string FormatPublishedTables(const PublishedTableSet& set,
                                  const GeoHierarchy& hierarchy) {
  std::string out = "table,geolevel,geocode,cell_label,value\n";
  for (const PublishedTable& t : set.tables) {
    const TableSpec& spec = set.specs[t.spec];
    const GeoUnit& unit = hierarchy.unit(t.geounit);
    for (int c = 0; c < spec.num_cells(); ++c) {
      out += fmt::format("{},{},{},{},", spec.name, LevelName(unit.level),
                         unit.code, CsvEscape(spec.labels[c]));
      if (t.IsSuppressed(c)) {
        out += "S\n";
      } else {
        out += fmt::format("{}\n", t.values[c]);
      }
    }
  }
  return out;
}

absl::StatusOr<PublishedTableSet> ParsePublishedTables(
    std::string_view text, const GeoHierarchy& hierarchy,
    std::vector<TableSpec> specs) {
  PublishedTableSet set;
  set.specs = std::move(specs);
  std::unordered_map<std::string, int> spec_index;
  std::vector<std::unordered_map<std::string, int>> label_index(set.specs.size());
  for (size_t s = 0; s < set.specs.size(); ++s) {
    spec_index[set.specs[s].name] = static_cast<int>(s);
    for (int c = 0; c < set.specs[s].num_cells(); ++c) {
      label_index[s][set.specs[s].labels[c]] = c;
    }
  }
  std::map<std::pair<int, int>, int> table_of;  // (unit, spec) -> table
  std::vector<std::vector<char>> seen;
  int line_number = 0;
  bool header = false;
  for (std::string_view raw : Split(text, '\n')) {
    ++line_number;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    if (raw.empty() || raw.front() == '#') continue;
    if (!header) {
      if (raw != "table,geolevel,geocode,cell_label,value") {
        return absl::InvalidArgumentError(
            fmt::format("line {}: bad header", line_number));
      }
      header = true;
      continue;
    }
    auto fields = CsvSplit(raw);
    if (!fields.ok() || fields->size() != 5) {
      return absl::InvalidArgumentError(
          fmt::format("line {}: expected 5 fields", line_number));
    }
    const std::vector<std::string>& f = *fields;
    auto sit = spec_index.find(f[0]);
    if (sit == spec_index.end()) {
      return absl::InvalidArgumentError(
          fmt::format("line {}: unknown table '{}'", line_number, f[0]));
    }
    const int s = sit->second;
    const int unit = hierarchy.Find(f[2]);
    if (unit < 0) {
      return absl::NotFoundError(
          fmt::format("line {}: unknown geocode '{}'", line_number, f[2]));
    }
    auto lit = label_index[s].find(f[3]);
    if (lit == label_index[s].end()) {
      return absl::InvalidArgumentError(
          fmt::format("line {}: unknown cell '{}'", line_number, f[3]));
    }
    auto [tit, inserted] = table_of.emplace(std::make_pair(unit, s),
                                            static_cast<int>(set.tables.size()));
    if (inserted) {
      PublishedTable t;
      t.spec = s;
      t.geounit = unit;
      t.values.assign(set.specs[s].num_cells(), 0);
      set.tables.push_back(std::move(t));
      seen.emplace_back(set.specs[s].num_cells(), 0);
    }
    PublishedTable& t = set.tables[tit->second];
    const int c = lit->second;
    if (seen[tit->second][c]) {
      return absl::InvalidArgumentError(
          fmt::format("line {}: duplicate cell", line_number));
    }
    seen[tit->second][c] = 1;
    if (f[4] == "S") {
      if (t.suppressed.empty()) t.suppressed.assign(t.values.size(), 0);
      t.suppressed[c] = 1;
    } else {
      int64_t v;
      if (!ParseInt(f[4], &v) || v < 0) {
        return absl::InvalidArgumentError(
            fmt::format("line {}: bad value '{}'", line_number, f[4]));
      }
      t.values[c] = v;
    }
  }
  for (size_t i = 0; i < seen.size(); ++i) {
    for (char c : seen[i]) {
      if (!c) {
        return absl::InvalidArgumentError(fmt::format(
            "table '{}' at '{}' is missing cells",
            set.specs[set.tables[i].spec].name,
            hierarchy.unit(set.tables[i].geounit).code));
      }
    }
  }
  std::stable_sort(set.tables.begin(), set.tables.end(),
                   [&](const PublishedTable& a, const PublishedTable& b) {
                     const std::string& ca = hierarchy.unit(a.geounit).code;
                     const std::string& cb = hierarchy.unit(b.geounit).code;
                     if (ca != cb) return ca < cb;
                     return set.specs[a.spec].name < set.specs[b.spec].name;
                   });
  return set;
}

}  // namespace dalab
