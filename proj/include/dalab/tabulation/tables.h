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

#ifndef DALAB_TABULATION_TABLES_H_
#define DALAB_TABULATION_TABLES_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "dalab/geo/population.h"
#include "dalab/tabulation/histogram.h"
#include "dalab/tabulation/schema.h"

namespace dalab {

// How a marginal table treats the age axis.
enum class AgeAxis { kDrop, kVotingAge, kAgeBin, kExact };

// A 0/1 marginalization of a cell schema. Each schema cell maps to at most
// one table cell; -1 means the cell is outside the table's universe.
struct TableSpec {
  std::string name;
  CellSchema schema{AgeGranularity::kSingleYear, 1};
  std::vector<int> cell_map;
  std::vector<std::string> labels;
  std::vector<GeoLevel> levels;

  int num_cells() const { return static_cast<int>(labels.size()); }
  bool PublishedAt(GeoLevel level) const;
};

// Keeps the selected axes. 'min_age' restricts the universe to persons at
// least that old. Fails when the schema's age resolution is too coarse.
absl::StatusOr<TableSpec> MarginalTable(const CellSchema& schema,
                                        std::string name, bool keep_sex,
                                        AgeAxis age, bool keep_race,
                                        bool keep_ethnicity,
                                        std::vector<GeoLevel> levels,
                                        int min_age = 0);

// T1 total, T2 voting-age population, T3 race x ethnicity, T4 sex x age bin
// at every level; T5 sex x single-year age x race x ethnicity at tract and
// above. Requires a single-year schema.
absl::StatusOr<std::vector<TableSpec>> DefaultTableSpecs(
    const CellSchema& schema);

struct PublishedTable {
  int spec = 0;  // index into the table set's specs
  int geounit = 0;
  std::vector<int64_t> values;
  // Distinct contributing households per cell; empty when not computed.
  std::vector<int64_t> households;
  // Nonzero marks a withheld cell; empty means nothing is withheld.
  std::vector<char> suppressed;

  bool IsSuppressed(int cell) const {
    return !suppressed.empty() && suppressed[cell] != 0;
  }
};

struct PublishedTableSet {
  std::vector<TableSpec> specs;
  // Sorted by (geocode, table name).
  std::vector<PublishedTable> tables;
};

// Each value is the sum of its mapped histogram cells.
absl::StatusOr<PublishedTable> ApplyTable(const CellHistogram& histogram,
                                          const CellSchema& schema,
                                          const TableSpec& spec);

// Tables for every geounit at every level listed in each spec, with explicit
// zeros and household metadata.
absl::StatusOr<PublishedTableSet> PublishTables(const Population& population,
                                                std::vector<TableSpec> specs);

// CSV "table,geolevel,geocode,cell_label,value"; withheld cells print "S".
std::string FormatPublishedTables(const PublishedTableSet& set,
                                  const GeoHierarchy& hierarchy);
// Inverse of FormatPublishedTables for a known spec list. Table rows must
// cover every cell of each (table, geounit) they mention.
absl::StatusOr<PublishedTableSet> ParsePublishedTables(
    std::string_view text, const GeoHierarchy& hierarchy,
    std::vector<TableSpec> specs);

}  // namespace dalab

#endif  // DALAB_TABULATION_TABLES_H_
