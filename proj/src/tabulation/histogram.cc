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

#include "dalab/tabulation/histogram.h"

#include <numeric>

#include "fmt/format.h"

namespace dalab {

int64_t CellHistogram::Total() const {
  return std::accumulate(counts.begin(), counts.end(), int64_t{0});
}

absl::StatusOr<CellHistogram> Tabulate(const std::vector<PersonRecord>& persons,
                                       const GeoHierarchy& hierarchy,
                                       int geounit, const CellSchema& schema) {
  CellHistogram h;
  h.geounit = geounit;
  h.counts.assign(schema.num_cells(), 0);
  for (const PersonRecord& p : persons) {
    if (p.block < 0 || p.block >= hierarchy.size() ||
        !hierarchy.IsDescendantOrSelf(p.block, geounit)) {
      return absl::OutOfRangeError(
          fmt::format("person '{}' is outside geounit '{}'", p.person_id,
                      hierarchy.unit(geounit).code));
    }
    ++h.counts[schema.CellOf(p)];
  }
  return h;
}

std::vector<CellHistogram> TabulateAll(const std::vector<PersonRecord>& persons,
                                       const GeoHierarchy& hierarchy,
                                       const CellSchema& schema) {
  std::vector<CellHistogram> out(hierarchy.size());
  for (int u = 0; u < hierarchy.size(); ++u) {
    out[u].geounit = u;
    out[u].counts.assign(schema.num_cells(), 0);
  }
  for (const PersonRecord& p : persons) {
    ++out[p.block].counts[schema.CellOf(p)];
  }
  // Units are stored in level order, so a reverse sweep sees every child
  // before its parent.
  for (int u = hierarchy.size() - 1; u > 0; --u) {
    auto& parent = out[hierarchy.unit(u).parent].counts;
    const auto& child = out[u].counts;
    for (size_t c = 0; c < child.size(); ++c) parent[c] += child[c];
  }
  return out;
}

}  // namespace dalab
