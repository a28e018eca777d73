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

#ifndef DALAB_TABULATION_HISTOGRAM_H_
#define DALAB_TABULATION_HISTOGRAM_H_

#include <cstdint>
#include <vector>

#include "absl/status/statusor.h"
#include "dalab/geo/population.h"
#include "dalab/tabulation/schema.h"

namespace dalab {

struct CellHistogram {
  int geounit = 0;
  std::vector<int64_t> counts;

  int64_t Total() const;
};

// Every record must lie in 'geounit'; otherwise OutOfRange.
absl::StatusOr<CellHistogram> Tabulate(const std::vector<PersonRecord>& persons,
                                       const GeoHierarchy& hierarchy,
                                       int geounit, const CellSchema& schema);

// Histogram of every geounit, indexed by unit index.
std::vector<CellHistogram> TabulateAll(const std::vector<PersonRecord>& persons,
                                       const GeoHierarchy& hierarchy,
                                       const CellSchema& schema);

}  // namespace dalab

#endif  // DALAB_TABULATION_HISTOGRAM_H_
