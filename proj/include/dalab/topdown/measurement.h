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

#ifndef DALAB_TOPDOWN_MEASUREMENT_H_
#define DALAB_TOPDOWN_MEASUREMENT_H_

#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "dalab/geo/geography.h"
#include "dalab/privacy/accounting.h"
#include "dalab/topdown/workload.h"

namespace dalab {

struct NoisyMeasurement {
  int geounit = 0;
  QueryGroup group = QueryGroup::kDetailed;
  std::vector<int64_t> values;  // true answer plus discrete Gaussian noise
  double sigma2 = 0.0;          // per-coordinate variance actually used
  double rho = 0.0;
};

// True answers for one geounit, indexed by QueryGroup.
struct QueryAnswers {
  std::vector<int64_t> detailed;
  std::vector<int64_t> household_sizes;  // kNumHouseholdSizes entries
};

// Measures every group of 'workload' at 'level' for the listed units. The
// group is charged to the ledger once (the units are disjoint) before any
// noise is drawn. Noise for (group, unit) comes from a stream keyed by
// (seed, label, level, group, geocode).
absl::StatusOr<std::vector<NoisyMeasurement>> TakeNoisyMeasurements(
    const GeoHierarchy& hierarchy, GeoLevel level,
    const LevelWorkload& workload, const std::vector<int>& units,
    const std::vector<QueryAnswers>& answers, std::string_view label,
    uint64_t seed, PrivacyLedger& ledger);

}  // namespace dalab

#endif  // DALAB_TOPDOWN_MEASUREMENT_H_
