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

#ifndef DALAB_TOPDOWN_TOPDOWN_H_
#define DALAB_TOPDOWN_TOPDOWN_H_

#include <cstdint>
#include <vector>

#include "absl/status/statusor.h"
#include "dalab/geo/population.h"
#include "dalab/privacy/accounting.h"
#include "dalab/tabulation/schema.h"
#include "dalab/topdown/measurement.h"

namespace dalab {

struct InvariantSpec {
  bool state_total_population = true;
  // Block household counts; every household has at least one person.
  bool block_housing_units = true;
};

struct TopDownConfig {
  AgeGranularity age = AgeGranularity::kAgeBin;
  // Empty means DefaultAllocation().
  RhoAllocation allocation;
  InvariantSpec invariants;
  // Keeps the real-valued equality-constrained estimates only: no
  // nonnegativity, no rounding, no microdata.
  bool diagnostic = false;
  uint64_t seed = 1;
};

struct GeounitEstimate {
  int geounit = 0;
  std::vector<double> real;     // estimator solution over schema cells
  std::vector<int64_t> counts;  // rounded; empty in diagnostic mode

  int64_t Total() const;
  double RealTotal() const;
};

struct TopDownResult {
  CellSchema schema{AgeGranularity::kAgeBin, 1};
  // Empty in diagnostic mode.
  Population protected_population;
  PrivacyLedger ledger;
  std::vector<GeounitEstimate> estimates;  // indexed by geounit
  std::vector<NoisyMeasurement> measurements;
  int64_t estimator_iterations = 0;
};

// Root-to-leaf estimation: every level is measured and charged first, then
// each parent's integer histogram constrains the joint estimate of its
// children, which is rounded before the next level.
absl::StatusOr<TopDownResult> TopDownRun(const Population& population,
                                         const TopDownConfig& config);

// Comparison baseline: the whole allocation spent at the block level, each
// block estimated alone, higher levels summed from blocks. Invariants are
// not applied.
absl::StatusOr<TopDownResult> BottomUpRun(const Population& population,
                                          const TopDownConfig& config);

// Person records realizing the per-block histograms (indexed by block
// ordinal) exactly. Ages are drawn uniformly within each age level; persons
// are dealt into households[b] households, adults first.
absl::StatusOr<Population> SynthesizeMicrodata(
    const GeoHierarchy& hierarchy, int num_races, const CellSchema& schema,
    const std::vector<std::vector<int64_t>>& block_counts,
    const std::vector<int64_t>& households, uint64_t seed);

}  // namespace dalab

#endif  // DALAB_TOPDOWN_TOPDOWN_H_
