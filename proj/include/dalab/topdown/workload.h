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

#ifndef DALAB_TOPDOWN_WORKLOAD_H_
#define DALAB_TOPDOWN_WORKLOAD_H_

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "dalab/geo/geography.h"
#include "dalab/privacy/accounting.h"

namespace dalab {

enum class QueryGroup {
  kDetailed = 0,     // every schema cell
  kTotal,            // total persons
  kHouseholdSize,    // households by size 1..6, 7+
};

inline constexpr int kNumHouseholdSizes = 7;

std::string_view QueryGroupName(QueryGroup group);
absl::StatusOr<QueryGroup> ParseQueryGroup(std::string_view name);

// L2 sensitivity of one group under add/remove of a person. Moving a
// household from size k to k+1 changes two household-size cells.
double QueryGroupSensitivity(QueryGroup group);

struct LevelWorkload {
  std::vector<QueryGroup> groups;
  std::vector<double> rho;  // parallel to groups

  // -1 when the group is not measured at this level.
  double RhoFor(QueryGroup group) const;
};

struct Workload {
  std::array<LevelWorkload, kNumGeoLevels> levels;
};

// Builds the workload from allocation entries named (level, group). Unknown
// level or group names are InvalidArgument.
absl::StatusOr<Workload> WorkloadFromAllocation(const RhoAllocation& allocation);

// TopDown requires the detailed group at every level.
absl::Status ValidateTopDownWorkload(const Workload& workload);

// person_rho split equally over the levels, then detailed_share to the
// detailed group and the rest to the total; housing_rho split equally over
// the levels for the household-size group.
absl::StatusOr<RhoAllocation> DefaultAllocation(double person_rho = 2.56,
                                                double housing_rho = 0.07,
                                                double detailed_share = 0.8);

// Moves every group's summed rho to the block level.
absl::StatusOr<RhoAllocation> CollapseToBlocks(const RhoAllocation& allocation);

}  // namespace dalab

#endif  // DALAB_TOPDOWN_WORKLOAD_H_
