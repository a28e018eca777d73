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

#include "dalab/topdown/workload.h"

#include <cmath>
#include <map>

#include "dalab/common/status_macros.h"
#include "fmt/format.h"

namespace dalab {

std::string_view QueryGroupName(QueryGroup group) {
  switch (group) {
    case QueryGroup::kDetailed:
      return "detailed";
    case QueryGroup::kTotal:
      return "total";
    case QueryGroup::kHouseholdSize:
      return "household_size";
  }
  return "";
}

absl::StatusOr<QueryGroup> ParseQueryGroup(std::string_view name) {
  for (QueryGroup g : {QueryGroup::kDetailed, QueryGroup::kTotal,
                       QueryGroup::kHouseholdSize}) {
    if (QueryGroupName(g) == name) return g;
  }
  return absl::InvalidArgumentError(
      fmt::format("unknown query group '{}'", name));
}

double QueryGroupSensitivity(QueryGroup group) {
  return group == QueryGroup::kHouseholdSize ? std::sqrt(2.0) : 1.0;
}

double LevelWorkload::RhoFor(QueryGroup group) const {
  for (size_t i = 0; i < groups.size(); ++i) {
    if (groups[i] == group) return rho[i];
  }
  return -1.0;
}

absl::StatusOr<Workload> WorkloadFromAllocation(
    const RhoAllocation& allocation) {
  Workload workload;
  for (const RhoAllocationEntry& e : allocation.entries()) {
    ASSIGN_OR_RETURN(GeoLevel level, ParseLevel(e.geolevel));
    ASSIGN_OR_RETURN(QueryGroup group, ParseQueryGroup(e.query_group));
    LevelWorkload& lw = workload.levels[LevelIndex(level)];
    lw.groups.push_back(group);
    lw.rho.push_back(e.rho);
  }
  return workload;
}

absl::Status ValidateTopDownWorkload(const Workload& workload) {
  for (int l = 0; l < kNumGeoLevels; ++l) {
    if (workload.levels[l].RhoFor(QueryGroup::kDetailed) <= 0.0) {
      return absl::InvalidArgumentError(
          fmt::format("workload has no detailed query at level '{}'",
                      LevelName(LevelAt(l))));
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<RhoAllocation> DefaultAllocation(double person_rho,
                                                double housing_rho,
                                                double detailed_share) {
  if (!(person_rho > 0.0) || !(housing_rho >= 0.0) ||
      !(detailed_share > 0.0 && detailed_share <= 1.0)) {
    return absl::InvalidArgumentError(fmt::format(
        "invalid allocation: person_rho={} housing_rho={} detailed_share={}",
        person_rho, housing_rho, detailed_share));
  }
  RhoAllocation allocation;
  const double per_level = person_rho / kNumGeoLevels;
  for (int l = 0; l < kNumGeoLevels; ++l) {
    const std::string level(LevelName(LevelAt(l)));
    RETURN_IF_ERROR(allocation.Add(level, "detailed", per_level * detailed_share));
    if (detailed_share < 1.0) {
      RETURN_IF_ERROR(
          allocation.Add(level, "total", per_level * (1.0 - detailed_share)));
    }
    if (housing_rho > 0.0) {
      RETURN_IF_ERROR(
          allocation.Add(level, "household_size", housing_rho / kNumGeoLevels));
    }
  }
  return allocation;
}

absl::StatusOr<RhoAllocation> CollapseToBlocks(const RhoAllocation& allocation) {
  std::map<std::string, double> sums;
  std::vector<std::string> order;
  for (const RhoAllocationEntry& e : allocation.entries()) {
    if (!sums.count(e.query_group)) order.push_back(e.query_group);
    sums[e.query_group] += e.rho;
  }
  RhoAllocation out;
  for (const std::string& group : order) {
    RETURN_IF_ERROR(out.Add(std::string(LevelName(GeoLevel::kBlock)), group,
                            sums[group]));
  }
  return out;
}

}  // namespace dalab
