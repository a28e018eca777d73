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

#include "dalab/topdown/measurement.h"

#include <numeric>

#include "dalab/common/rng.h"
#include "dalab/common/status_macros.h"
#include "dalab/privacy/discrete_samplers.h"
#include "dalab/privacy/rational.h"
#include "fmt/format.h"

namespace dalab {

absl::StatusOr<std::vector<NoisyMeasurement>> TakeNoisyMeasurements(
    const GeoHierarchy& hierarchy, GeoLevel level,
    const LevelWorkload& workload, const std::vector<int>& units,
    const std::vector<QueryAnswers>& answers, std::string_view label,
    uint64_t seed, PrivacyLedger& ledger) {
  if (answers.size() != units.size()) {
    return absl::InvalidArgumentError("one answer set per unit is required");
  }
  std::vector<NoisyMeasurement> out;
  for (size_t g = 0; g < workload.groups.size(); ++g) {
    const QueryGroup group = workload.groups[g];
    const double rho = workload.rho[g];
    const double delta = QueryGroupSensitivity(group);
    ASSIGN_OR_RETURN(double sigma2, NoiseForRho(rho, delta));
    const Rational exact = RationalAtLeast(sigma2);
    LedgerEntry entry;
    entry.mechanism = "discrete_gaussian";
    entry.geolevel = std::string(LevelName(level));
    entry.query_group = std::string(QueryGroupName(group));
    entry.sensitivity = delta;
    entry.sigma2 = exact.ToDouble();
    entry.rho = rho;
    RETURN_IF_ERROR(ledger.Charge(entry));
    const std::string stream_label =
        fmt::format("{}/{}/{}", label, LevelName(level), QueryGroupName(group));
    for (size_t i = 0; i < units.size(); ++i) {
      NoisyMeasurement m;
      m.geounit = units[i];
      m.group = group;
      m.sigma2 = entry.sigma2;
      m.rho = rho;
      switch (group) {
        case QueryGroup::kDetailed:
          m.values = answers[i].detailed;
          break;
        case QueryGroup::kTotal:
          m.values = {std::accumulate(answers[i].detailed.begin(),
                                      answers[i].detailed.end(), int64_t{0})};
          break;
        case QueryGroup::kHouseholdSize:
          m.values = answers[i].household_sizes;
          break;
      }
      RngStream rng =
          RngStream::For(seed, stream_label, hierarchy.unit(units[i]).code);
      for (int64_t& v : m.values) v += SampleDiscreteGaussianExact(exact, rng);
      out.push_back(std::move(m));
    }
  }
  return out;
}

}  // namespace dalab
