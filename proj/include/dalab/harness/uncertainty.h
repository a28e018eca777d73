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

#ifndef DALAB_HARNESS_UNCERTAINTY_H_
#define DALAB_HARNESS_UNCERTAINTY_H_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "dalab/harness/accuracy.h"
#include "dalab/privacy/accounting.h"
#include "dalab/tabulation/schema.h"
#include "dalab/topdown/topdown.h"
#include "dalab/topdown/workload.h"

namespace dalab {

// Smallest m such that the sum of k independent discrete Gaussians with
// parameter sigma2 lies in [-m, m] with probability at least 'confidence'.
// Computed from the exact pmf by repeated convolution.
absl::StatusOr<int64_t> DiscreteGaussianSumMoe(double sigma2, int k,
                                               double confidence);

struct MoeRow {
  GeoLevel level = GeoLevel::kNation;
  Statistic statistic = Statistic::kTotal;
  QueryGroup group = QueryGroup::kDetailed;
  int coordinates = 0;   // noisy counts summed for the statistic
  double sigma2 = 0.0;   // per coordinate, as charged
  double variance = 0.0;
  int64_t moe = 0;
};

// Margins of error of each statistic at each level from each person query
// group that can answer it, before any post-processing.
absl::StatusOr<std::vector<MoeRow>> PremeasurementMoe(
    const RhoAllocation& allocation, const CellSchema& schema,
    double confidence = 0.9);

// level,statistic,query_group,coordinates,sigma2,variance,moe
std::string FormatMoe(const std::vector<MoeRow>& rows);

struct BootstrapResult {
  int replicates = 0;
  // Standard deviation over replicates per geounit and statistic.
  std::vector<std::array<double, kNumStatistics>> sd;
};

// Reruns TopDown on the protected output as if it were the truth, with
// fresh noise per replicate. Requires at least 50 replicates.
absl::StatusOr<BootstrapResult> BootstrapUncertainty(
    const Population& protected_population, const TopDownConfig& config,
    int replicates, uint64_t seed);

// level,geocode,statistic,sd
std::string FormatBootstrap(const BootstrapResult& result,
                            const GeoHierarchy& hierarchy);

}  // namespace dalab

#endif  // DALAB_HARNESS_UNCERTAINTY_H_
