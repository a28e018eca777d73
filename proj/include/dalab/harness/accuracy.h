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

#ifndef DALAB_HARNESS_ACCURACY_H_
#define DALAB_HARNESS_ACCURACY_H_

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "dalab/geo/population.h"
#include "dalab/tabulation/tables.h"

namespace dalab {

enum class Statistic { kTotal = 0, kAge0To17, kAge18To64, kAge65Plus };
inline constexpr int kNumStatistics = 4;
std::string_view StatisticName(Statistic s);

// Statistic of an age, other than the total.
Statistic AgeGroupOf(int age);

using StatisticVector = std::array<int64_t, kNumStatistics>;

// Person counts for every geounit, indexed by unit.
std::vector<StatisticVector> GeounitStatistics(const Population& population);

// The same counts read off released tables: the total from a one-cell table
// and age groups from a table whose cells each lie within one age group.
// Withheld cells read as zero. Units without such tables count zero.
absl::StatusOr<std::vector<StatisticVector>> GeounitStatisticsFromTables(
    const PublishedTableSet& tables, const GeoHierarchy& hierarchy);

struct AccuracyRow {
  GeoLevel level = GeoLevel::kNation;
  Statistic statistic = Statistic::kTotal;
  int64_t n = 0;  // geounits times seeds
  double mae = 0.0;
  double mean_truth = 0.0;
  double relative_mae = 0.0;  // mae / mean_truth, 0 when the mean is 0
  // Empirical 5%, 50% and 95% points of the signed error.
  int64_t q05 = 0;
  int64_t q50 = 0;
  int64_t q95 = 0;
};

// Pools signed errors over geounits and seeds.
class AccuracyAccumulator {
 public:
  explicit AccuracyAccumulator(const GeoHierarchy& hierarchy);

  void Add(uint64_t seed, const std::vector<StatisticVector>& truth,
           const std::vector<StatisticVector>& released);

  std::vector<AccuracyRow> Summary() const;
  // seed,level,geocode,statistic,truth,released,error
  std::string Detail() const;

 private:
  struct Entry {
    uint64_t seed;
    int unit;
    StatisticVector truth;
    StatisticVector released;
  };
  std::vector<GeoLevel> levels_;
  std::vector<std::string> codes_;
  std::vector<Entry> entries_;
};

const AccuracyRow* FindRow(const std::vector<AccuracyRow>& rows,
                           GeoLevel level, Statistic statistic);

// level,statistic,n,mae,mean_truth,relative_mae,q05,q50,q95
std::string FormatAccuracy(const std::vector<AccuracyRow>& rows);

struct BiasRow {
  int group = 0;
  int64_t n = 0;
  double mean_truth = 0.0;
  double mean_error = 0.0;
  double se = 0.0;  // standard error of mean_error
};

// Mean signed error by quantile group of the true value, smallest first.
// Ties in the true value are broken by input order.
std::vector<BiasRow> SmallAreaBias(const std::vector<double>& truth,
                                   const std::vector<double>& estimate,
                                   int groups = 10);

// group,n,mean_truth,mean_error,se
std::string FormatSmallAreaBias(const std::vector<BiasRow>& rows);

}  // namespace dalab

#endif  // DALAB_HARNESS_ACCURACY_H_
