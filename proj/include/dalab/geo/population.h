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

#ifndef DALAB_GEO_POPULATION_H_
#define DALAB_GEO_POPULATION_H_

#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "dalab/common/key_value_config.h"
#include "dalab/geo/geography.h"

namespace dalab {

inline constexpr int kNumSexes = 2;
inline constexpr int kNumEthnicities = 2;
inline constexpr int kMaxRaces = 63;

struct PersonRecord {
  std::string person_id;
  std::string household_id;
  int block = 0;  // unit index in the hierarchy, always at block level
  int sex = 0;
  int age = 0;
  int race = 0;
  int ethnicity = 0;

  bool operator==(const PersonRecord&) const = default;
};

struct Household {
  std::string household_id;
  int block = 0;
  std::vector<int> members;  // indices into the person list
  int adults = 0;

  int size() const { return static_cast<int>(members.size()); }
};

struct Population {
  GeoHierarchy hierarchy;
  int num_races = 6;
  std::vector<PersonRecord> persons;
  std::vector<Household> households;
};

// Groups persons by household id in order of first appearance. A household
// whose members sit in different blocks is a NotFound (referential) error.
absl::StatusOr<std::vector<Household>> DeriveHouseholds(
    const std::vector<PersonRecord>& persons);

// Persons per block, indexed by the block's ordinal within its level.
std::vector<int64_t> BlockPopulations(const Population& population);

struct PopulationConfig {
  std::array<int, kNumGeoLevels> fanout = {1, 2, 2, 2, 2, 3};
  GeoWidths widths = kDefaultGeoWidths;
  double block_mean_population = 29.0;
  // Negative binomial shape for households per block.
  double block_dispersion = 2.0;
  double empty_block_probability = 0.05;
  // When >= 0, every block gets exactly this many households.
  int households_per_block = -1;
  // Probability of household size k+1; the last entry is the largest size.
  std::vector<double> household_size_probs = {0.28, 0.34, 0.15, 0.13,
                                              0.06, 0.025, 0.015};
  // Probability that each member after the first is an adult.
  double adult_probability = 0.55;
  int max_adult_age = 94;
  int num_races = 6;
  // Weight of the tract's dominant race in each block's race mixture.
  double dominant_share_min = 0.55;
  double dominant_share_max = 0.9;
  // Probability that all household members share one race.
  double household_race_cohesion = 0.9;
  double hispanic_share_min = 0.05;
  double hispanic_share_max = 0.35;
  uint64_t seed = 1;

  absl::Status Validate() const;
};

// Reads "population.*" keys; absent keys keep defaults.
absl::StatusOr<PopulationConfig> PopulationConfigFromKeys(
    const KeyValueConfig& config);
// The keys understood by PopulationConfigFromKeys.
std::vector<std::string> PopulationConfigKeys();

absl::StatusOr<Population> GeneratePopulation(const PopulationConfig& config);

}  // namespace dalab

#endif  // DALAB_GEO_POPULATION_H_
