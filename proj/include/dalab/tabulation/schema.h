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

#ifndef DALAB_TABULATION_SCHEMA_H_
#define DALAB_TABULATION_SCHEMA_H_

#include <string>
#include <string_view>

#include "absl/status/statusor.h"
#include "dalab/geo/population.h"

namespace dalab {

// Age axis resolution of a cell schema, from finest to coarsest.
enum class AgeGranularity { kSingleYear = 0, kAgeBin, kVotingAge, kNone };

std::string_view AgeGranularityName(AgeGranularity g);
absl::StatusOr<AgeGranularity> ParseAgeGranularity(std::string_view name);

// sex x age x race x ethnicity, flattened with sex outermost and ethnicity
// innermost.
class CellSchema {
 public:
  CellSchema(AgeGranularity age, int num_races);

  AgeGranularity age_granularity() const { return age_; }
  int num_races() const { return num_races_; }
  int num_age_levels() const { return num_age_levels_; }
  int num_cells() const { return num_cells_; }

  int AgeLevel(int age) const;
  int AgeLevelLow(int level) const;
  int AgeLevelHigh(int level) const;
  std::string AgeLevelLabel(int level) const;

  int Cell(int sex, int age_level, int race, int ethnicity) const {
    return ((sex * num_age_levels_ + age_level) * num_races_ + race) *
               kNumEthnicities +
           ethnicity;
  }
  struct Attributes {
    int sex;
    int age_level;
    int race;
    int ethnicity;
  };
  Attributes Decompose(int cell) const;
  int CellOf(const PersonRecord& person) const {
    return Cell(person.sex, AgeLevel(person.age), person.race,
                person.ethnicity);
  }
  // "sex=1;age=[22,24];race=2;eth=0".
  std::string CellLabel(int cell) const;

  bool operator==(const CellSchema& other) const {
    return age_ == other.age_ && num_races_ == other.num_races_;
  }

 private:
  AgeGranularity age_;
  int num_races_;
  int num_age_levels_;
  int num_cells_;
};

}  // namespace dalab

#endif  // DALAB_TABULATION_SCHEMA_H_
