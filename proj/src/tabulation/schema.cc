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

#include "dalab/tabulation/schema.h"

#include <array>

#include "dalab/geo/age.h"
#include "fmt/format.h"

namespace dalab {
namespace {

constexpr std::array<std::string_view, 4> kGranularityNames = {
    "single_year", "age_bin", "voting_age", "none"};

}  // namespace

std::string_view AgeGranularityName(AgeGranularity g) {
  return kGranularityNames[static_cast<int>(g)];
}

absl::StatusOr<AgeGranularity> ParseAgeGranularity(std::string_view name) {
  for (int i = 0; i < 4; ++i) {
    if (kGranularityNames[i] == name) return static_cast<AgeGranularity>(i);
  }
  return absl::InvalidArgumentError(
      fmt::format("unknown age granularity '{}'", name));
}

CellSchema::CellSchema(AgeGranularity age, int num_races)
    : age_(age), num_races_(num_races) {
  switch (age_) {
    case AgeGranularity::kSingleYear:
      num_age_levels_ = kMaxAge + 1;
      break;
    case AgeGranularity::kAgeBin:
      num_age_levels_ = kNumAgeBins;
      break;
    case AgeGranularity::kVotingAge:
      num_age_levels_ = 2;
      break;
    case AgeGranularity::kNone:
      num_age_levels_ = 1;
      break;
  }
  num_cells_ = kNumSexes * num_age_levels_ * num_races_ * kNumEthnicities;
}

int CellSchema::AgeLevel(int age) const {
  switch (age_) {
    case AgeGranularity::kSingleYear:
      return age;
    case AgeGranularity::kAgeBin:
      return AgeBinOf(age);
    case AgeGranularity::kVotingAge:
      return age >= kVotingAge ? 1 : 0;
    case AgeGranularity::kNone:
      return 0;
  }
  return 0;
}

int CellSchema::AgeLevelLow(int level) const {
  switch (age_) {
    case AgeGranularity::kSingleYear:
      return level;
    case AgeGranularity::kAgeBin:
      return AgeBinLow(level);
    case AgeGranularity::kVotingAge:
      return level == 1 ? kVotingAge : 0;
    case AgeGranularity::kNone:
      return 0;
  }
  return 0;
}

int CellSchema::AgeLevelHigh(int level) const {
  switch (age_) {
    case AgeGranularity::kSingleYear:
      return level;
    case AgeGranularity::kAgeBin:
      return AgeBinHigh(level);
    case AgeGranularity::kVotingAge:
      return level == 1 ? kMaxAge : kVotingAge - 1;
    case AgeGranularity::kNone:
      return kMaxAge;
  }
  return kMaxAge;
}

std::string CellSchema::AgeLevelLabel(int level) const {
  switch (age_) {
    case AgeGranularity::kSingleYear:
      return fmt::format("{}", level);
    case AgeGranularity::kAgeBin:
      return AgeBinLabel(level);
    case AgeGranularity::kVotingAge:
      return level == 1 ? "18+" : "0-17";
    case AgeGranularity::kNone:
      return "all";
  }
  return "";
}

CellSchema::Attributes CellSchema::Decompose(int cell) const {
  Attributes a;
  a.ethnicity = cell % kNumEthnicities;
  cell /= kNumEthnicities;
  a.race = cell % num_races_;
  cell /= num_races_;
  a.age_level = cell % num_age_levels_;
  a.sex = cell / num_age_levels_;
  return a;
}

std::string CellSchema::CellLabel(int cell) const {
  const Attributes a = Decompose(cell);
  return fmt::format("sex={};age={};race={};eth={}", a.sex,
                     AgeLevelLabel(a.age_level), a.race, a.ethnicity);
}

}  // namespace dalab
