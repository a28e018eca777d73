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

#ifndef DALAB_GEO_GEOGRAPHY_H_
#define DALAB_GEO_GEOGRAPHY_H_

#include <array>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "absl/status/statusor.h"

namespace dalab {

enum class GeoLevel { kNation = 0, kState, kCounty, kTract, kBlockGroup, kBlock };

inline constexpr int kNumGeoLevels = 6;

inline int LevelIndex(GeoLevel level) { return static_cast<int>(level); }
inline GeoLevel LevelAt(int index) { return static_cast<GeoLevel>(index); }

std::string_view LevelName(GeoLevel level);
absl::StatusOr<GeoLevel> ParseLevel(std::string_view name);

struct GeoUnit {
  GeoLevel level;
  std::string code;
  int parent = -1;
  std::vector<int> children;
};

// Digits appended to the code at each level below the nation.
using GeoWidths = std::array<int, kNumGeoLevels>;
inline constexpr GeoWidths kDefaultGeoWidths = {0, 2, 3, 2, 1, 2};

// Nation -> state -> county -> tract -> block group -> block. Units are
// stored in level order, and within a level in code order, so unit indices
// are stable for a given set of codes.
class GeoHierarchy {
 public:
  GeoHierarchy() = default;

  // Regular tree with fanout[l] children per unit of level l-1 (fanout[0] is
  // ignored). Each fanout must fit in the level's width.
  static absl::StatusOr<GeoHierarchy> Regular(const GeoWidths& widths,
                                              const std::array<int, kNumGeoLevels>& fanout);

  struct UnitSpec {
    GeoLevel level;
    std::string code;
    std::string parent_code;
  };
  // Builds from explicit rows. Validates the partition and prefix rules.
  static absl::StatusOr<GeoHierarchy> FromUnits(std::vector<UnitSpec> specs);

  int size() const { return static_cast<int>(units_.size()); }
  const GeoUnit& unit(int index) const { return units_[index]; }
  int root() const { return 0; }
  const std::vector<int>& AtLevel(GeoLevel level) const {
    return by_level_[LevelIndex(level)];
  }
  const std::vector<int>& blocks() const { return AtLevel(GeoLevel::kBlock); }
  // -1 when absent.
  int Find(std::string_view code) const;
  // Ancestor of 'index' at 'level' (the unit itself if already there).
  int AncestorAt(int index, GeoLevel level) const;
  // Position of a unit within its level.
  int OrdinalInLevel(int index) const { return ordinal_[index]; }
  bool IsDescendantOrSelf(int index, int ancestor) const;

 private:
  absl::Status Finish();

  std::vector<GeoUnit> units_;
  std::array<std::vector<int>, kNumGeoLevels> by_level_;
  std::vector<int> ordinal_;
  std::unordered_map<std::string, int> index_;
};

}  // namespace dalab

#endif  // DALAB_GEO_GEOGRAPHY_H_
