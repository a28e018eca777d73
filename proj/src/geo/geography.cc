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

#include "dalab/geo/geography.h"

#include <algorithm>

#include "dalab/common/status_macros.h"
#include "fmt/format.h"

namespace dalab {
namespace {

constexpr std::array<std::string_view, kNumGeoLevels> kLevelNames = {
    "nation", "state", "county", "tract", "blockgroup", "block"};

}  // namespace

std::string_view LevelName(GeoLevel level) {
  return kLevelNames[LevelIndex(level)];
}

absl::StatusOr<GeoLevel> ParseLevel(std::string_view name) {
  for (int i = 0; i < kNumGeoLevels; ++i) {
    if (kLevelNames[i] == name) return LevelAt(i);
  }
  return absl::InvalidArgumentError(
      fmt::format("unknown geolevel '{}'", name));
}

absl::StatusOr<GeoHierarchy> GeoHierarchy::Regular(
    const GeoWidths& widths, const std::array<int, kNumGeoLevels>& fanout) {
  if (widths[0] != 0) {
    return absl::InvalidArgumentError("nation code width must be 0");
  }
  std::vector<UnitSpec> specs;
  specs.push_back({GeoLevel::kNation, "", ""});
  std::vector<std::string> parents = {""};
  for (int l = 1; l < kNumGeoLevels; ++l) {
    if (fanout[l] < 1) {
      return absl::InvalidArgumentError(
          fmt::format("{} count must be >= 1", LevelName(LevelAt(l))));
    }
    if (widths[l] < 1 || widths[l] > 9) {
      return absl::InvalidArgumentError(
          fmt::format("{} code width must be in [1, 9]", LevelName(LevelAt(l))));
    }
    int64_t capacity = 1;
    for (int d = 0; d < widths[l]; ++d) capacity *= 10;
    if (fanout[l] >= capacity) {
      return absl::InvalidArgumentError(
          fmt::format("{} count {} does not fit in {} digits",
                      LevelName(LevelAt(l)), fanout[l], widths[l]));
    }
    std::vector<std::string> next;
    for (const std::string& parent : parents) {
      for (int k = 1; k <= fanout[l]; ++k) {
        std::string code = parent + fmt::format("{:0{}d}", k, widths[l]);
        specs.push_back({LevelAt(l), code, parent});
        next.push_back(std::move(code));
      }
    }
    parents = std::move(next);
  }
  return FromUnits(std::move(specs));
}

absl::StatusOr<GeoHierarchy> GeoHierarchy::FromUnits(
    std::vector<UnitSpec> specs) {
  std::stable_sort(specs.begin(), specs.end(),
                   [](const UnitSpec& a, const UnitSpec& b) {
                     if (a.level != b.level) return a.level < b.level;
                     return a.code < b.code;
                   });
  GeoHierarchy h;
  for (const UnitSpec& s : specs) {
    if (h.index_.count(s.code) > 0) {
      return absl::InvalidArgumentError(
          fmt::format("duplicate geocode '{}'", s.code));
    }
    GeoUnit unit{s.level, s.code, -1, {}};
    if (s.level == GeoLevel::kNation) {
      if (!h.units_.empty()) {
        return absl::InvalidArgumentError("more than one nation unit");
      }
    } else {
      auto it = h.index_.find(s.parent_code);
      if (it == h.index_.end()) {
        return absl::NotFoundError(fmt::format(
            "geocode '{}' has unknown parent '{}'", s.code, s.parent_code));
      }
      const GeoUnit& parent = h.units_[it->second];
      if (LevelIndex(parent.level) + 1 != LevelIndex(s.level)) {
        return absl::InvalidArgumentError(fmt::format(
            "geocode '{}' parent '{}' is not one level up", s.code,
            s.parent_code));
      }
      if (s.code.size() <= parent.code.size() ||
          s.code.compare(0, parent.code.size(), parent.code) != 0) {
        return absl::InvalidArgumentError(fmt::format(
            "geocode '{}' does not extend parent '{}'", s.code, s.parent_code));
      }
      unit.parent = it->second;
    }
    const int index = static_cast<int>(h.units_.size());
    h.index_.emplace(s.code, index);
    if (unit.parent >= 0) h.units_[unit.parent].children.push_back(index);
    h.units_.push_back(std::move(unit));
  }
  RETURN_IF_ERROR(h.Finish());
  return h;
}

absl::Status GeoHierarchy::Finish() {
  if (units_.empty() || units_[0].level != GeoLevel::kNation) {
    return absl::InvalidArgumentError("hierarchy has no nation unit");
  }
  ordinal_.assign(units_.size(), 0);
  for (int i = 0; i < size(); ++i) {
    auto& level = by_level_[LevelIndex(units_[i].level)];
    ordinal_[i] = static_cast<int>(level.size());
    level.push_back(i);
    if (units_[i].level != GeoLevel::kBlock && units_[i].children.empty()) {
      return absl::InvalidArgumentError(fmt::format(
          "geounit '{}' at level {} has no children", units_[i].code,
          LevelName(units_[i].level)));
    }
  }
  return absl::OkStatus();
}

int GeoHierarchy::Find(std::string_view code) const {
  auto it = index_.find(std::string(code));
  return it == index_.end() ? -1 : it->second;
}

int GeoHierarchy::AncestorAt(int index, GeoLevel level) const {
  while (index >= 0 && units_[index].level > level) {
    index = units_[index].parent;
  }
  return index;
}

bool GeoHierarchy::IsDescendantOrSelf(int index, int ancestor) const {
  return AncestorAt(index, units_[ancestor].level) == ancestor;
}

}  // namespace dalab
