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

#include "dalab/geo/microdata_io.h"

#include <unordered_set>

#include "dalab/common/csv.h"
#include "dalab/common/status_macros.h"
#include "dalab/common/strings.h"
#include "dalab/geo/age.h"
#include "fmt/format.h"

namespace dalab {
namespace {

constexpr std::string_view kMicrodataHeader =
    "person_id,household_id,block,sex,age,race,ethnicity";
constexpr std::string_view kHierarchyHeader = "level,code,parent_code";

absl::Status LineError(int line, std::string_view what) {
  return absl::InvalidArgumentError(fmt::format("line {}: {}", line, what));
}

absl::StatusOr<int64_t> IntField(const std::string& field, int line,
                                 std::string_view name) {
  int64_t value;
  if (!ParseInt(field, &value)) {
    return LineError(line, fmt::format("malformed {} '{}'", name, field));
  }
  return value;
}

}  // namespace

std::string FormatHierarchy(const GeoHierarchy& hierarchy) {
  std::string out(kHierarchyHeader);
  out += "\n";
  for (int i = 0; i < hierarchy.size(); ++i) {
    const GeoUnit& u = hierarchy.unit(i);
    const std::string parent =
        u.parent >= 0 ? hierarchy.unit(u.parent).code : std::string();
    out += CsvJoin({std::string(LevelName(u.level)), u.code, parent});
    out += "\n";
  }
  return out;
}

absl::StatusOr<GeoHierarchy> ParseHierarchy(std::string_view text) {
  std::vector<GeoHierarchy::UnitSpec> specs;
  int line_number = 0;
  bool seen_header = false;
  for (std::string_view raw : Split(text, '\n')) {
    ++line_number;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    if (raw.empty() || raw.front() == '#') continue;
    if (!seen_header) {
      if (raw != kHierarchyHeader) return LineError(line_number, "bad header");
      seen_header = true;
      continue;
    }
    auto fields = CsvSplit(raw);
    if (!fields.ok() || fields->size() != 3) {
      return LineError(line_number, "expected level,code,parent_code");
    }
    auto level = ParseLevel((*fields)[0]);
    if (!level.ok()) return LineError(line_number, std::string(level.status().message()));
    specs.push_back({*level, (*fields)[1], (*fields)[2]});
  }
  if (!seen_header) return absl::InvalidArgumentError("empty hierarchy file");
  return GeoHierarchy::FromUnits(std::move(specs));
}

std::string FormatMicrodata(const Population& population) {
  std::string out = fmt::format(
      "# codes: sex 0=male 1=female; race 0..{} (races={}); ethnicity "
      "0=not-hispanic 1=hispanic\n",
      population.num_races - 1, population.num_races);
  out += kMicrodataHeader;
  out += "\n";
  for (const PersonRecord& p : population.persons) {
    out += fmt::format("{},{},{},{},{},{},{}\n", CsvEscape(p.person_id),
                       CsvEscape(p.household_id),
                       population.hierarchy.unit(p.block).code, p.sex, p.age,
                       p.race, p.ethnicity);
  }
  return out;
}

absl::StatusOr<Population> ParseMicrodata(std::string_view text,
                                          GeoHierarchy hierarchy) {
  Population pop;
  pop.hierarchy = std::move(hierarchy);
  pop.num_races = 6;
  int line_number = 0;
  bool seen_header = false;
  std::unordered_set<std::string> ids;
  for (std::string_view raw : Split(text, '\n')) {
    ++line_number;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    if (raw.empty()) continue;
    if (raw.front() == '#') {
      const size_t pos = raw.find("races=");
      if (pos != std::string_view::npos) {
        size_t end = pos + 6;
        while (end < raw.size() && raw[end] >= '0' && raw[end] <= '9') ++end;
        int64_t r;
        if (!ParseInt(raw.substr(pos + 6, end - pos - 6), &r) || r < 1 ||
            r > kMaxRaces) {
          return LineError(line_number, "bad race count in comment");
        }
        pop.num_races = static_cast<int>(r);
      }
      continue;
    }
    if (!seen_header) {
      if (raw != kMicrodataHeader) return LineError(line_number, "bad header");
      seen_header = true;
      continue;
    }
    auto fields_or = CsvSplit(raw);
    if (!fields_or.ok() || fields_or->size() != 7) {
      return LineError(line_number, "expected 7 fields");
    }
    const std::vector<std::string>& f = *fields_or;
    PersonRecord p;
    p.person_id = f[0];
    p.household_id = f[1];
    if (p.person_id.empty() || p.household_id.empty()) {
      return LineError(line_number, "empty identifier");
    }
    if (!ids.insert(p.person_id).second) {
      return LineError(line_number,
                       fmt::format("duplicate person_id '{}'", p.person_id));
    }
    p.block = pop.hierarchy.Find(f[2]);
    if (p.block < 0 || pop.hierarchy.unit(p.block).level != GeoLevel::kBlock) {
      return absl::NotFoundError(fmt::format(
          "line {}: unknown block geocode '{}'", line_number, f[2]));
    }
    ASSIGN_OR_RETURN(int64_t sex, IntField(f[3], line_number, "sex"));
    ASSIGN_OR_RETURN(int64_t age, IntField(f[4], line_number, "age"));
    ASSIGN_OR_RETURN(int64_t race, IntField(f[5], line_number, "race"));
    ASSIGN_OR_RETURN(int64_t eth, IntField(f[6], line_number, "ethnicity"));
    if (age < 0 || age > kMaxAge) {
      return absl::OutOfRangeError(fmt::format(
          "line {}: age {} outside [0, {}]", line_number, age, kMaxAge));
    }
    if (sex < 0 || sex >= kNumSexes || race < 0 || race >= pop.num_races ||
        eth < 0 || eth >= kNumEthnicities) {
      return absl::OutOfRangeError(
          fmt::format("line {}: attribute code out of range", line_number));
    }
    p.sex = static_cast<int>(sex);
    p.age = static_cast<int>(age);
    p.race = static_cast<int>(race);
    p.ethnicity = static_cast<int>(eth);
    pop.persons.push_back(std::move(p));
  }
  if (!seen_header) return absl::InvalidArgumentError("empty microdata file");
  ASSIGN_OR_RETURN(pop.households, DeriveHouseholds(pop.persons));
  return pop;
}

absl::Status SavePopulation(const Population& population,
                            const std::string& microdata_path,
                            const std::string& hierarchy_path) {
  RETURN_IF_ERROR(WriteFile(hierarchy_path, FormatHierarchy(population.hierarchy)));
  return WriteFile(microdata_path, FormatMicrodata(population));
}

absl::StatusOr<Population> LoadPopulation(const std::string& microdata_path,
                                          const std::string& hierarchy_path) {
  ASSIGN_OR_RETURN(std::string geo_text, ReadFile(hierarchy_path));
  ASSIGN_OR_RETURN(GeoHierarchy hierarchy, ParseHierarchy(geo_text));
  ASSIGN_OR_RETURN(std::string text, ReadFile(microdata_path));
  return ParseMicrodata(text, std::move(hierarchy));
}

}  // namespace dalab
