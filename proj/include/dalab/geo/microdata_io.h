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

#ifndef DALAB_GEO_MICRODATA_IO_H_
#define DALAB_GEO_MICRODATA_IO_H_

#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "dalab/geo/population.h"

namespace dalab {

// Hierarchy file: header "level,code,parent_code", one geounit per row.
std::string FormatHierarchy(const GeoHierarchy& hierarchy);
absl::StatusOr<GeoHierarchy> ParseHierarchy(std::string_view text);

// Microdata file: a "#" comment line documenting the integer codes, then a
// header "person_id,household_id,block,sex,age,race,ethnicity".
std::string FormatMicrodata(const Population& population);

// Errors: malformed rows are InvalidArgument with the line number, ages or
// codes out of range are OutOfRange, unknown blocks and households spanning
// blocks are NotFound.
absl::StatusOr<Population> ParseMicrodata(std::string_view text,
                                          GeoHierarchy hierarchy);

absl::Status SavePopulation(const Population& population,
                            const std::string& microdata_path,
                            const std::string& hierarchy_path);
absl::StatusOr<Population> LoadPopulation(const std::string& microdata_path,
                                          const std::string& hierarchy_path);

}  // namespace dalab

#endif  // DALAB_GEO_MICRODATA_IO_H_
