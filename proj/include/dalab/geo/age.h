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

#ifndef DALAB_GEO_AGE_H_
#define DALAB_GEO_AGE_H_

#include <string>

#include "absl/status/statusor.h"

namespace dalab {

inline constexpr int kMaxAge = 115;
inline constexpr int kVotingAge = 18;
// Single years 0-21, fifteen multi-year bins from 22 to 84, then 85+.
inline constexpr int kNumAgeBins = 38;

// Bin index of an age in [0, kMaxAge]; out-of-range ages are OutOfRange.
absl::StatusOr<int> AgeBin(int age);
// Unchecked variant for validated ages.
int AgeBinOf(int age);

int AgeBinLow(int bin);
int AgeBinHigh(int bin);  // kMaxAge for the top code
// "17", "[22,24]", "85+".
std::string AgeBinLabel(int bin);

}  // namespace dalab

#endif  // DALAB_GEO_AGE_H_
