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

#ifndef DALAB_SDL_SWAPPING_H_
#define DALAB_SDL_SWAPPING_H_

#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "dalab/geo/population.h"

namespace dalab {

struct SwapConfig {
  // Fraction of households that end up swapped. Each swap moves two.
  double target_rate = 0.05;
  // Partner search widens one ancestor at a time, starting at the block's
  // parent, for at most this many hops.
  int radius = 2;
  uint64_t seed = 1;

  absl::Status Validate() const;
};

struct SwapLogEntry {
  std::string household_a;
  std::string household_b;
  int block_a = 0;  // block of household_a before the swap
  int block_b = 0;
};

struct SwapResult {
  Population swapped;
  std::vector<SwapLogEntry> log;
  int64_t target = 0;      // households to swap
  int64_t selected = 0;    // households drawn that needed a partner
  int64_t unmatched = 0;   // draws with no partner within the radius
  double realized_rate = 0.0;
};

// Households are drawn without replacement with weight 1 / block population
// and paired with an unswapped household of equal size and adult count in a
// different block. Persons keep every attribute; only block codes move.
absl::StatusOr<SwapResult> SwapHouseholds(const Population& population,
                                          const SwapConfig& config);

std::string FormatSwapLog(const std::vector<SwapLogEntry>& log,
                          const GeoHierarchy& hierarchy);

}  // namespace dalab

#endif  // DALAB_SDL_SWAPPING_H_
