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

#include "dalab/sdl/swapping.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include "absl/status/status.h"
#include "dalab/common/csv.h"
#include "dalab/common/rng.h"
#include "fmt/format.h"

namespace dalab {

absl::Status SwapConfig::Validate() const {
  if (!(target_rate >= 0.0 && target_rate <= 1.0)) {
    return absl::InvalidArgumentError(
        fmt::format("swap rate must be in [0, 1], got {}", target_rate));
  }
  if (radius < 1) {
    return absl::InvalidArgumentError(
        fmt::format("swap radius must be at least 1, got {}", radius));
  }
  return absl::OkStatus();
}

absl::StatusOr<SwapResult> SwapHouseholds(const Population& population,
                                          const SwapConfig& config) {
  if (absl::Status s = config.Validate(); !s.ok()) return s;
  const GeoHierarchy& geo = population.hierarchy;
  const std::vector<Household>& households = population.households;
  const int n = static_cast<int>(households.size());

  SwapResult result;
  result.swapped = population;
  result.target = static_cast<int64_t>(
      std::floor(config.target_rate * static_cast<double>(n) + 1e-9));

  const std::vector<int64_t> block_pop = BlockPopulations(population);

  // Efraimidis-Spirakis: the largest log(u) / w are a weighted sample without
  // replacement. With w = 1 / pop the key is pop * log(u).
  RngStream select = RngStream::For(config.seed, "swap/select");
  std::vector<std::pair<double, int>> order;
  order.reserve(n);
  for (int h = 0; h < n; ++h) {
    double u = select.UniformDouble();
    if (u <= 0.0) u = 0x1p-60;
    const int64_t pop = block_pop[geo.OrdinalInLevel(households[h].block)];
    order.emplace_back(static_cast<double>(std::max<int64_t>(pop, 1)) *
                           std::log(u),
                       h);
  }
  std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });

  std::map<std::pair<int, int>, std::vector<int>> by_key;
  for (int h = 0; h < n; ++h) {
    by_key[{households[h].size(), households[h].adults}].push_back(h);
  }

  RngStream pick = RngStream::For(config.seed, "swap/partner");
  std::vector<char> swapped(n, 0);
  int64_t done = 0;
  std::vector<int> candidates;
  for (const auto& [key, h] : order) {
    if (done + 2 > result.target) break;
    if (swapped[h]) continue;
    ++result.selected;
    const Household& a = households[h];
    const std::vector<int>& same =
        by_key[{a.size(), a.adults}];
    int partner = -1;
    int ancestor = a.block;
    for (int hop = 1; hop <= config.radius && partner < 0; ++hop) {
      if (geo.unit(ancestor).parent < 0) break;
      ancestor = geo.unit(ancestor).parent;
      candidates.clear();
      for (int c : same) {
        if (swapped[c] || c == h || households[c].block == a.block) continue;
        if (geo.IsDescendantOrSelf(households[c].block, ancestor)) {
          candidates.push_back(c);
        }
      }
      if (!candidates.empty()) {
        partner = candidates[pick.UniformBelow(candidates.size())];
      }
    }
    if (partner < 0) {
      ++result.unmatched;
      continue;
    }
    const Household& b = households[partner];
    result.log.push_back({a.household_id, b.household_id, a.block, b.block});
    Household& sa = result.swapped.households[h];
    Household& sb = result.swapped.households[partner];
    std::swap(sa.block, sb.block);
    for (int m : sa.members) result.swapped.persons[m].block = sa.block;
    for (int m : sb.members) result.swapped.persons[m].block = sb.block;
    swapped[h] = swapped[partner] = 1;
    done += 2;
  }
  result.realized_rate =
      n == 0 ? 0.0 : static_cast<double>(done) / static_cast<double>(n);
  return result;
}

std::string FormatSwapLog(const std::vector<SwapLogEntry>& log,
                          const GeoHierarchy& hierarchy) {
  std::string out = "household_a,household_b,block_a,block_b\n";
  for (const SwapLogEntry& e : log) {
    out += CsvJoin({e.household_a, e.household_b,
                    hierarchy.unit(e.block_a).code,
                    hierarchy.unit(e.block_b).code});
    out += '\n';
  }
  return out;
}

}  // namespace dalab
