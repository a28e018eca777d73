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

#include "dalab/geo/age.h"

#include <array>

#include "fmt/format.h"

namespace dalab {
namespace {

constexpr std::array<int, kNumAgeBins> kBinLow = {
    0,  1,  2,  3,  4,  5,  6,  7,  8,  9,  10, 11, 12, 13, 14, 15, 16, 17, 18,
    19, 20, 21, 22, 25, 30, 35, 40, 45, 50, 55, 60, 62, 65, 67, 70, 75, 80, 85};

struct BinTable {
  std::array<int, kMaxAge + 1> bin{};
  constexpr BinTable() {
    int b = 0;
    for (int age = 0; age <= kMaxAge; ++age) {
      while (b + 1 < kNumAgeBins && kBinLow[b + 1] <= age) ++b;
      bin[age] = b;
    }
  }
};

constexpr BinTable kTable;

}  // namespace

absl::StatusOr<int> AgeBin(int age) {
  if (age < 0 || age > kMaxAge) {
    return absl::OutOfRangeError(
        fmt::format("age {} outside [0, {}]", age, kMaxAge));
  }
  return kTable.bin[age];
}

int AgeBinOf(int age) { return kTable.bin[age]; }

int AgeBinLow(int bin) { return kBinLow[bin]; }

int AgeBinHigh(int bin) {
  return bin + 1 < kNumAgeBins ? kBinLow[bin + 1] - 1 : kMaxAge;
}

std::string AgeBinLabel(int bin) {
  const int lo = AgeBinLow(bin);
  const int hi = AgeBinHigh(bin);
  if (bin == kNumAgeBins - 1) return fmt::format("{}+", lo);
  if (lo == hi) return fmt::format("{}", lo);
  return fmt::format("[{},{}]", lo, hi);
}

}  // namespace dalab
