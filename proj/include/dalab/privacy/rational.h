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

#ifndef DALAB_PRIVACY_RATIONAL_H_
#define DALAB_PRIVACY_RATIONAL_H_

#include <cstdint>

namespace dalab {

// Positive rational num/den with den a power of two.
struct Rational {
  uint64_t num = 0;
  uint64_t den = 1;

  double ToDouble() const {
    return static_cast<double>(num) / static_cast<double>(den);
  }
};

// Smallest num/2^k >= x, with k as large as possible while keeping num below
// 2^50 and k <= 40. Rounding up means a noise scale is never understated.
// Requires x > 0 and x < 2^50.
Rational RationalAtLeast(double x);

}  // namespace dalab

#endif  // DALAB_PRIVACY_RATIONAL_H_
