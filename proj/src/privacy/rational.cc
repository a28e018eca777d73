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

#include "dalab/privacy/rational.h"

#include <cmath>

namespace dalab {

Rational RationalAtLeast(double x) {
  int k = 40;
  while (k > 0 && std::ldexp(x, k) >= std::ldexp(1.0, 50)) --k;
  Rational r;
  r.den = uint64_t{1} << k;
  const double scaled = std::ceil(std::ldexp(x, k));
  r.num = scaled < 1.0 ? 1 : static_cast<uint64_t>(scaled);
  return r;
}

}  // namespace dalab
