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

#include "dalab/privacy/discrete_samplers.h"

#include <cmath>

#include "fmt/format.h"

namespace dalab {
namespace {

using u128 = unsigned __int128;

bool SampleBernoulliRatio(u128 num, u128 den, RngStream& rng) {
  return rng.UniformBelow128(den) < num;
}

// Largest a with a^2 * den <= num.
uint64_t FloorSqrtRatio(uint64_t num, uint64_t den) {
  uint64_t a = static_cast<uint64_t>(
      std::floor(std::sqrt(static_cast<double>(num) / static_cast<double>(den))));
  while (a > 0 && static_cast<u128>(a) * a * den > num) --a;
  while (static_cast<u128>(a + 1) * (a + 1) * den <= num) ++a;
  return a;
}

double LogNormalizer(double sigma2) {
  thread_local double cached_sigma2 = -1.0;
  thread_local double cached_log_z = 0.0;
  if (sigma2 == cached_sigma2) return cached_log_z;
  // Terms below exp(-60) relative to the mode are negligible in double.
  const int64_t m = static_cast<int64_t>(std::ceil(std::sqrt(120.0 * sigma2))) + 1;
  long double z = 1.0L;
  for (int64_t k = 1; k <= m; ++k) {
    z += 2.0L * std::exp(-static_cast<long double>(k) * k / (2.0L * sigma2));
  }
  cached_sigma2 = sigma2;
  cached_log_z = static_cast<double>(std::log(z));
  return cached_log_z;
}

}  // namespace

bool SampleBernoulliExp(u128 num, u128 den, RngStream& rng) {
  while (num > den) {
    if (!SampleBernoulliExp(1, 1, rng)) return false;
    num -= den;
  }
  u128 k = 1;
  while (SampleBernoulliRatio(num, den * k, rng)) ++k;
  return (k & 1) == 1;
}

int64_t SampleDiscreteLaplaceScale(uint64_t num, uint64_t den,
                                   RngStream& rng) {
  while (true) {
    const uint64_t u = rng.UniformBelow(num);
    if (!SampleBernoulliExp(u, num, rng)) continue;
    uint64_t v = 0;
    while (SampleBernoulliExp(1, 1, rng)) ++v;
    const u128 x = static_cast<u128>(u) + static_cast<u128>(num) * v;
    const int64_t y = static_cast<int64_t>(x / den);
    const bool negative = rng.UniformBelow(2) == 1;
    if (negative && y == 0) continue;
    return negative ? -y : y;
  }
}

int64_t SampleDiscreteGaussianExact(const Rational& sigma2, RngStream& rng) {
  const uint64_t n = sigma2.num;
  const uint64_t d = sigma2.den;
  const uint64_t t = FloorSqrtRatio(n, d) + 1;
  const u128 td = static_cast<u128>(t) * d;
  const u128 limit = (static_cast<u128>(1) << 62) / td;
  const u128 den = static_cast<u128>(2) * n * d * t * t;
  while (true) {
    const int64_t y = SampleDiscreteLaplaceScale(t, 1, rng);
    const u128 abs_y = static_cast<u128>(y < 0 ? -y : y);
    if (abs_y > limit) continue;
    const u128 a = abs_y * td;
    const u128 diff = a >= n ? a - n : n - a;
    if (SampleBernoulliExp(diff * diff, den, rng)) return y;
  }
}

absl::StatusOr<int64_t> DiscreteGaussianSample(double sigma2, RngStream& rng) {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2) || sigma2 >= 0x1p49) {
    return absl::OutOfRangeError(
        fmt::format("discrete Gaussian variance {} must be in (0, 2^49)", sigma2));
  }
  return SampleDiscreteGaussianExact(RationalAtLeast(sigma2), rng);
}

absl::StatusOr<int64_t> DiscreteLaplaceSample(double epsilon, RngStream& rng) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon) || epsilon < 0x1p-40) {
    return absl::OutOfRangeError(
        fmt::format("discrete Laplace epsilon {} must be positive", epsilon));
  }
  const Rational scale = RationalAtLeast(1.0 / epsilon);
  return SampleDiscreteLaplaceScale(scale.num, scale.den, rng);
}

double DiscreteGaussianLogPmf(double sigma2, int64_t k) {
  const double kk = static_cast<double>(k);
  return -kk * kk / (2.0 * sigma2) - LogNormalizer(sigma2);
}

double DiscreteGaussianPmf(double sigma2, int64_t k) {
  return std::exp(DiscreteGaussianLogPmf(sigma2, k));
}

double DiscreteGaussianVariance(double sigma2) {
  const int64_t m = static_cast<int64_t>(std::ceil(std::sqrt(120.0 * sigma2))) + 1;
  long double v = 0.0L;
  for (int64_t k = 1; k <= m; ++k) {
    v += 2.0L * static_cast<long double>(k) * k * DiscreteGaussianPmf(sigma2, k);
  }
  return static_cast<double>(v);
}

double DiscreteLaplaceLogPmf(double epsilon, int64_t k) {
  const double q = std::exp(-epsilon);
  return std::log((1.0 - q) / (1.0 + q)) -
         epsilon * static_cast<double>(k < 0 ? -k : k);
}

double DiscreteLaplacePmf(double epsilon, int64_t k) {
  return std::exp(DiscreteLaplaceLogPmf(epsilon, k));
}

int64_t DiscreteGaussianTailBound(double sigma2, double mass) {
  double tail = 1.0 - DiscreteGaussianPmf(sigma2, 0);
  int64_t m = 0;
  while (tail >= mass) {
    ++m;
    tail -= 2.0 * DiscreteGaussianPmf(sigma2, m);
    if (m > 1000000000) break;
    // Once the direct terms are tiny, bound the tail by a geometric series.
    const double next = DiscreteGaussianPmf(sigma2, m + 1);
    const double ratio = std::exp(-(2.0 * m + 3.0) / (2.0 * sigma2));
    if (ratio < 1.0 && 2.0 * next / (1.0 - ratio) < mass) break;
  }
  return m;
}

int64_t DiscreteLaplaceTailBound(double epsilon, double mass) {
  // P(|Y| > m) = 2 exp(-eps (m + 1)) / (1 + exp(-eps)).
  const double q = std::exp(-epsilon);
  const double m = std::log(2.0 / ((1.0 + q) * mass)) / epsilon - 1.0;
  return m <= 0.0 ? 0 : static_cast<int64_t>(std::ceil(m));
}

}  // namespace dalab
