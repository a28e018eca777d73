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

#include "dalab/common/rng.h"

#include <cmath>

namespace dalab {

uint64_t Mix64(uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

uint64_t StableHash(std::string_view bytes) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return Mix64(h);
}

uint64_t HashCombine(uint64_t a, uint64_t b) {
  return Mix64(a ^ (Mix64(b) + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
}

RngStream RngStream::For(uint64_t seed, std::string_view label,
                         std::string_view sublabel) {
  uint64_t key = HashCombine(Mix64(seed), StableHash(label));
  key = HashCombine(key, StableHash(sublabel));
  return RngStream(key);
}

uint64_t RngStream::UniformBelow(uint64_t n) {
  // Lemire's nearly-divisionless method.
  uint64_t x = (*this)();
  unsigned __int128 m = static_cast<unsigned __int128>(x) * n;
  uint64_t low = static_cast<uint64_t>(m);
  if (low < n) {
    const uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      x = (*this)();
      m = static_cast<unsigned __int128>(x) * n;
      low = static_cast<uint64_t>(m);
    }
  }
  return static_cast<uint64_t>(m >> 64);
}

unsigned __int128 RngStream::UniformBelow128(unsigned __int128 n) {
  if ((n >> 64) == 0) return UniformBelow(static_cast<uint64_t>(n));
  // Rejection sampling on the smallest enclosing power of two.
  int bits = 0;
  for (unsigned __int128 t = n - 1; t != 0; t >>= 1) ++bits;
  const unsigned __int128 mask =
      bits >= 128 ? ~static_cast<unsigned __int128>(0)
                  : ((static_cast<unsigned __int128>(1) << bits) - 1);
  while (true) {
    const unsigned __int128 hi = (*this)();
    const unsigned __int128 x = ((hi << 64) | (*this)()) & mask;
    if (x < n) return x;
  }
}

double RngStream::UniformDouble() {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

int64_t RngStream::UniformInt(int64_t lo, int64_t hi) {
  const uint64_t span = static_cast<uint64_t>(hi) - static_cast<uint64_t>(lo);
  if (span == std::numeric_limits<uint64_t>::max()) {
    return static_cast<int64_t>((*this)());
  }
  return static_cast<int64_t>(static_cast<uint64_t>(lo) +
                              UniformBelow(span + 1));
}

double RngStream::Normal() {
  double u1 = UniformDouble();
  while (u1 <= 0.0) u1 = UniformDouble();
  const double u2 = UniformDouble();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double RngStream::Gamma(double shape) {
  if (shape < 1.0) {
    double u = UniformDouble();
    while (u <= 0.0) u = UniformDouble();
    return Gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  while (true) {
    double x;
    double v;
    do {
      x = Normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = UniformDouble();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
      return d * v;
    }
  }
}

int64_t RngStream::Poisson(double mean) {
  if (mean <= 0.0) return 0;
  if (mean > 500.0) {
    const double x = std::round(mean + std::sqrt(mean) * Normal());
    return x < 0.0 ? 0 : static_cast<int64_t>(x);
  }
  double p = std::exp(-mean);
  double cdf = p;
  const double u = UniformDouble();
  int64_t k = 0;
  while (u > cdf && k < 100000) {
    ++k;
    p *= mean / static_cast<double>(k);
    cdf += p;
    if (p == 0.0) break;
  }
  return k;
}

}  // namespace dalab
