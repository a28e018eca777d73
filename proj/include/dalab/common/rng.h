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

#ifndef DALAB_COMMON_RNG_H_
#define DALAB_COMMON_RNG_H_

#include <cstdint>
#include <limits>
#include <string_view>

namespace dalab {

// Stable 64-bit hash of a byte string (FNV-1a followed by a finalizer). Used
// to derive stream keys; stable across platforms and runs.
uint64_t StableHash(std::string_view bytes);

// Combines two 64-bit values into one well-mixed key.
uint64_t HashCombine(uint64_t a, uint64_t b);

// SplitMix64 finalizer.
uint64_t Mix64(uint64_t x);

// Counter-based random stream. The i-th output is a pure function of
// (key, i), so independent streams keyed by (seed, geocode, query group) can
// be consumed in any order or concurrently with identical results.
//
// Satisfies UniformRandomBitGenerator, but callers inside this project use
// the member helpers so results do not depend on standard-library
// distribution implementations.
class RngStream {
 public:
  using result_type = uint64_t;

  explicit RngStream(uint64_t key) : key_(key) {}

  // Stream for (seed, label, sublabel).
  static RngStream For(uint64_t seed, std::string_view label,
                       std::string_view sublabel = {});

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    ++counter_;
    return Mix64(key_ + counter_ * kGamma);
  }

  // Uniform integer in [0, n). n must be positive.
  uint64_t UniformBelow(uint64_t n);
  // Uniform 128-bit integer in [0, n). n must be positive.
  unsigned __int128 UniformBelow128(unsigned __int128 n);
  // Uniform double in [0, 1) with 53 random bits.
  double UniformDouble();
  // Uniform integer in [lo, hi].
  int64_t UniformInt(int64_t lo, int64_t hi);
  bool Bernoulli(double p) { return UniformDouble() < p; }

  // Continuous variates used by the synthetic population generator. These are
  // not used by any privacy mechanism.
  double Normal();
  double Gamma(double shape);
  int64_t Poisson(double mean);

  uint64_t key() const { return key_; }
  uint64_t counter() const { return counter_; }

 private:
  static constexpr uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
  uint64_t key_;
  uint64_t counter_ = 0;
};

}  // namespace dalab

#endif  // DALAB_COMMON_RNG_H_
