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

#ifndef DALAB_PRIVACY_DISCRETE_SAMPLERS_H_
#define DALAB_PRIVACY_DISCRETE_SAMPLERS_H_

#include <cstdint>

#include "absl/status/statusor.h"
#include "dalab/common/rng.h"
#include "dalab/privacy/rational.h"

namespace dalab {

// Exact samplers in the style of Canonne, Kamath and Steinke. All arithmetic
// is on integers; the only randomness is uniform integers from the stream.

// Bernoulli(exp(-num/den)).
bool SampleBernoulliExp(unsigned __int128 num, unsigned __int128 den,
                        RngStream& rng);

// pmf(k) proportional to exp(-|k| / scale), scale = num/den.
int64_t SampleDiscreteLaplaceScale(uint64_t num, uint64_t den, RngStream& rng);

// pmf(k) proportional to exp(-k^2 / (2 sigma2)), sigma2 = num/den.
int64_t SampleDiscreteGaussianExact(const Rational& sigma2, RngStream& rng);

// Checked entry points. The parameter is converted with RationalAtLeast, so
// the variance (or scale) actually used is never below the one requested.
absl::StatusOr<int64_t> DiscreteGaussianSample(double sigma2, RngStream& rng);
absl::StatusOr<int64_t> DiscreteLaplaceSample(double epsilon, RngStream& rng);

// Reference pmfs on the integers.
double DiscreteGaussianPmf(double sigma2, int64_t k);
double DiscreteGaussianLogPmf(double sigma2, int64_t k);
double DiscreteGaussianVariance(double sigma2);
double DiscreteLaplacePmf(double epsilon, int64_t k);
double DiscreteLaplaceLogPmf(double epsilon, int64_t k);

// Half-width m beyond which the two-sided tail mass is below 'mass'.
int64_t DiscreteGaussianTailBound(double sigma2, double mass);
int64_t DiscreteLaplaceTailBound(double epsilon, double mass);

}  // namespace dalab

#endif  // DALAB_PRIVACY_DISCRETE_SAMPLERS_H_
