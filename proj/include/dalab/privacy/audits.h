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

#ifndef DALAB_PRIVACY_AUDITS_H_
#define DALAB_PRIVACY_AUDITS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/statusor.h"

namespace dalab {

// A per-coordinate additive integer noise mechanism.
struct NoiseMechanism {
  enum class Kind { kDiscreteGaussian, kDiscreteLaplace };
  Kind kind = Kind::kDiscreteGaussian;
  // sigma2 for the Gaussian, epsilon for the Laplace.
  double parameter = 1.0;

  static NoiseMechanism Gaussian(double sigma2) {
    return {Kind::kDiscreteGaussian, sigma2};
  }
  static NoiseMechanism Laplace(double epsilon) {
    return {Kind::kDiscreteLaplace, epsilon};
  }
  double LogPmf(int64_t k) const;
  // Smallest m with mass outside [-m, m] below 'mass'.
  int64_t TailBound(double mass) const;
};

// Largest power 1 - beta of a level-l test against a rho-zCDP mechanism:
// the inequality l^a p^(1-a) + (1-l)^a (1-p)^(1-a) <= exp(rho a (a-1)) is
// solved for p by bisection at each a on a geometric grid in (1, 64], and the
// smallest root is refined by golden-section search around the best grid
// point.
absl::StatusOr<double> TradeoffPowerBound(double rho, double level);

struct RenyiRow {
  double alpha = 0.0;
  double divergence = 0.0;  // D_alpha between the two output distributions
  double bound = 0.0;       // alpha * charged rho
};

struct RenyiAuditResult {
  std::vector<RenyiRow> rows;
  double rho_hat = 0.0;  // max over alpha of D_alpha / alpha
  double charged_rho = 0.0;
  // Upper bound on the error from truncating the support.
  double truncation_error = 0.0;
};

// Exact Renyi divergences between mechanism outputs on two count vectors of
// equal length. Coordinates are independent, so divergences add. The charged
// rho for the Gaussian is ||x - y||^2 / (2 sigma2).
absl::StatusOr<RenyiAuditResult> RenyiAudit(const NoiseMechanism& mechanism,
                                            const std::vector<int64_t>& x,
                                            const std::vector<int64_t>& y,
                                            const std::vector<double>& alphas);
std::string FormatRenyiAudit(const RenyiAuditResult& result);

// Tiny-universe Bayes audit. Each record carries a binary attribute; the
// released statistic is a set of counting queries (subsets of records that
// count attribute value 1), each answered with discrete Laplace noise at
// epsilon / (largest number of queries any record is in).
struct PosteriorAuditInput {
  int num_records = 1;
  std::vector<std::vector<int>> queries;
  // Prior over the 2^n attribute vectors; bit i is record i's attribute.
  std::vector<double> prior;
  int target = 0;
  double epsilon = 1.0;
};

struct PosteriorAuditResult {
  // max over outputs and attribute values of
  //   P[D_k = d | M(F) = s] / P[D_k = d | M(F without k) = s].
  double max_posterior_ratio = 0.0;
  // max of P[D_k = d | M(F) = s] / P[D_k = d]; reported, never bounded.
  double max_prior_posterior_ratio = 0.0;
  int64_t outputs = 0;
  double truncated_mass = 0.0;
};

absl::StatusOr<PosteriorAuditResult> PosteriorRatioAudit(
    const PosteriorAuditInput& input);

struct PowerTestResult {
  double power = 0.0;
  double standard_error = 0.0;
  double empirical_level = 0.0;
  int64_t trials = 0;
};

// Monte Carlo power of the most powerful level-l test of "output came from
// x" against "output came from y". The vectors may differ in at most one
// coordinate; the test is the randomized likelihood-ratio threshold built
// from exact pmfs.
absl::StatusOr<PowerTestResult> MembershipPowerTest(
    const NoiseMechanism& mechanism, const std::vector<int64_t>& x,
    const std::vector<int64_t>& y, double level, int64_t trials,
    uint64_t seed);

}  // namespace dalab

#endif  // DALAB_PRIVACY_AUDITS_H_
