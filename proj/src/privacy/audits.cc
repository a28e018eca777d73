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

#include "dalab/privacy/audits.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dalab/common/csv.h"
#include "dalab/common/rng.h"
#include "dalab/privacy/discrete_samplers.h"
#include "fmt/format.h"

namespace dalab {
namespace {

double LogAddExp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

// log of l^a p^(1-a) + (1-l)^a (1-p)^(1-a).
double LogTradeoff(double alpha, double level, double p) {
  return LogAddExp(alpha * std::log(level) + (1.0 - alpha) * std::log(p),
                   alpha * std::log1p(-level) + (1.0 - alpha) * std::log1p(-p));
}

// Largest p in [level, 1) satisfying the inequality at this alpha.
double PowerRoot(double rho, double level, double alpha) {
  const double target = rho * alpha * (alpha - 1.0);
  double lo = level;
  double hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (LogTradeoff(alpha, level, mid) <= target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

// Limit of the inequality as alpha -> 1: KL(Bern(level) || Bern(p)) <= rho.
double KlPowerRoot(double rho, double level) {
  double lo = level;
  double hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double kl = level * std::log(level / mid) +
                      (1.0 - level) * (std::log1p(-level) - std::log1p(-mid));
    if (kl <= rho) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

}  // namespace

double NoiseMechanism::LogPmf(int64_t k) const {
  return kind == Kind::kDiscreteGaussian ? DiscreteGaussianLogPmf(parameter, k)
                                         : DiscreteLaplaceLogPmf(parameter, k);
}

int64_t NoiseMechanism::TailBound(double mass) const {
  return kind == Kind::kDiscreteGaussian
             ? DiscreteGaussianTailBound(parameter, mass)
             : DiscreteLaplaceTailBound(parameter, mass);
}

absl::StatusOr<double> TradeoffPowerBound(double rho, double level) {
  if (!(level > 0.0 && level < 1.0)) {
    return absl::OutOfRangeError(
        fmt::format("level {} must be in (0, 1)", level));
  }
  if (!(rho >= 0.0) || std::isnan(rho)) {
    return absl::OutOfRangeError(fmt::format("rho {} must be >= 0", rho));
  }
  if (rho == 0.0) return level;
  constexpr int kGrid = 400;
  const double log_lo = std::log(1e-6);
  const double log_hi = std::log(63.0);
  auto root_at = [&](double log_shift) {
    return PowerRoot(rho, level, 1.0 + std::exp(log_shift));
  };
  double best = 1.0;
  int best_i = 0;
  for (int i = 0; i < kGrid; ++i) {
    const double s = log_lo + (log_hi - log_lo) * i / (kGrid - 1);
    const double r = root_at(s);
    if (r < best) {
      best = r;
      best_i = i;
    }
  }
  // Golden-section refinement between the neighbors of the best grid point.
  const double step = (log_hi - log_lo) / (kGrid - 1);
  double a = log_lo + step * std::max(best_i - 1, 0);
  double b = log_lo + step * std::min(best_i + 1, kGrid - 1);
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - phi * (b - a);
  double d = a + phi * (b - a);
  double fc = root_at(c);
  double fd = root_at(d);
  for (int i = 0; i < 80; ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = root_at(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = root_at(d);
    }
  }
  return std::min({best, fc, fd, KlPowerRoot(rho, level)});
}

absl::StatusOr<RenyiAuditResult> RenyiAudit(const NoiseMechanism& mechanism,
                                            const std::vector<int64_t>& x,
                                            const std::vector<int64_t>& y,
                                            const std::vector<double>& alphas) {
  if (x.size() != y.size()) {
    return absl::InvalidArgumentError("count vectors differ in length");
  }
  if (!(mechanism.parameter > 0.0)) {
    return absl::OutOfRangeError("mechanism parameter must be positive");
  }
  RenyiAuditResult result;
  double l1 = 0.0;
  double l2sq = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double diff = static_cast<double>(x[i] - y[i]);
    l1 += std::abs(diff);
    l2sq += diff * diff;
  }
  result.charged_rho =
      mechanism.kind == NoiseMechanism::Kind::kDiscreteGaussian
          ? l2sq / (2.0 * mechanism.parameter)
          : 0.5 * (mechanism.parameter * l1) * (mechanism.parameter * l1);
  // Terms below exp(-80) of the largest term are dropped; their total is far
  // below 1e-12 of the sum.
  constexpr double kDrop = 80.0;
  result.truncation_error = 1e-30;
  for (double alpha : alphas) {
    if (!(alpha > 1.0)) {
      return absl::OutOfRangeError(fmt::format("alpha {} must exceed 1", alpha));
    }
    double divergence = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
      if (x[i] == y[i]) continue;
      auto log_term = [&](int64_t k) {
        return alpha * mechanism.LogPmf(k - x[i]) +
               (1.0 - alpha) * mechanism.LogPmf(k - y[i]);
      };
      // Locate the peak by scanning from a point near the tilted center.
      const double center = static_cast<double>(x[i]) +
                            (alpha - 1.0) * static_cast<double>(x[i] - y[i]);
      int64_t peak = static_cast<int64_t>(std::llround(center));
      while (log_term(peak + 1) > log_term(peak)) ++peak;
      while (log_term(peak - 1) > log_term(peak)) --peak;
      const double top = log_term(peak);
      double sum = 1.0;
      for (int64_t k = peak + 1;; ++k) {
        const double t = log_term(k) - top;
        if (t < -kDrop) break;
        sum += std::exp(t);
      }
      for (int64_t k = peak - 1;; --k) {
        const double t = log_term(k) - top;
        if (t < -kDrop) break;
        sum += std::exp(t);
      }
      divergence += (top + std::log(sum)) / (alpha - 1.0);
    }
    result.rows.push_back({alpha, divergence, alpha * result.charged_rho});
    result.rho_hat = std::max(result.rho_hat, divergence / alpha);
  }
  return result;
}

std::string FormatRenyiAudit(const RenyiAuditResult& result) {
  std::string out = "alpha,divergence,bound\n";
  for (const RenyiRow& r : result.rows) {
    out += CsvJoin({FormatDouble(r.alpha), FormatDouble(r.divergence),
                    FormatDouble(r.bound)});
    out += "\n";
  }
  return out;
}

absl::StatusOr<PosteriorAuditResult> PosteriorRatioAudit(
    const PosteriorAuditInput& in) {
  const int n = in.num_records;
  if (n < 1 || n > 6) {
    return absl::OutOfRangeError("universe must have 1 to 6 records");
  }
  const int num_db = 1 << n;
  if (static_cast<int>(in.prior.size()) != num_db) {
    return absl::InvalidArgumentError(
        fmt::format("prior needs {} entries", num_db));
  }
  double prior_total = 0.0;
  for (double p : in.prior) {
    if (!(p >= 0.0)) return absl::InvalidArgumentError("negative prior mass");
    prior_total += p;
  }
  if (std::abs(prior_total - 1.0) > 1e-9) {
    return absl::InvalidArgumentError("prior does not sum to 1");
  }
  if (in.target < 0 || in.target >= n) {
    return absl::OutOfRangeError("target record out of range");
  }
  if (!(in.epsilon > 0.0)) {
    return absl::OutOfRangeError("epsilon must be positive");
  }
  const int num_queries = static_cast<int>(in.queries.size());
  std::vector<int> multiplicity(n, 0);
  std::vector<int> masks(num_queries, 0);
  for (int q = 0; q < num_queries; ++q) {
    for (int r : in.queries[q]) {
      if (r < 0 || r >= n || (masks[q] >> r & 1)) {
        return absl::InvalidArgumentError("bad record index in query");
      }
      masks[q] |= 1 << r;
      ++multiplicity[r];
    }
  }
  const int max_mult = *std::max_element(multiplicity.begin(), multiplicity.end());
  const double eps_q = max_mult > 0 ? in.epsilon / max_mult : in.epsilon;

  PosteriorAuditResult result;
  const int k = in.target;
  double prior_d[2] = {0.0, 0.0};
  for (int x = 0; x < num_db; ++x) prior_d[x >> k & 1] += in.prior[x];

  // Counts per database, with and without the target record.
  std::vector<std::vector<int>> full(num_db, std::vector<int>(num_queries));
  std::vector<std::vector<int>> without(num_db, std::vector<int>(num_queries));
  for (int x = 0; x < num_db; ++x) {
    for (int q = 0; q < num_queries; ++q) {
      full[x][q] = __builtin_popcount(x & masks[q]);
      without[x][q] = __builtin_popcount(x & masks[q] & ~(1 << k));
    }
  }
  const int64_t tail =
      num_queries > 0 ? DiscreteLaplaceTailBound(eps_q, 1e-12 / num_queries) : 0;
  std::vector<int64_t> lo(num_queries);
  std::vector<int64_t> hi(num_queries);
  double outputs = 1.0;
  for (int q = 0; q < num_queries; ++q) {
    lo[q] = -tail;
    hi[q] = __builtin_popcount(masks[q]) + tail;
    outputs *= static_cast<double>(hi[q] - lo[q] + 1);
  }
  if (outputs > 2e8) {
    return absl::ResourceExhaustedError(
        fmt::format("{} outputs are too many to enumerate", outputs));
  }
  // pmf table indexed by (output - count + offset).
  const int64_t offset = tail + n + 1;
  std::vector<double> pmf(2 * offset + 1);
  for (int64_t v = -offset; v <= offset; ++v) {
    pmf[v + offset] = DiscreteLaplacePmf(eps_q, v);
  }
  result.truncated_mass = num_queries > 0 ? 1e-12 : 0.0;

  std::vector<int64_t> s(lo);
  while (true) {
    double post1[2] = {0.0, 0.0};
    double post2[2] = {0.0, 0.0};
    for (int x = 0; x < num_db; ++x) {
      if (in.prior[x] == 0.0) continue;
      double l_full = in.prior[x];
      double l_without = in.prior[x];
      for (int q = 0; q < num_queries; ++q) {
        l_full *= pmf[s[q] - full[x][q] + offset];
        l_without *= pmf[s[q] - without[x][q] + offset];
      }
      post1[x >> k & 1] += l_full;
      post2[x >> k & 1] += l_without;
    }
    const double z1 = post1[0] + post1[1];
    const double z2 = post2[0] + post2[1];
    for (int d = 0; d < 2; ++d) {
      if (prior_d[d] == 0.0 || post2[d] == 0.0) continue;
      const double ratio = (post1[d] / z1) / (post2[d] / z2);
      result.max_posterior_ratio = std::max(result.max_posterior_ratio, ratio);
      result.max_prior_posterior_ratio =
          std::max(result.max_prior_posterior_ratio, (post1[d] / z1) / prior_d[d]);
    }
    ++result.outputs;
    int q = 0;
    while (q < num_queries && s[q] == hi[q]) {
      s[q] = lo[q];
      ++q;
    }
    if (q == num_queries) break;
    ++s[q];
  }
  return result;
}

absl::StatusOr<PowerTestResult> MembershipPowerTest(
    const NoiseMechanism& mechanism, const std::vector<int64_t>& x,
    const std::vector<int64_t>& y, double level, int64_t trials,
    uint64_t seed) {
  if (x.size() != y.size()) {
    return absl::InvalidArgumentError("count vectors differ in length");
  }
  if (!(level > 0.0 && level < 1.0)) {
    return absl::OutOfRangeError("level must be in (0, 1)");
  }
  if (trials < 1) return absl::OutOfRangeError("trials must be positive");
  if (!(mechanism.parameter > 0.0)) {
    return absl::OutOfRangeError("mechanism parameter must be positive");
  }
  int coord = -1;
  for (size_t i = 0; i < x.size(); ++i) {
    if (x[i] == y[i]) continue;
    if (coord >= 0) {
      return absl::InvalidArgumentError(
          "vectors may differ in at most one coordinate");
    }
    coord = static_cast<int>(i);
  }
  RngStream rng1 = RngStream::For(seed, "power_test", "alternative");
  RngStream rng0 = RngStream::For(seed, "power_test", "null");
  RngStream coin = RngStream::For(seed, "power_test", "randomization");
  auto noise = [&](RngStream& r) -> absl::StatusOr<int64_t> {
    return mechanism.kind == NoiseMechanism::Kind::kDiscreteGaussian
               ? DiscreteGaussianSample(mechanism.parameter, r)
               : DiscreteLaplaceSample(mechanism.parameter, r);
  };

  PowerTestResult result;
  result.trials = trials;
  int64_t rejections1 = 0;
  int64_t rejections0 = 0;
  if (coord < 0) {
    // Identical hypotheses: the best test ignores the data.
    for (int64_t t = 0; t < trials; ++t) {
      if (coin.UniformDouble() < level) ++rejections1;
      if (coin.UniformDouble() < level) ++rejections0;
    }
  } else {
    int64_t shift = y[coord] - x[coord];
    const int64_t sign = shift > 0 ? 1 : -1;
    shift *= sign;
    // Reject when t > c, and with probability gamma when t == c, where t is
    // the output centered at the null value and mirrored so the alternative
    // lies above. The likelihood ratio is nondecreasing in t.
    const int64_t m = mechanism.TailBound(1e-15) + shift + 1;
    double above = 0.0;  // P0(t > c)
    int64_t c = m;
    while (c > -m) {
      const double at = std::exp(mechanism.LogPmf(c));
      if (above + at > level) break;
      above += at;
      --c;
    }
    const double gamma = (level - above) / std::exp(mechanism.LogPmf(c));
    auto reject = [&](int64_t t) {
      if (t > c) return true;
      if (t == c) return coin.UniformDouble() < gamma;
      return false;
    };
    for (int64_t t = 0; t < trials; ++t) {
      auto z1 = noise(rng1);
      if (!z1.ok()) return z1.status();
      if (reject(shift + sign * *z1)) ++rejections1;
      auto z0 = noise(rng0);
      if (!z0.ok()) return z0.status();
      if (reject(sign * *z0)) ++rejections0;
    }
  }
  result.power = static_cast<double>(rejections1) / trials;
  result.empirical_level = static_cast<double>(rejections0) / trials;
  result.standard_error =
      std::sqrt(std::max(result.power * (1.0 - result.power), 1e-12) / trials);
  return result;
}

}  // namespace dalab
