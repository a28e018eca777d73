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

#include "dalab/harness/uncertainty.h"

#include <cmath>
#include <utility>

#include "absl/status/status.h"
#include "dalab/common/rng.h"
#include "dalab/common/status_macros.h"
#include "dalab/privacy/discrete_samplers.h"
#include "dalab/privacy/rational.h"
#include "fmt/format.h"

namespace dalab {
namespace {

// Probability mass on [offset, offset + size).
struct Pmf {
  int64_t offset = 0;
  std::vector<long double> mass;
};

constexpr long double kNegligible = 1e-24L;

void Trim(Pmf& p) {
  size_t lo = 0, hi = p.mass.size();
  while (lo + 1 < hi && p.mass[lo] < kNegligible) ++lo;
  while (hi - 1 > lo && p.mass[hi - 1] < kNegligible) --hi;
  p.offset += static_cast<int64_t>(lo);
  p.mass = std::vector<long double>(p.mass.begin() + lo, p.mass.begin() + hi);
}

Pmf Convolve(const Pmf& a, const Pmf& b) {
  Pmf out;
  out.offset = a.offset + b.offset;
  out.mass.assign(a.mass.size() + b.mass.size() - 1, 0.0L);
  for (size_t i = 0; i < a.mass.size(); ++i) {
    if (a.mass[i] == 0.0L) continue;
    for (size_t j = 0; j < b.mass.size(); ++j) {
      out.mass[i + j] += a.mass[i] * b.mass[j];
    }
  }
  Trim(out);
  return out;
}

int CellsIn(const CellSchema& schema, Statistic s) {
  int n = 0;
  for (int c = 0; c < schema.num_cells(); ++c) {
    const int level = schema.Decompose(c).age_level;
    if (s == Statistic::kTotal) {
      ++n;
      continue;
    }
    const Statistic lo = AgeGroupOf(schema.AgeLevelLow(level));
    const Statistic hi = AgeGroupOf(schema.AgeLevelHigh(level));
    if (lo != hi) return -1;  // the schema cannot separate this group
    if (lo == s) ++n;
  }
  return n;
}

}  // namespace

absl::StatusOr<int64_t> DiscreteGaussianSumMoe(double sigma2, int k,
                                               double confidence) {
  if (!(sigma2 > 0.0) || k < 1 || !(confidence > 0.0 && confidence < 1.0)) {
    return absl::InvalidArgumentError(fmt::format(
        "bad margin-of-error query: sigma2={} k={} confidence={}", sigma2, k,
        confidence));
  }
  Pmf base;
  const int64_t reach =
      static_cast<int64_t>(std::ceil(14.0 * std::sqrt(sigma2))) + 2;
  base.offset = -reach;
  for (int64_t x = -reach; x <= reach; ++x) {
    base.mass.push_back(DiscreteGaussianPmf(sigma2, x));
  }
  Trim(base);
  Pmf sum;
  sum.mass = {1.0L};
  for (int rest = k; rest > 0; rest >>= 1) {
    if (rest & 1) sum = Convolve(sum, base);
    if (rest > 1) base = Convolve(base, base);
  }
  // The pmf is symmetric; accumulate outward from zero.
  auto at = [&](int64_t x) {
    const int64_t i = x - sum.offset;
    return i < 0 || i >= static_cast<int64_t>(sum.mass.size()) ? 0.0L
                                                                 : sum.mass[i];
  };
  long double covered = at(0);
  int64_t m = 0;
  const int64_t limit = -sum.offset + 1;
  while (covered < static_cast<long double>(confidence) && m < limit) {
    ++m;
    covered += at(m) + at(-m);
  }
  return m;
}

absl::StatusOr<std::vector<MoeRow>> PremeasurementMoe(
    const RhoAllocation& allocation, const CellSchema& schema,
    double confidence) {
  ASSIGN_OR_RETURN(Workload workload, WorkloadFromAllocation(allocation));
  std::vector<MoeRow> rows;
  for (int l = 0; l < kNumGeoLevels; ++l) {
    const LevelWorkload& lw = workload.levels[l];
    for (size_t g = 0; g < lw.groups.size(); ++g) {
      const QueryGroup group = lw.groups[g];
      if (group == QueryGroup::kHouseholdSize) continue;
      ASSIGN_OR_RETURN(double raw,
                       NoiseForRho(lw.rho[g], QueryGroupSensitivity(group)));
      const double sigma2 = RationalAtLeast(raw).ToDouble();
      for (int s = 0; s < kNumStatistics; ++s) {
        const auto stat = static_cast<Statistic>(s);
        int k = 0;
        if (group == QueryGroup::kTotal) {
          if (stat != Statistic::kTotal) continue;
          k = 1;
        } else {
          k = CellsIn(schema, stat);
          if (k <= 0) continue;
        }
        MoeRow row;
        row.level = LevelAt(l);
        row.statistic = stat;
        row.group = group;
        row.coordinates = k;
        row.sigma2 = sigma2;
        row.variance = k * DiscreteGaussianVariance(sigma2);
        ASSIGN_OR_RETURN(row.moe, DiscreteGaussianSumMoe(sigma2, k, confidence));
        rows.push_back(row);
      }
    }
  }
  return rows;
}

std::string FormatMoe(const std::vector<MoeRow>& rows) {
  std::string out =
      "level,statistic,query_group,coordinates,sigma2,variance,moe\n";
  for (const MoeRow& r : rows) {
    out += fmt::format("{},{},{},{},{:.9g},{:.9g},{}\n", LevelName(r.level),
                       StatisticName(r.statistic), QueryGroupName(r.group),
                       r.coordinates, r.sigma2, r.variance, r.moe);
  }
  return out;
}

absl::StatusOr<BootstrapResult> BootstrapUncertainty(
    const Population& protected_population, const TopDownConfig& config,
    int replicates, uint64_t seed) {
  if (replicates < 50) {
    return absl::InvalidArgumentError(fmt::format(
        "bootstrap needs at least 50 replicates, got {}", replicates));
  }
  const int n = protected_population.hierarchy.size();
  std::vector<std::vector<StatisticVector>> runs;
  for (int r = 0; r < replicates; ++r) {
    TopDownConfig c = config;
    c.diagnostic = false;
    c.seed = HashCombine(seed, static_cast<uint64_t>(r));
    ASSIGN_OR_RETURN(TopDownResult run, TopDownRun(protected_population, c));
    runs.push_back(GeounitStatistics(run.protected_population));
  }
  BootstrapResult result;
  result.replicates = replicates;
  result.sd.resize(n);
  for (int u = 0; u < n; ++u) {
    for (int s = 0; s < kNumStatistics; ++s) {
      double mean = 0.0;
      for (const auto& stats : runs) mean += static_cast<double>(stats[u][s]);
      mean /= replicates;
      double ss = 0.0;
      for (const auto& stats : runs) {
        const double d = static_cast<double>(stats[u][s]) - mean;
        ss += d * d;
      }
      result.sd[u][s] = std::sqrt(ss / (replicates - 1));
    }
  }
  return result;
}

std::string FormatBootstrap(const BootstrapResult& result,
                            const GeoHierarchy& hierarchy) {
  std::string out = "level,geocode,statistic,sd\n";
  for (int u = 0; u < static_cast<int>(result.sd.size()); ++u) {
    for (int s = 0; s < kNumStatistics; ++s) {
      out += fmt::format("{},{},{},{:.6f}\n", LevelName(hierarchy.unit(u).level),
                         hierarchy.unit(u).code,
                         StatisticName(static_cast<Statistic>(s)),
                         result.sd[u][s]);
    }
  }
  return out;
}

}  // namespace dalab
