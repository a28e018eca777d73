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

#include "dalab/harness/accuracy.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "absl/status/status.h"
#include "dalab/geo/age.h"
#include "fmt/format.h"

namespace dalab {
namespace {

int64_t Quantile(const std::vector<int64_t>& sorted, double p) {
  if (sorted.empty()) return 0;
  const auto n = static_cast<int64_t>(sorted.size());
  int64_t i = static_cast<int64_t>(std::ceil(p * static_cast<double>(n))) - 1;
  return sorted[std::clamp<int64_t>(i, 0, n - 1)];
}

}  // namespace

std::string_view StatisticName(Statistic s) {
  switch (s) {
    case Statistic::kTotal:
      return "total";
    case Statistic::kAge0To17:
      return "age_0_17";
    case Statistic::kAge18To64:
      return "age_18_64";
    case Statistic::kAge65Plus:
      return "age_65_plus";
  }
  return "";
}

Statistic AgeGroupOf(int age) {
  if (age < kVotingAge) return Statistic::kAge0To17;
  return age < 65 ? Statistic::kAge18To64 : Statistic::kAge65Plus;
}

std::vector<StatisticVector> GeounitStatistics(const Population& population) {
  const GeoHierarchy& geo = population.hierarchy;
  std::vector<StatisticVector> out(geo.size(), StatisticVector{});
  for (const PersonRecord& p : population.persons) {
    const int group = static_cast<int>(AgeGroupOf(p.age));
    for (int u = p.block; u >= 0; u = geo.unit(u).parent) {
      ++out[u][0];
      ++out[u][group];
    }
  }
  return out;
}

absl::StatusOr<std::vector<StatisticVector>> GeounitStatisticsFromTables(
    const PublishedTableSet& tables, const GeoHierarchy& hierarchy) {
  // Per table spec: whether it is a total, and the age group of each cell when
  // every cell stays within one group.
  const int num_specs = static_cast<int>(tables.specs.size());
  std::vector<char> is_total(num_specs, 0);
  std::vector<std::vector<int>> group_of(num_specs);
  for (int s = 0; s < num_specs; ++s) {
    const TableSpec& spec = tables.specs[s];
    bool complete = true;
    std::vector<int> group(spec.num_cells(), -1);
    bool split = false;
    for (int c = 0; c < spec.schema.num_cells(); ++c) {
      const int k = spec.cell_map[c];
      if (k < 0) {
        complete = false;
        continue;
      }
      const CellSchema::Attributes a = spec.schema.Decompose(c);
      const int lo = static_cast<int>(
          AgeGroupOf(spec.schema.AgeLevelLow(a.age_level)));
      const int hi = static_cast<int>(
          AgeGroupOf(spec.schema.AgeLevelHigh(a.age_level)));
      if (lo != hi || (group[k] >= 0 && group[k] != lo)) split = true;
      group[k] = lo;
    }
    if (!complete) continue;
    if (spec.num_cells() == 1) is_total[s] = 1;
    if (!split) group_of[s] = std::move(group);
  }
  std::vector<StatisticVector> out(hierarchy.size(), StatisticVector{});
  std::vector<char> have_total(hierarchy.size(), 0);
  std::vector<char> have_groups(hierarchy.size(), 0);
  for (const PublishedTable& t : tables.tables) {
    if (t.geounit < 0 || t.geounit >= hierarchy.size()) {
      return absl::InvalidArgumentError("table geounit out of range");
    }
    auto released = [&](int k) {
      return t.IsSuppressed(k) ? int64_t{0} : t.values[k];
    };
    if (is_total[t.spec] && !have_total[t.geounit]) {
      have_total[t.geounit] = 1;
      out[t.geounit][0] = released(0);
    } else if (!group_of[t.spec].empty() && !is_total[t.spec] &&
               !have_groups[t.geounit]) {
      have_groups[t.geounit] = 1;
      for (int k = 0; k < static_cast<int>(t.values.size()); ++k) {
        out[t.geounit][group_of[t.spec][k]] += released(k);
      }
    }
  }
  return out;
}

AccuracyAccumulator::AccuracyAccumulator(const GeoHierarchy& hierarchy) {
  for (int u = 0; u < hierarchy.size(); ++u) {
    levels_.push_back(hierarchy.unit(u).level);
    codes_.push_back(hierarchy.unit(u).code);
  }
}

void AccuracyAccumulator::Add(uint64_t seed,
                              const std::vector<StatisticVector>& truth,
                              const std::vector<StatisticVector>& released) {
  for (int u = 0; u < static_cast<int>(levels_.size()); ++u) {
    entries_.push_back({seed, u, truth[u], released[u]});
  }
}

std::vector<AccuracyRow> AccuracyAccumulator::Summary() const {
  std::vector<AccuracyRow> rows;
  for (int l = 0; l < kNumGeoLevels; ++l) {
    for (int s = 0; s < kNumStatistics; ++s) {
      std::vector<int64_t> errors;
      double truth_sum = 0.0;
      double abs_sum = 0.0;
      for (const Entry& e : entries_) {
        if (LevelIndex(levels_[e.unit]) != l) continue;
        const int64_t err = e.released[s] - e.truth[s];
        errors.push_back(err);
        abs_sum += static_cast<double>(std::abs(err));
        truth_sum += static_cast<double>(e.truth[s]);
      }
      if (errors.empty()) continue;
      std::sort(errors.begin(), errors.end());
      AccuracyRow row;
      row.level = LevelAt(l);
      row.statistic = static_cast<Statistic>(s);
      row.n = static_cast<int64_t>(errors.size());
      row.mae = abs_sum / static_cast<double>(row.n);
      row.mean_truth = truth_sum / static_cast<double>(row.n);
      row.relative_mae = row.mean_truth > 0 ? row.mae / row.mean_truth : 0.0;
      row.q05 = Quantile(errors, 0.05);
      row.q50 = Quantile(errors, 0.5);
      row.q95 = Quantile(errors, 0.95);
      rows.push_back(row);
    }
  }
  return rows;
}

std::string AccuracyAccumulator::Detail() const {
  std::string out = "seed,level,geocode,statistic,truth,released,error\n";
  for (const Entry& e : entries_) {
    for (int s = 0; s < kNumStatistics; ++s) {
      out += fmt::format("{},{},{},{},{},{},{}\n", e.seed,
                         LevelName(levels_[e.unit]), codes_[e.unit],
                         StatisticName(static_cast<Statistic>(s)), e.truth[s],
                         e.released[s], e.released[s] - e.truth[s]);
    }
  }
  return out;
}

const AccuracyRow* FindRow(const std::vector<AccuracyRow>& rows,
                           GeoLevel level, Statistic statistic) {
  for (const AccuracyRow& r : rows) {
    if (r.level == level && r.statistic == statistic) return &r;
  }
  return nullptr;
}

std::string FormatAccuracy(const std::vector<AccuracyRow>& rows) {
  std::string out =
      "level,statistic,n,mae,mean_truth,relative_mae,q05,q50,q95\n";
  for (const AccuracyRow& r : rows) {
    out += fmt::format("{},{},{},{:.6f},{:.6f},{:.6f},{},{},{}\n",
                       LevelName(r.level), StatisticName(r.statistic), r.n,
                       r.mae, r.mean_truth, r.relative_mae, r.q05, r.q50,
                       r.q95);
  }
  return out;
}

std::vector<BiasRow> SmallAreaBias(const std::vector<double>& truth,
                                   const std::vector<double>& estimate,
                                   int groups) {
  const size_t n = std::min(truth.size(), estimate.size());
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return truth[a] < truth[b]; });
  std::vector<BiasRow> rows;
  for (int g = 0; g < groups; ++g) {
    const size_t begin = n * g / groups;
    const size_t end = n * (g + 1) / groups;
    BiasRow row;
    row.group = g + 1;
    row.n = static_cast<int64_t>(end - begin);
    double sum = 0.0, sq = 0.0, t = 0.0;
    for (size_t i = begin; i < end; ++i) {
      const double err = estimate[order[i]] - truth[order[i]];
      sum += err;
      sq += err * err;
      t += truth[order[i]];
    }
    if (row.n > 0) {
      const double m = static_cast<double>(row.n);
      row.mean_truth = t / m;
      row.mean_error = sum / m;
      if (row.n > 1) {
        const double var = (sq - m * row.mean_error * row.mean_error) / (m - 1);
        row.se = std::sqrt(std::max(var, 0.0) / m);
      }
    }
    rows.push_back(row);
  }
  return rows;
}

std::string FormatSmallAreaBias(const std::vector<BiasRow>& rows) {
  std::string out = "group,n,mean_truth,mean_error,se\n";
  for (const BiasRow& r : rows) {
    out += fmt::format("{},{},{:.6f},{:.6f},{:.6f}\n", r.group, r.n,
                       r.mean_truth, r.mean_error, r.se);
  }
  return out;
}

}  // namespace dalab
