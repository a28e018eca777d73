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

#include "dalab/topdown/topdown.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dalab/common/rng.h"
#include "dalab/common/status_macros.h"
#include "dalab/geo/age.h"
#include "dalab/tabulation/histogram.h"
#include "dalab/topdown/estimator.h"
#include "dalab/topdown/rounding.h"
#include "dalab/topdown/workload.h"
#include "fmt/format.h"

namespace dalab {
namespace {

// Confidential inputs shared by both runs.
struct Truth {
  CellSchema schema;
  std::vector<QueryAnswers> answers;    // indexed by geounit
  std::vector<int64_t> households;      // per geounit
  std::vector<int64_t> persons;         // per geounit
};

Truth Prepare(const Population& population, AgeGranularity age) {
  const GeoHierarchy& geo = population.hierarchy;
  Truth t{CellSchema(age, population.num_races), {}, {}, {}};
  std::vector<CellHistogram> hist = TabulateAll(population.persons, geo, t.schema);
  t.answers.resize(geo.size());
  t.households.assign(geo.size(), 0);
  t.persons.assign(geo.size(), 0);
  for (int u = 0; u < geo.size(); ++u) {
    t.persons[u] = hist[u].Total();
    t.answers[u].detailed = std::move(hist[u].counts);
    t.answers[u].household_sizes.assign(kNumHouseholdSizes, 0);
  }
  for (const Household& h : population.households) {
    const int bucket = std::min(h.size(), kNumHouseholdSizes) - 1;
    for (int u = h.block; u >= 0; u = geo.unit(u).parent) {
      ++t.households[u];
      ++t.answers[u].household_sizes[bucket];
    }
  }
  return t;
}

absl::StatusOr<RhoAllocation> AllocationFor(const TopDownConfig& config) {
  if (config.allocation.entries().empty()) return DefaultAllocation();
  return config.allocation;
}

// Measurements for one unit, by group.
struct UnitMeasurements {
  const NoisyMeasurement* detailed = nullptr;
  const NoisyMeasurement* total = nullptr;
  const NoisyMeasurement* household_size = nullptr;
};

std::vector<UnitMeasurements> IndexMeasurements(
    const std::vector<NoisyMeasurement>& all, int num_units) {
  std::vector<UnitMeasurements> index(num_units);
  for (const NoisyMeasurement& m : all) {
    switch (m.group) {
      case QueryGroup::kDetailed:
        index[m.geounit].detailed = &m;
        break;
      case QueryGroup::kTotal:
        index[m.geounit].total = &m;
        break;
      case QueryGroup::kHouseholdSize:
        index[m.geounit].household_size = &m;
        break;
    }
  }
  return index;
}

// Household count implied by a noisy household-size measurement.
int64_t NoisyHouseholds(const UnitMeasurements& m, int64_t persons) {
  if (persons == 0) return 0;
  int64_t count;
  if (m.household_size != nullptr) {
    double sum = 0.0;
    for (int64_t v : m.household_size->values) sum += std::max<int64_t>(v, 0);
    count = std::llround(sum);
  } else {
    count = (persons + 2) / 3;
  }
  return std::clamp<int64_t>(count, 1, persons);
}

// Fills the measurement part of an estimation problem for 'units'.
void FillMeasurements(const std::vector<int>& units,
                      const std::vector<UnitMeasurements>& index,
                      EstimationProblem& p) {
  p.num_rows = units.size();
  p.detailed.clear();
  p.totals.clear();
  for (int u : units) {
    for (int64_t v : index[u].detailed->values) p.detailed.push_back(v);
  }
  p.detailed_variance = index[units[0]].detailed->sigma2;
  if (index[units[0]].total != nullptr) {
    for (int u : units) p.totals.push_back(index[u].total->values[0]);
    p.total_variance = index[units[0]].total->sigma2;
  }
}

absl::Status RoundRows(const EstimationProblem& p,
                       const std::vector<double>& x,
                       const std::vector<int64_t>& column_totals,
                       std::vector<int64_t>& out) {
  std::vector<int64_t> lo(p.num_rows), hi(p.num_rows);
  for (int r = 0; r < p.num_rows; ++r) {
    const double sum = std::accumulate(x.begin() + static_cast<size_t>(r) * p.num_cells,
                                       x.begin() + static_cast<size_t>(r + 1) * p.num_cells,
                                       0.0);
    std::tie(lo[r], hi[r]) = RoundingRowBounds(sum, p.rows[r]);
  }
  ASSIGN_OR_RETURN(out, ControlledRound(x, p.num_rows, p.num_cells, column_totals,
                                        lo, hi));
  return absl::OkStatus();
}

absl::StatusOr<Population> Realize(const Population& population,
                                   const Truth& truth,
                                   const std::vector<GeounitEstimate>& estimates,
                                   const std::vector<UnitMeasurements>& index,
                                   bool housing_invariant, uint64_t seed) {
  const GeoHierarchy& geo = population.hierarchy;
  std::vector<std::vector<int64_t>> block_counts;
  std::vector<int64_t> households;
  for (int b : geo.blocks()) {
    block_counts.push_back(estimates[b].counts);
    const int64_t persons = estimates[b].Total();
    households.push_back(housing_invariant ? truth.households[b]
                                           : NoisyHouseholds(index[b], persons));
  }
  return SynthesizeMicrodata(geo, population.num_races, truth.schema,
                             block_counts, households, seed);
}

}  // namespace

int64_t GeounitEstimate::Total() const {
  return std::accumulate(counts.begin(), counts.end(), int64_t{0});
}

double GeounitEstimate::RealTotal() const {
  return std::accumulate(real.begin(), real.end(), 0.0);
}

absl::StatusOr<TopDownResult> TopDownRun(const Population& population,
                                         const TopDownConfig& config) {
  const GeoHierarchy& geo = population.hierarchy;
  ASSIGN_OR_RETURN(RhoAllocation allocation, AllocationFor(config));
  ASSIGN_OR_RETURN(Workload workload, WorkloadFromAllocation(allocation));
  RETURN_IF_ERROR(ValidateTopDownWorkload(workload));
  const Truth truth = Prepare(population, config.age);
  const int num_cells = truth.schema.num_cells();

  TopDownResult result;
  result.schema = truth.schema;
  for (int l = 0; l < kNumGeoLevels; ++l) {
    const std::vector<int>& units = geo.AtLevel(LevelAt(l));
    std::vector<QueryAnswers> answers;
    for (int u : units) answers.push_back(truth.answers[u]);
    ASSIGN_OR_RETURN(std::vector<NoisyMeasurement> m,
                     TakeNoisyMeasurements(geo, LevelAt(l), workload.levels[l],
                                           units, answers, "topdown",
                                           config.seed, result.ledger));
    for (NoisyMeasurement& x : m) result.measurements.push_back(std::move(x));
  }
  const std::vector<UnitMeasurements> index =
      IndexMeasurements(result.measurements, geo.size());

  const InvariantSpec& inv = config.invariants;
  auto constraint_for = [&](int u) {
    if (inv.state_total_population &&
        (geo.unit(u).level == GeoLevel::kState ||
         geo.unit(u).level == GeoLevel::kNation)) {
      return RowConstraint::Equal(truth.persons[u]);
    }
    if (inv.block_housing_units) {
      return truth.households[u] == 0 ? RowConstraint::Equal(0)
                                      : RowConstraint::AtLeast(truth.households[u]);
    }
    return RowConstraint::Free();
  };

  result.estimates.resize(geo.size());
  for (int u = 0; u < geo.size(); ++u) result.estimates[u].geounit = u;
  const bool round = !config.diagnostic;

  // Root.
  {
    EstimationProblem p;
    p.num_cells = num_cells;
    FillMeasurements({geo.root()}, index, p);
    p.rows = {constraint_for(geo.root())};
    p.nonnegative = round;
    ASSIGN_OR_RETURN(EstimationResult est, EstimateCounts(p));
    result.estimator_iterations += est.iterations;
    GeounitEstimate& e = result.estimates[geo.root()];
    if (round) RETURN_IF_ERROR(RoundRows(p, est.x, {}, e.counts));
    e.real = std::move(est.x);
  }

  for (int l = 1; l < kNumGeoLevels; ++l) {
    for (int parent : geo.AtLevel(LevelAt(l - 1))) {
      const std::vector<int>& children = geo.unit(parent).children;
      if (children.empty()) continue;
      EstimationProblem p;
      p.num_cells = num_cells;
      FillMeasurements(children, index, p);
      for (int c : children) p.rows.push_back(constraint_for(c));
      const GeounitEstimate& pe = result.estimates[parent];
      if (round) {
        p.column_totals.assign(pe.counts.begin(), pe.counts.end());
      } else {
        p.column_totals = pe.real;
      }
      p.nonnegative = round;
      absl::StatusOr<EstimationResult> est = EstimateCounts(p);
      if (!est.ok()) {
        return absl::Status(est.status().code(),
                            fmt::format("estimating children of {}: {}",
                                        geo.unit(parent).code,
                                        std::string(est.status().message())));
      }
      result.estimator_iterations += est->iterations;
      std::vector<int64_t> rounded;
      if (round) RETURN_IF_ERROR(RoundRows(p, est->x, pe.counts, rounded));
      for (size_t i = 0; i < children.size(); ++i) {
        GeounitEstimate& e = result.estimates[children[i]];
        e.real.assign(est->x.begin() + i * num_cells,
                      est->x.begin() + (i + 1) * num_cells);
        if (round) {
          e.counts.assign(rounded.begin() + i * num_cells,
                          rounded.begin() + (i + 1) * num_cells);
        }
      }
    }
  }

  if (round) {
    ASSIGN_OR_RETURN(result.protected_population,
                     Realize(population, truth, result.estimates, index,
                             inv.block_housing_units, config.seed));
  }
  return result;
}

absl::StatusOr<TopDownResult> BottomUpRun(const Population& population,
                                          const TopDownConfig& config) {
  const GeoHierarchy& geo = population.hierarchy;
  ASSIGN_OR_RETURN(RhoAllocation original, AllocationFor(config));
  ASSIGN_OR_RETURN(RhoAllocation allocation, CollapseToBlocks(original));
  ASSIGN_OR_RETURN(Workload workload, WorkloadFromAllocation(allocation));
  const int block_level = LevelIndex(GeoLevel::kBlock);
  if (workload.levels[block_level].RhoFor(QueryGroup::kDetailed) <= 0.0) {
    return absl::InvalidArgumentError("bottom-up needs a detailed query");
  }
  const Truth truth = Prepare(population, config.age);
  const int num_cells = truth.schema.num_cells();

  TopDownResult result;
  result.schema = truth.schema;
  const std::vector<int>& blocks = geo.blocks();
  {
    std::vector<QueryAnswers> answers;
    for (int b : blocks) answers.push_back(truth.answers[b]);
    ASSIGN_OR_RETURN(result.measurements,
                     TakeNoisyMeasurements(geo, GeoLevel::kBlock,
                                           workload.levels[block_level], blocks,
                                           answers, "bottomup", config.seed,
                                           result.ledger));
  }
  const std::vector<UnitMeasurements> index =
      IndexMeasurements(result.measurements, geo.size());
  const bool round = !config.diagnostic;
  result.estimates.resize(geo.size());
  for (int u = 0; u < geo.size(); ++u) {
    result.estimates[u].geounit = u;
    result.estimates[u].real.assign(num_cells, 0.0);
    if (round) result.estimates[u].counts.assign(num_cells, 0);
  }
  for (int b : blocks) {
    EstimationProblem p;
    p.num_cells = num_cells;
    FillMeasurements({b}, index, p);
    p.rows = {RowConstraint::Free()};
    p.nonnegative = round;
    ASSIGN_OR_RETURN(EstimationResult est, EstimateCounts(p));
    result.estimator_iterations += est.iterations;
    std::vector<int64_t> rounded;
    if (round) RETURN_IF_ERROR(RoundRows(p, est.x, {}, rounded));
    for (int u = b; u >= 0; u = geo.unit(u).parent) {
      GeounitEstimate& e = result.estimates[u];
      for (int c = 0; c < num_cells; ++c) {
        e.real[c] += est.x[c];
        if (round) e.counts[c] += rounded[c];
      }
    }
  }
  if (round) {
    std::vector<std::vector<int64_t>> block_counts;
    std::vector<int64_t> households;
    for (int b : blocks) {
      block_counts.push_back(result.estimates[b].counts);
      households.push_back(
          NoisyHouseholds(index[b], result.estimates[b].Total()));
    }
    ASSIGN_OR_RETURN(result.protected_population,
                     SynthesizeMicrodata(geo, population.num_races, truth.schema,
                                         block_counts, households, config.seed));
  }
  return result;
}

absl::StatusOr<Population> SynthesizeMicrodata(
    const GeoHierarchy& hierarchy, int num_races, const CellSchema& schema,
    const std::vector<std::vector<int64_t>>& block_counts,
    const std::vector<int64_t>& households, uint64_t seed) {
  const std::vector<int>& blocks = hierarchy.blocks();
  if (block_counts.size() != blocks.size() || households.size() != blocks.size()) {
    return absl::InvalidArgumentError("one histogram and household count per block");
  }
  Population out;
  out.hierarchy = hierarchy;
  out.num_races = num_races;
  int64_t next_person = 0;
  int64_t next_household = 0;
  for (size_t i = 0; i < blocks.size(); ++i) {
    const int block = blocks[i];
    if (block_counts[i].size() != static_cast<size_t>(schema.num_cells())) {
      return absl::InvalidArgumentError(fmt::format(
          "histogram for block {} has the wrong length", hierarchy.unit(block).code));
    }
    RngStream rng = RngStream::For(seed, "synthesize/ages", hierarchy.unit(block).code);
    std::vector<PersonRecord> adults, children;
    for (int c = 0; c < schema.num_cells(); ++c) {
      if (block_counts[i][c] < 0) {
        return absl::InvalidArgumentError("negative count in a block histogram");
      }
      const CellSchema::Attributes a = schema.Decompose(c);
      for (int64_t k = 0; k < block_counts[i][c]; ++k) {
        PersonRecord p;
        p.block = block;
        p.sex = a.sex;
        p.age = static_cast<int>(rng.UniformInt(schema.AgeLevelLow(a.age_level),
                                                schema.AgeLevelHigh(a.age_level)));
        p.race = a.race;
        p.ethnicity = a.ethnicity;
        (p.age >= kVotingAge ? adults : children).push_back(std::move(p));
      }
    }
    const int64_t persons = adults.size() + children.size();
    const int64_t num_households =
        persons == 0 ? 0 : std::clamp<int64_t>(households[i], 1, persons);
    const int64_t first_household = next_household;
    next_household += num_households;
    int64_t k = 0;
    for (std::vector<PersonRecord>* group : {&adults, &children}) {
      for (PersonRecord& p : *group) {
        p.person_id = fmt::format("T{:06d}", next_person++);
        p.household_id = fmt::format("TH{:06d}", first_household + k % num_households);
        ++k;
        out.persons.push_back(std::move(p));
      }
    }
  }
  ASSIGN_OR_RETURN(out.households, DeriveHouseholds(out.persons));
  return out;
}

}  // namespace dalab
