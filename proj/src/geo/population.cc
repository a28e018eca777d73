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

#include "dalab/geo/population.h"

#include <cmath>
#include <numeric>
#include <unordered_map>

#include "dalab/common/rng.h"
#include "dalab/common/status_macros.h"
#include "dalab/geo/age.h"
#include "fmt/format.h"

namespace dalab {

absl::StatusOr<std::vector<Household>> DeriveHouseholds(
    const std::vector<PersonRecord>& persons) {
  std::vector<Household> households;
  std::unordered_map<std::string, int> index;
  for (int i = 0; i < static_cast<int>(persons.size()); ++i) {
    const PersonRecord& p = persons[i];
    auto [it, inserted] =
        index.emplace(p.household_id, static_cast<int>(households.size()));
    if (inserted) {
      households.push_back({p.household_id, p.block, {}, 0});
    }
    Household& h = households[it->second];
    if (h.block != p.block) {
      return absl::NotFoundError(fmt::format(
          "household '{}' spans more than one block (person '{}')",
          p.household_id, p.person_id));
    }
    h.members.push_back(i);
    if (p.age >= kVotingAge) ++h.adults;
  }
  return households;
}

std::vector<int64_t> BlockPopulations(const Population& population) {
  std::vector<int64_t> counts(population.hierarchy.blocks().size(), 0);
  for (const PersonRecord& p : population.persons) {
    ++counts[population.hierarchy.OrdinalInLevel(p.block)];
  }
  return counts;
}

absl::Status PopulationConfig::Validate() const {
  for (int l = 1; l < kNumGeoLevels; ++l) {
    if (fanout[l] < 1) {
      return absl::InvalidArgumentError("geounit counts must be >= 1");
    }
  }
  if (!(block_mean_population > 0.0)) {
    return absl::InvalidArgumentError("block mean population must be > 0");
  }
  if (!(block_dispersion > 0.0)) {
    return absl::InvalidArgumentError("block dispersion must be > 0");
  }
  if (!(empty_block_probability >= 0.0 && empty_block_probability < 1.0)) {
    return absl::InvalidArgumentError(
        "empty block probability must be in [0, 1)");
  }
  if (household_size_probs.empty()) {
    return absl::InvalidArgumentError("household size distribution is empty");
  }
  double total = 0.0;
  for (double p : household_size_probs) {
    if (!(p >= 0.0)) {
      return absl::InvalidArgumentError(
          "household size probabilities must be nonnegative");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    return absl::InvalidArgumentError(fmt::format(
        "household size probabilities sum to {}, not 1", total));
  }
  auto in_unit = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!in_unit(adult_probability) || !in_unit(household_race_cohesion) ||
      !in_unit(dominant_share_min) || !in_unit(dominant_share_max) ||
      !in_unit(hispanic_share_min) || !in_unit(hispanic_share_max) ||
      dominant_share_min > dominant_share_max ||
      hispanic_share_min > hispanic_share_max) {
    return absl::InvalidArgumentError("probability parameter outside [0, 1]");
  }
  if (num_races < 1 || num_races > kMaxRaces) {
    return absl::InvalidArgumentError(
        fmt::format("race count must be in [1, {}]", kMaxRaces));
  }
  if (max_adult_age < kVotingAge || max_adult_age > kMaxAge) {
    return absl::InvalidArgumentError("max adult age out of range");
  }
  return absl::OkStatus();
}

std::vector<std::string> PopulationConfigKeys() {
  return {"population.states",
          "population.counties_per_state",
          "population.tracts_per_county",
          "population.blockgroups_per_tract",
          "population.blocks_per_blockgroup",
          "population.geocode_widths",
          "population.block_mean",
          "population.block_dispersion",
          "population.empty_block_probability",
          "population.households_per_block",
          "population.household_size_probs",
          "population.adult_probability",
          "population.max_adult_age",
          "population.races",
          "population.dominant_share_min",
          "population.dominant_share_max",
          "population.household_race_cohesion",
          "population.hispanic_share_min",
          "population.hispanic_share_max",
          "population.seed"};
}

absl::StatusOr<PopulationConfig> PopulationConfigFromKeys(
    const KeyValueConfig& kv) {
  PopulationConfig c;
  const char* fanout_keys[] = {
      nullptr,
      "population.states",
      "population.counties_per_state",
      "population.tracts_per_county",
      "population.blockgroups_per_tract",
      "population.blocks_per_blockgroup"};
  for (int l = 1; l < kNumGeoLevels; ++l) {
    ASSIGN_OR_RETURN(int64_t v, kv.GetInt(fanout_keys[l], c.fanout[l]));
    c.fanout[l] = static_cast<int>(v);
  }
  std::vector<int64_t> widths(c.widths.begin(), c.widths.end());
  ASSIGN_OR_RETURN(widths, kv.GetIntList("population.geocode_widths", widths));
  if (widths.size() != kNumGeoLevels) {
    return absl::InvalidArgumentError(
        "population.geocode_widths needs 6 entries");
  }
  for (int l = 0; l < kNumGeoLevels; ++l) c.widths[l] = static_cast<int>(widths[l]);
  ASSIGN_OR_RETURN(c.block_mean_population,
                   kv.GetDouble("population.block_mean", c.block_mean_population));
  ASSIGN_OR_RETURN(c.block_dispersion,
                   kv.GetDouble("population.block_dispersion", c.block_dispersion));
  ASSIGN_OR_RETURN(c.empty_block_probability,
                   kv.GetDouble("population.empty_block_probability",
                                c.empty_block_probability));
  ASSIGN_OR_RETURN(int64_t hpb, kv.GetInt("population.households_per_block",
                                          c.households_per_block));
  c.households_per_block = static_cast<int>(hpb);
  ASSIGN_OR_RETURN(c.household_size_probs,
                   kv.GetDoubleList("population.household_size_probs",
                                    c.household_size_probs));
  ASSIGN_OR_RETURN(c.adult_probability,
                   kv.GetDouble("population.adult_probability", c.adult_probability));
  ASSIGN_OR_RETURN(int64_t max_age,
                   kv.GetInt("population.max_adult_age", c.max_adult_age));
  c.max_adult_age = static_cast<int>(max_age);
  ASSIGN_OR_RETURN(int64_t races, kv.GetInt("population.races", c.num_races));
  c.num_races = static_cast<int>(races);
  ASSIGN_OR_RETURN(c.dominant_share_min,
                   kv.GetDouble("population.dominant_share_min", c.dominant_share_min));
  ASSIGN_OR_RETURN(c.dominant_share_max,
                   kv.GetDouble("population.dominant_share_max", c.dominant_share_max));
  ASSIGN_OR_RETURN(c.household_race_cohesion,
                   kv.GetDouble("population.household_race_cohesion",
                                c.household_race_cohesion));
  ASSIGN_OR_RETURN(c.hispanic_share_min,
                   kv.GetDouble("population.hispanic_share_min", c.hispanic_share_min));
  ASSIGN_OR_RETURN(c.hispanic_share_max,
                   kv.GetDouble("population.hispanic_share_max", c.hispanic_share_max));
  ASSIGN_OR_RETURN(c.seed, kv.GetUint("population.seed", c.seed));
  RETURN_IF_ERROR(c.Validate());
  return c;
}

namespace {

int SampleIndex(RngStream& rng, const std::vector<double>& weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  double u = rng.UniformDouble() * total;
  for (int i = 0; i < static_cast<int>(weights.size()); ++i) {
    u -= weights[i];
    if (u < 0.0) return i;
  }
  // Rounding fell off the end; return the last positive weight.
  for (int i = static_cast<int>(weights.size()) - 1; i >= 0; --i) {
    if (weights[i] > 0.0) return i;
  }
  return 0;
}

std::vector<double> BaseRaceWeights(int num_races) {
  std::vector<double> w(num_races);
  for (int r = 0; r < num_races; ++r) w[r] = 1.0 / ((r + 1.0) * (r + 1.0));
  return w;
}

struct TractProfile {
  int dominant_race = 0;
  double hispanic_share = 0.0;
};

}  // namespace

absl::StatusOr<Population> GeneratePopulation(const PopulationConfig& config) {
  RETURN_IF_ERROR(config.Validate());
  Population pop;
  pop.num_races = config.num_races;
  ASSIGN_OR_RETURN(pop.hierarchy,
                   GeoHierarchy::Regular(config.widths, config.fanout));
  const GeoHierarchy& geo = pop.hierarchy;

  double mean_size = 0.0;
  for (size_t k = 0; k < config.household_size_probs.size(); ++k) {
    mean_size += (k + 1.0) * config.household_size_probs[k];
  }
  const double mean_households = config.block_mean_population / mean_size /
                                 (1.0 - config.empty_block_probability);
  const std::vector<double> base = BaseRaceWeights(config.num_races);

  std::unordered_map<int, TractProfile> tracts;
  for (int t : geo.AtLevel(GeoLevel::kTract)) {
    RngStream rng = RngStream::For(config.seed, "population.tract",
                                   geo.unit(t).code);
    TractProfile profile;
    profile.dominant_race = SampleIndex(rng, base);
    profile.hispanic_share =
        config.hispanic_share_min +
        (config.hispanic_share_max - config.hispanic_share_min) *
            rng.UniformDouble();
    tracts.emplace(t, profile);
  }

  int next_person = 1;
  int next_household = 1;
  for (int b : geo.blocks()) {
    RngStream rng =
        RngStream::For(config.seed, "population.block", geo.unit(b).code);
    const TractProfile& tract =
        tracts.at(geo.AncestorAt(b, GeoLevel::kTract));
    const double share =
        config.dominant_share_min +
        (config.dominant_share_max - config.dominant_share_min) *
            rng.UniformDouble();
    std::vector<double> race_weights(config.num_races);
    double base_total = std::accumulate(base.begin(), base.end(), 0.0);
    for (int r = 0; r < config.num_races; ++r) {
      race_weights[r] = (1.0 - share) * base[r] / base_total +
                        (r == tract.dominant_race ? share : 0.0);
    }

    int64_t num_households;
    if (config.households_per_block >= 0) {
      num_households = config.households_per_block;
    } else if (rng.UniformDouble() < config.empty_block_probability) {
      num_households = 0;
    } else {
      const double k = config.block_dispersion;
      const double lambda = rng.Gamma(k) * std::max(mean_households - 1.0, 0.0) / k;
      num_households = 1 + rng.Poisson(lambda);
    }

    for (int64_t h = 0; h < num_households; ++h) {
      const std::string household_id = fmt::format("H{:06d}", next_household++);
      const int size = SampleIndex(rng, config.household_size_probs) + 1;
      const int household_race = SampleIndex(rng, race_weights);
      const int ethnicity = rng.Bernoulli(tract.hispanic_share) ? 1 : 0;
      const bool cohesive = rng.Bernoulli(config.household_race_cohesion);
      for (int m = 0; m < size; ++m) {
        PersonRecord p;
        p.person_id = fmt::format("P{:06d}", next_person++);
        p.household_id = household_id;
        p.block = b;
        p.sex = static_cast<int>(rng.UniformBelow(kNumSexes));
        const bool adult = m == 0 || rng.Bernoulli(config.adult_probability);
        p.age = adult ? static_cast<int>(
                            rng.UniformInt(kVotingAge, config.max_adult_age))
                      : static_cast<int>(rng.UniformInt(0, kVotingAge - 1));
        p.race = cohesive ? household_race : SampleIndex(rng, race_weights);
        p.ethnicity = ethnicity;
        pop.persons.push_back(std::move(p));
      }
    }
  }
  ASSIGN_OR_RETURN(pop.households, DeriveHouseholds(pop.persons));
  return pop;
}

}  // namespace dalab
