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

// Acceptance run: one PASS or FAIL line per criterion, with the measured
// quantities and the wall time of each check. Exits nonzero when any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dalab/attack/reconstruction.h"
#include "dalab/attack/reidentification.h"
#include "dalab/geo/age.h"
#include "dalab/harness/accuracy.h"
#include "dalab/harness/experiment.h"
#include "dalab/privacy/audits.h"
#include "dalab/sdl/suppression.h"
#include "dalab/sdl/swapping.h"
#include "dalab/tabulation/histogram.h"
#include "dalab/topdown/topdown.h"
#include "dalab/topdown/workload.h"
#include "fmt/format.h"

namespace dalab {
namespace {

using Clock = std::chrono::steady_clock;

double Since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = true;
  std::string failure;  // the first failed requirement
  std::string notes;

  void Require(bool ok, const std::string& what) {
    if (ok || !pass) {
      pass = pass && ok;
      return;
    }
    pass = false;
    failure = what;
  }
  void Note(const std::string& text) {
    notes += (notes.empty() ? "" : "; ") + text;
  }
  std::string Detail() const {
    if (pass) return notes;
    return "failed: " + failure + (notes.empty() ? "" : "; " + notes);
  }
};

Population World(uint64_t seed) {
  PopulationConfig config;
  config.seed = seed;
  return *GeneratePopulation(config);
}

std::vector<uint64_t> Seeds(int n) {
  std::vector<uint64_t> seeds;
  for (int s = 1; s <= n; ++s) seeds.push_back(s);
  return seeds;
}

// 1. Renyi divergences of the discrete Gaussian on adjacent count vectors.
Outcome RenyiSoundness() {
  Outcome out;
  const std::vector<double> alphas = {1.5, 2, 4, 8, 16, 32};
  const std::vector<std::pair<std::vector<int64_t>, std::vector<int64_t>>>
      pairs = {{{0}, {1}}, {{5, 2, 9}, {5, 3, 9}}, {{12, 0}, {11, 0}}};
  double worst = 0.0;
  for (double sigma2 : {0.5, 1.0, 4.0}) {
    for (const auto& [x, y] : pairs) {
      auto r = RenyiAudit(NoiseMechanism::Gaussian(sigma2), x, y, alphas);
      if (!r.ok()) {
        out.Require(false, r.status().ToString());
        continue;
      }
      out.Require(std::abs(r->charged_rho - 1.0 / (2 * sigma2)) < 1e-12,
                  "charged rho is not 1/(2 sigma2)");
      out.Require(r->rho_hat <= r->charged_rho * (1 + 1e-6),
                  fmt::format("rho_hat {} > charged {}", r->rho_hat,
                              r->charged_rho));
      worst = std::max(worst, r->rho_hat / r->charged_rho);
    }
  }
  out.Note(fmt::format("max rho_hat/charged {:.9f}", worst));
  return out;
}

// 2. Exhaustive Bayes over universes of up to four records.
Outcome PosteriorAudit() {
  Outcome out;
  struct Case {
    int records;
    std::vector<std::vector<int>> queries;
  };
  const std::vector<Case> cases = {
      {1, {{0}}},
      {2, {{0}, {0, 1}}},
      {3, {{0, 1, 2}}},
      {3, {{0}, {0, 1}, {1, 2}}},
      {4, {{0, 1}, {1, 2, 3}, {3}}},
      {4, {{0, 1, 2, 3}, {0, 2}}},
  };
  double worst = 0.0;
  int audits = 0;
  for (const Case& c : cases) {
    const int n = 1 << c.records;
    for (int prior_kind = 0; prior_kind < 3; ++prior_kind) {
      PosteriorAuditInput in;
      in.num_records = c.records;
      in.queries = c.queries;
      in.epsilon = std::log(2.0);
      double mass = 0.0;
      for (int v = 0; v < n; ++v) {
        double w = 1.0;
        if (prior_kind == 1) w = 1.0 + v + (v & 1) * 3;
        if (prior_kind == 2) w = (v == 0 || v == n - 1) ? 20.0 : 1.0;
        in.prior.push_back(w);
        mass += w;
      }
      for (double& p : in.prior) p /= mass;
      for (int target = 0; target < c.records; ++target) {
        in.target = target;
        auto r = PosteriorRatioAudit(in);
        if (!r.ok()) {
          out.Require(false, r.status().ToString());
          continue;
        }
        ++audits;
        worst = std::max(worst, r->max_posterior_ratio);
      }
    }
  }
  out.Require(worst <= 2.0 * (1 + 1e-9),
              fmt::format("posterior ratio {:.12f} > 2", worst));
  out.Note(fmt::format("{} audits, max ratio {:.9f}", audits, worst));
  return out;
}

// 3. Monte Carlo power of the optimal membership test against the bounds.
Outcome PowerBounds() {
  Outcome out;
  const double level = 0.05;
  auto gauss = MembershipPowerTest(NoiseMechanism::Gaussian(1.0), {3}, {4},
                                   level, 100'000, 17);
  auto bound = TradeoffPowerBound(0.5, level);
  auto laplace = MembershipPowerTest(NoiseMechanism::Laplace(std::log(2.0)),
                                     {3}, {4}, level, 100'000, 18);
  if (!gauss.ok() || !bound.ok() || !laplace.ok()) {
    out.Require(false, "power test did not run");
    return out;
  }
  const double laplace_bound = level * std::exp(std::log(2.0));
  out.Require(gauss->power <= *bound + 3 * gauss->standard_error,
              "gaussian power above the tradeoff bound");
  out.Require(laplace->power <= laplace_bound + 3 * laplace->standard_error,
              "laplace power above level * e^epsilon");
  out.Note(fmt::format("gaussian {:.4f} (bound {:.4f}), laplace {:.4f} "
                       "(bound {:.4f}), se {:.4f}/{:.4f}",
                       gauss->power, *bound, laplace->power, laplace_bound,
                       gauss->standard_error, laplace->standard_error));
  return out;
}

// 4. Contract of each TopDown run on the default world.
Outcome TopDownContract() {
  Outcome out;
  double slowest = 0.0;
  int64_t persons = 0;
  for (uint64_t seed : Seeds(5)) {
    const Population truth = World(seed);
    persons += static_cast<int64_t>(truth.persons.size());
    TopDownConfig config;
    config.seed = seed;
    const auto start = Clock::now();
    auto run = TopDownRun(truth, config);
    slowest = std::max(slowest, Since(start));
    if (!run.ok()) {
      out.Require(false, run.status().ToString());
      continue;
    }
    const GeoHierarchy& geo = truth.hierarchy;
    const CellSchema& schema = run->schema;
    bool consistent = true, nonnegative = true, zeros = true;
    for (int u = 0; u < geo.size(); ++u) {
      const auto& counts = run->estimates[u].counts;
      for (int64_t v : counts) nonnegative &= v >= 0;
      if (geo.unit(u).children.empty()) continue;
      std::vector<int64_t> sum(schema.num_cells(), 0);
      for (int c : geo.unit(u).children) {
        for (int k = 0; k < schema.num_cells(); ++k) {
          sum[k] += run->estimates[c].counts[k];
          if (counts[k] == 0 && run->estimates[c].counts[k] != 0) {
            zeros = false;
          }
        }
      }
      consistent &= sum == counts;
    }
    // The released microdata must realize every level.
    const std::vector<CellHistogram> again =
        TabulateAll(run->protected_population.persons, geo, schema);
    for (int u = 0; u < geo.size(); ++u) {
      consistent &= again[u].counts == run->estimates[u].counts;
    }
    const std::vector<CellHistogram> hist =
        TabulateAll(truth.persons, geo, schema);
    bool state_exact = true;
    for (int s : geo.AtLevel(GeoLevel::kState)) {
      state_exact &= run->estimates[s].Total() == hist[s].Total();
    }
    std::vector<int64_t> true_hh(geo.size(), 0), out_hh(geo.size(), 0);
    for (const Household& h : truth.households) ++true_hh[h.block];
    for (const Household& h : run->protected_population.households) {
      ++out_hh[h.block];
    }
    bool housing_exact = true;
    for (int b : geo.blocks()) housing_exact &= true_hh[b] == out_hh[b];
    const double declared = DefaultAllocation()->GlobalRho();
    out.Require(consistent, fmt::format("seed {} inconsistent", seed));
    out.Require(nonnegative, fmt::format("seed {} negative count", seed));
    out.Require(zeros, fmt::format("seed {} zero not propagated", seed));
    out.Require(state_exact, fmt::format("seed {} state total moved", seed));
    out.Require(housing_exact,
                fmt::format("seed {} block households moved", seed));
    out.Require(std::abs(run->ledger.Total() - declared) < 1e-9 &&
                    std::abs(declared - 2.63) < 1e-12,
                fmt::format("seed {} ledger {}", seed, run->ledger.Total()));
  }
  out.Require(slowest < 60.0, "run slower than 60 s");
  out.Note(fmt::format("5 worlds, {} persons, ledger 2.63, slowest run "
                       "{:.3f} s",
                       persons, slowest));
  return out;
}

// Profile multisets of a block consistent with its own tables, by brute
// force pruned only by cells exceeding their published value.
uint64_t EnumerateBlock(const PublishedTableSet& set, int block) {
  const CellSchema& schema = set.specs[0].schema;
  const CellSchema bins(AgeGranularity::kAgeBin, schema.num_races());
  std::vector<const PublishedTable*> own;
  int64_t persons = -1;
  for (const PublishedTable& t : set.tables) {
    if (t.geounit != block) continue;
    own.push_back(&t);
    if (set.specs[t.spec].name == "T1") persons = t.values[0];
  }
  std::vector<std::vector<int>> candidates;
  for (int p = 0; p < bins.num_cells(); ++p) {
    const CellSchema::Attributes a = bins.Decompose(p);
    const int c =
        schema.Cell(a.sex, AgeBinLow(a.age_level), a.race, a.ethnicity);
    std::vector<int> cells;
    for (const PublishedTable* t : own) {
      cells.push_back(set.specs[t->spec].cell_map[c]);
    }
    candidates.push_back(std::move(cells));
  }
  std::vector<std::vector<int64_t>> partial(own.size());
  for (size_t i = 0; i < own.size(); ++i) {
    partial[i].assign(own[i]->values.size(), 0);
  }
  uint64_t count = 0;
  std::function<void(size_t, int64_t)> visit = [&](size_t i, int64_t left) {
    if (i == candidates.size()) {
      if (left != 0) return;
      for (size_t t = 0; t < own.size(); ++t) {
        if (partial[t] != own[t]->values) return;
      }
      ++count;
      return;
    }
    int64_t n = 0;
    while (true) {
      visit(i + 1, left - n);
      if (n == left) break;
      bool over = false;
      for (size_t t = 0; t < own.size(); ++t) {
        const int k = candidates[i][t];
        if (k >= 0 && partial[t][k] + 1 > own[t]->values[k]) over = true;
      }
      if (over) break;
      for (size_t t = 0; t < own.size(); ++t) {
        if (candidates[i][t] >= 0) ++partial[t][candidates[i][t]];
      }
      ++n;
    }
    for (size_t t = 0; t < own.size(); ++t) {
      if (candidates[i][t] >= 0) partial[t][candidates[i][t]] -= n;
    }
  };
  visit(0, persons);
  return count;
}

// 5. Solution counts on small blocks and recovery from saturated tables.
Outcome ReconstructionOracle() {
  Outcome out;
  int blocks = 0;
  uint64_t largest = 0;
  double agreement_min = 1.0;
  for (uint64_t seed : Seeds(5)) {
    const Population pop = World(seed);
    const CellSchema schema(AgeGranularity::kSingleYear, pop.num_races);
    const PublishedTableSet set =
        *PublishTables(pop, *DefaultTableSpecs(schema));
    const std::vector<int64_t> sizes = BlockPopulations(pop);
    for (int b : pop.hierarchy.blocks()) {
      if (sizes[pop.hierarchy.OrdinalInLevel(b)] > 12) continue;
      auto ps = BlockProfileSystem(set, pop.hierarchy, b);
      if (!ps.ok()) {
        out.Require(false, ps.status().ToString());
        continue;
      }
      const CountResult count = CountSolutions(ps->system);
      const uint64_t expected = EnumerateBlock(set, b);
      out.Require(count.complete && count.count == expected,
                  fmt::format("block {} seed {}: {} vs {}",
                              pop.hierarchy.unit(b).code, seed, count.count,
                              expected));
      largest = std::max(largest, expected);
      ++blocks;
    }
    const std::vector<TableSpec> saturated = {
        *MarginalTable(schema, "S", true, AgeAxis::kAgeBin, true, true,
                       {GeoLevel::kBlock})};
    auto r = Reconstruct(*PublishTables(pop, saturated), pop.hierarchy);
    if (!r.ok()) {
      out.Require(false, r.status().ToString());
      continue;
    }
    const AgreementReport agreement = AgreementRate(r->persons, pop);
    agreement_min = std::min(agreement_min, agreement.OverallRate());
    out.Require(agreement.total_matched == agreement.total_persons &&
                    r->persons.size() == pop.persons.size(),
                fmt::format("seed {} saturated agreement {:.4f}", seed,
                            agreement.OverallRate()));
  }
  out.Require(blocks > 0, "no small blocks");
  out.Note(fmt::format("{} blocks of <= 12 persons match enumeration (largest "
                       "count {}), saturated agreement {:.0f}%",
                       blocks, largest, 100 * agreement_min));
  return out;
}

const ArmRun* FindRun(const ExperimentResult& r, Arm arm, uint64_t seed) {
  for (const ArmRun& run : r.runs) {
    if (run.arm == arm && run.seed == seed) return &run;
  }
  return nullptr;
}

double Confirmed(const AttackReport& a) {
  return a.at(Universe::kAll).ConfirmedRate();
}
std::optional<double> NonmodalPrecision(const AttackReport& a) {
  return a.at(Universe::kNonmodalUniques).Precision();
}

// 6. Reidentification risk ordering.
Outcome RiskOrdering(const ExperimentResult& r) {
  Outcome out;
  int seeds = 0;
  for (uint64_t seed : r.config.seeds) {
    const ArmRun* none = FindRun(r, Arm::kNone, seed);
    const ArmRun* td = FindRun(r, Arm::kTopDown, seed);
    if (none == nullptr || td == nullptr || !none->attack || !td->attack) {
      out.Require(false, fmt::format("seed {} missing an attack", seed));
      continue;
    }
    ++seeds;
    out.Require(Confirmed(*td->attack) < Confirmed(*none->attack),
                fmt::format("seed {} topdown confirmed not below none", seed));
    const auto a = NonmodalPrecision(*td->attack);
    const auto b = NonmodalPrecision(*none->attack);
    out.Require(a && b && *a < *b,
                fmt::format("seed {} topdown nonmodal precision not below "
                            "none",
                            seed));
  }
  auto pooled = [&](Arm arm) { return PooledAttack(r, arm); };
  const auto none = pooled(Arm::kNone);
  const auto swap = pooled(Arm::kSwap);
  const auto td = pooled(Arm::kTopDown);
  if (!none || !swap || !td) {
    out.Require(false, "pooled attack missing");
    return out;
  }
  const double cn = Confirmed(*none), cs = Confirmed(*swap),
               ct = Confirmed(*td);
  const double pn = NonmodalPrecision(*none).value_or(-1),
               ps = NonmodalPrecision(*swap).value_or(-1),
               pt = NonmodalPrecision(*td).value_or(-1);
  out.Require(seeds >= 5, "fewer than 5 seeds");
  out.Require(cn >= cs && cs >= ct, "confirmed rate order");
  out.Require(pn >= ps && ps >= pt, "nonmodal precision order");
  out.Note(fmt::format("{} seeds; confirmed none {:.3f} swap {:.3f} topdown "
                       "{:.3f}; nonmodal precision {:.3f} {:.3f} {:.3f}",
                       seeds, cn, cs, ct, pn, ps, pt));
  return out;
}

double CountyAgeMae(const std::vector<AccuracyRow>& rows) {
  double sum = 0.0;
  for (Statistic s : {Statistic::kAge0To17, Statistic::kAge18To64,
                      Statistic::kAge65Plus}) {
    sum += FindRow(rows, GeoLevel::kCounty, s)->mae;
  }
  return sum / 3;
}

// 7. Accuracy at matched risk, and relative accuracy by level.
Outcome AccuracyOrdering() {
  Outcome out;
  ExperimentConfig base;
  base.seeds = Seeds(20);
  ExperimentConfig td_config = base;
  td_config.arms = {Arm::kTopDown};
  auto td = RunExperiment(td_config);
  if (!td.ok()) {
    out.Require(false, td.status().ToString());
    return out;
  }
  const double td_risk = Confirmed(*PooledAttack(*td, Arm::kTopDown));
  const double td_mae = CountyAgeMae(td->accuracy[0]);

  // Every swap setting within 5 points of the TopDown risk; the closest one
  // is the comparison.
  struct Candidate {
    double rate;
    int radius;
    double risk;
    double mae;
  };
  std::vector<Candidate> matched;
  std::optional<Candidate> closest;
  for (int radius : {2, 5}) {
    for (double rate : {0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9,
                        1.0}) {
      ExperimentConfig c = base;
      c.arms = {Arm::kSwap};
      c.swap.target_rate = rate;
      c.swap.radius = radius;
      auto r = RunExperiment(c);
      if (!r.ok()) continue;
      const auto pooled = PooledAttack(*r, Arm::kSwap);
      if (!pooled) continue;
      const Candidate cand{rate, radius, Confirmed(*pooled),
                           CountyAgeMae(r->accuracy[0])};
      if (std::abs(cand.risk - td_risk) > 0.05) continue;
      matched.push_back(cand);
      if (!closest || std::abs(cand.risk - td_risk) <
                          std::abs(closest->risk - td_risk)) {
        closest = cand;
      }
    }
  }
  out.Require(closest.has_value(), "no swap setting matches the risk");
  if (closest) {
    out.Require(td_mae < closest->mae,
                fmt::format("topdown county age MAE {:.3f} >= swap {:.3f}",
                            td_mae, closest->mae));
    double worst = 0.0;
    for (const Candidate& c : matched) worst = std::max(worst, c.mae);
    out.Note(fmt::format("topdown risk {:.3f} MAE {:.3f}; swap rate {} radius "
                         "{} risk {:.3f} MAE {:.3f}; {} matched settings, "
                         "largest swap MAE {:.3f}",
                         td_risk, td_mae, closest->rate, closest->radius,
                         closest->risk, closest->mae, matched.size(), worst));
  }
  auto rel = [&](GeoLevel level) {
    return FindRow(td->accuracy[0], level, Statistic::kTotal)->relative_mae;
  };
  const double rb = rel(GeoLevel::kBlock), rc = rel(GeoLevel::kCounty),
               rs = rel(GeoLevel::kState);
  out.Require(rb > rc && rc > rs, "relative MAE not decreasing");
  out.Note(fmt::format("relative MAE block {:.4f} county {:.4f} state {:.4f}",
                       rb, rc, rs));
  return out;
}

// 8. County totals at equal global rho.
Outcome TopDownVersusBottomUp() {
  Outcome out;
  ExperimentConfig c;
  c.arms = {Arm::kTopDown, Arm::kBottomUp};
  c.seeds = Seeds(100);
  c.attack = false;
  auto r = RunExperiment(c);
  if (!r.ok()) {
    out.Require(false, r.status().ToString());
    return out;
  }
  int ok = 0;
  for (const ArmRun& run : r->runs) {
    ok += run.status.ok();
    out.Require(std::abs(run.ledger_rho - 2.63) < 1e-9,
                "ledger differs from 2.63");
  }
  out.Require(ok == 200, "a run failed");
  const double td = FindRow(r->accuracy[0], GeoLevel::kCounty,
                            Statistic::kTotal)->mae;
  const double bu = FindRow(r->accuracy[1], GeoLevel::kCounty,
                            Statistic::kTotal)->mae;
  out.Require(td < bu, "topdown county MAE not below bottom-up");
  out.Note(fmt::format("100 seeds; county total MAE topdown {:.3f}, "
                       "bottom-up {:.3f}",
                       td, bu));
  return out;
}

// 9. Block totals and voting-age counts survive swapping.
Outcome SwapInvariants() {
  Outcome out;
  int runs = 0;
  int64_t swaps = 0;
  for (uint64_t seed : Seeds(20)) {
    const Population pop = World(seed);
    auto counts = [](const Population& p) {
      std::map<int, std::pair<int64_t, int64_t>> m;
      for (const PersonRecord& r : p.persons) {
        ++m[r.block].first;
        if (r.age >= kVotingAge) ++m[r.block].second;
      }
      return m;
    };
    const auto before = counts(pop);
    for (double rate : {0.05, 0.25, 1.0}) {
      for (int radius : {1, 2, 5}) {
        SwapConfig config;
        config.target_rate = rate;
        config.radius = radius;
        config.seed = seed;
        auto r = SwapHouseholds(pop, config);
        if (!r.ok()) {
          out.Require(false, r.status().ToString());
          continue;
        }
        ++runs;
        swaps += static_cast<int64_t>(r->log.size());
        out.Require(counts(r->swapped) == before,
                    fmt::format("seed {} rate {} radius {}", seed, rate,
                                radius));
      }
    }
  }
  out.Note(fmt::format("{} swap runs, {} swaps, every block exact", runs,
                       swaps));
  return out;
}

// 10. Subtraction attack on suppressed table sets.
Outcome SuppressionSafety() {
  Outcome out;
  int64_t withheld = 0, narrow = 0, control_withheld = 0, control_disclosed = 0;
  for (uint64_t seed : Seeds(20)) {
    PopulationConfig pc;
    pc.seed = seed;
    pc.fanout = {1, 2, 2, 1, 1, 2};
    const Population pop = *GeneratePopulation(pc);
    const CellSchema schema(AgeGranularity::kSingleYear, pop.num_races);
    const PublishedTableSet set =
        *PublishTables(pop, *DefaultTableSpecs(schema));
    for (bool complementary : {true, false}) {
      SuppressionConfig config;
      config.complementary = complementary;
      auto s = SuppressTables(set, pop.hierarchy, config);
      if (!s.ok()) {
        out.Require(false, s.status().ToString());
        continue;
      }
      auto intervals = SubtractionAttack(s->tables, pop.hierarchy);
      if (!intervals.ok()) {
        out.Require(false, intervals.status().ToString());
        continue;
      }
      for (const CellInterval& c : *intervals) {
        if (complementary) {
          ++withheld;
          narrow += c.witnessed_hi - c.witnessed_lo < 1;
        } else {
          ++control_withheld;
          control_disclosed += c.hi - c.lo == 0;
        }
      }
    }
  }
  out.Require(narrow == 0, fmt::format("{} cells below width 1", narrow));
  out.Require(control_disclosed >= 1, "primary-only control leaked nothing");
  out.Note(fmt::format("20 table sets; {} withheld cells all width >= 1; "
                       "primary-only control: {} of {} cells width 0",
                       withheld, control_disclosed, control_withheld));
  return out;
}

std::string ReadAll(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 11. Two full default experiments write identical bytes.
Outcome Determinism(const std::vector<std::string>& dirs,
                    const std::vector<double>& seconds) {
  Outcome out;
  int files = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dirs[0])) {
    const auto name = entry.path().filename();
    const std::string a = ReadAll(entry.path());
    const std::string b = ReadAll(std::filesystem::path(dirs[1]) / name);
    out.Require(!a.empty() && a == b, "differs: " + name.string());
    ++files;
  }
  out.Require(files == 8, fmt::format("{} files written", files));
  const double slowest = *std::max_element(seconds.begin(), seconds.end());
  out.Require(slowest < 300.0, "default experiment slower than 5 min");
  out.Note(fmt::format("{} files identical; default experiment {:.1f} s and "
                       "{:.1f} s",
                       files, seconds[0], seconds[1]));
  return out;
}

int Main() {
  int failures = 0;
  auto report = [&](int n, const char* name, double limit,
                    const std::function<Outcome()>& check) {
    const auto start = Clock::now();
    Outcome o = check();
    const double seconds = Since(start);
    if (limit > 0 && seconds >= limit) {
      o.Require(false, fmt::format("took {:.1f} s, limit {:.0f} s", seconds,
                                   limit));
    }
    failures += !o.pass;
    std::printf("%s criterion %d: %s (%s; %.2f s)\n", o.pass ? "PASS" : "FAIL",
                n, name, o.Detail().c_str(), seconds);
    std::fflush(stdout);
  };

  // The default experiment runs twice; the first run also feeds the risk
  // ordering check.
  const std::filesystem::path root =
      std::filesystem::temp_directory_path() / "dalab_acceptance";
  std::filesystem::remove_all(root);
  std::vector<std::string> dirs = {(root / "a").string(),
                                   (root / "b").string()};
  std::vector<double> seconds;
  std::optional<ExperimentResult> first;
  absl::Status experiment_status;
  auto run_default = [&](int i) {
    const auto start = Clock::now();
    auto r = RunExperiment(ExperimentConfig{});
    if (r.ok()) {
      experiment_status.Update(WriteExperiment(*r, dirs[i]));
      if (i == 0) first = *std::move(r);
    } else {
      experiment_status.Update(r.status());
    }
    seconds.push_back(Since(start));
  };

  report(1, "zCDP soundness", 10, RenyiSoundness);
  report(2, "pure-DP posterior ratio", 30, PosteriorAudit);
  report(3, "membership power bounds", 120, PowerBounds);
  report(4, "TopDown contract", 0, TopDownContract);
  report(5, "reconstruction oracle", 120, ReconstructionOracle);
  report(6, "risk ordering", 0, [&] {
    run_default(0);
    if (!first) {
      Outcome o;
      o.Require(false, experiment_status.ToString());
      return o;
    }
    return RiskOrdering(*first);
  });
  report(7, "accuracy ordering", 0, AccuracyOrdering);
  report(8, "top-down beats bottom-up", 0, TopDownVersusBottomUp);
  report(9, "swap invariants", 0, SwapInvariants);
  report(10, "suppression safety", 0, SuppressionSafety);
  report(11, "end-to-end determinism", 0, [&] {
    if (!first) run_default(0);
    run_default(1);
    if (!experiment_status.ok()) {
      Outcome o;
      o.Require(false, experiment_status.ToString());
      return o;
    }
    return Determinism(dirs, seconds);
  });
  std::printf("%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}

}  // namespace
}  // namespace dalab

int main() { return dalab::Main(); }
