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

#include "dalab/harness/experiment.h"

#include <filesystem>
#include <fstream>
#include <set>
#include <utility>

#include "dalab/common/rng.h"
#include "dalab/common/status_macros.h"
#include "dalab/topdown/workload.h"
#include "fmt/format.h"

namespace dalab {
namespace {

constexpr const char* kExperimentKeys[] = {
    "experiment.arms",          "experiment.seeds",
    "swap.rate",                "swap.radius",
    "suppress.threshold",       "suppress.complementary",
    "suppress.node_limit",      "suppress.max_rounds",
    "topdown.person_rho",       "topdown.housing_rho",
    "topdown.detailed_share",   "topdown.state_invariant",
    "topdown.housing_invariant", "external.dropout",
    "external.age_error",       "external.max_age_shift",
    "attack.enabled",           "attack.joint_node_limit",
    "attack.block_node_limit",  "attack.count_node_limit",
};

// Prefixes every data line of a CSV (after its header) with 'prefix'.
std::string Prefixed(const std::string& csv, const std::string& prefix,
                     bool keep_header, const std::string& header_prefix) {
  std::string out;
  size_t start = 0;
  bool first = true;
  while (start < csv.size()) {
    size_t end = csv.find('\n', start);
    if (end == std::string::npos) end = csv.size();
    const std::string line = csv.substr(start, end - start);
    if (first) {
      if (keep_header) out += header_prefix + line + "\n";
      first = false;
    } else if (!line.empty()) {
      out += prefix + line + "\n";
    }
    start = end + 1;
  }
  return out;
}

std::string Sanitize(std::string_view message) {
  std::string out(message);
  for (char& c : out) {
    if (c == ',' || c == '\n' || c == '"') c = ';';
  }
  return out;
}

std::string Rate(std::optional<double> v) {
  return v.has_value() ? fmt::format("{:.6f}", *v) : "NA";
}

absl::Status WriteFile(const std::filesystem::path& path,
                       const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    return absl::UnavailableError(
        fmt::format("cannot write {}", path.string()));
  }
  out << text;
  out.close();
  if (!out) {
    return absl::UnavailableError(
        fmt::format("write failed for {}", path.string()));
  }
  return absl::OkStatus();
}

}  // namespace

std::string_view ArmName(Arm arm) {
  switch (arm) {
    case Arm::kNone:
      return "none";
    case Arm::kSwap:
      return "swap";
    case Arm::kSuppress:
      return "suppress";
    case Arm::kTopDown:
      return "topdown";
    case Arm::kBottomUp:
      return "bottom_up";
  }
  return "";
}

absl::StatusOr<Arm> ParseArm(std::string_view name) {
  if (name == "bottomup") return Arm::kBottomUp;
  for (int a = 0; a < kNumArms; ++a) {
    if (ArmName(static_cast<Arm>(a)) == name) return static_cast<Arm>(a);
  }
  return absl::InvalidArgumentError(fmt::format("unknown arm '{}'", name));
}

absl::Status ExperimentConfig::Validate() const {
  RETURN_IF_ERROR(population.Validate());
  if (arms.empty()) return absl::InvalidArgumentError("no arms to run");
  if (seeds.empty()) return absl::InvalidArgumentError("no seeds to run");
  if (!(person_rho > 0.0) || !(housing_rho > 0.0)) {
    return absl::InvalidArgumentError("topdown rho must be positive");
  }
  if (!(detailed_share > 0.0 && detailed_share < 1.0)) {
    return absl::InvalidArgumentError(
        "topdown detailed share must be in (0, 1)");
  }
  RETURN_IF_ERROR(swap.Validate());
  RETURN_IF_ERROR(suppression.Validate());
  RETURN_IF_ERROR(external.Validate());
  return absl::OkStatus();
}

absl::StatusOr<TopDownConfig> ExperimentConfig::TopDown(uint64_t seed) const {
  TopDownConfig c;
  ASSIGN_OR_RETURN(c.allocation,
                   DefaultAllocation(person_rho, housing_rho, detailed_share));
  c.invariants = invariants;
  c.seed = seed;
  return c;
}

std::vector<std::string> ExperimentConfigKeys() {
  std::vector<std::string> keys = PopulationConfigKeys();
  for (const char* k : kExperimentKeys) keys.emplace_back(k);
  return keys;
}

absl::StatusOr<ExperimentConfig> ExperimentConfigFromKeys(
    const KeyValueConfig& kv) {
  const std::vector<std::string> known = ExperimentConfigKeys();
  RETURN_IF_ERROR(
      kv.CheckKnownKeys(std::set<std::string>(known.begin(), known.end())));
  ExperimentConfig c;
  ASSIGN_OR_RETURN(c.population, PopulationConfigFromKeys(kv));
  std::vector<std::string> default_arms;
  for (Arm a : c.arms) default_arms.emplace_back(ArmName(a));
  ASSIGN_OR_RETURN(std::vector<std::string> arms,
                   kv.GetStringList("experiment.arms", default_arms));
  c.arms.clear();
  for (const std::string& name : arms) {
    ASSIGN_OR_RETURN(Arm a, ParseArm(name));
    c.arms.push_back(a);
  }
  std::vector<int64_t> default_seeds(c.seeds.begin(), c.seeds.end());
  ASSIGN_OR_RETURN(std::vector<int64_t> seeds,
                   kv.GetIntList("experiment.seeds", default_seeds));
  c.seeds.clear();
  for (int64_t s : seeds) {
    if (s < 0) return absl::InvalidArgumentError("seeds must be nonnegative");
    c.seeds.push_back(static_cast<uint64_t>(s));
  }
  ASSIGN_OR_RETURN(c.swap.target_rate,
                   kv.GetDouble("swap.rate", c.swap.target_rate));
  ASSIGN_OR_RETURN(int64_t radius, kv.GetInt("swap.radius", c.swap.radius));
  c.swap.radius = static_cast<int>(radius);
  ASSIGN_OR_RETURN(c.suppression.threshold,
                   kv.GetInt("suppress.threshold", c.suppression.threshold));
  ASSIGN_OR_RETURN(c.suppression.complementary,
                   kv.GetBool("suppress.complementary",
                              c.suppression.complementary));
  ASSIGN_OR_RETURN(c.suppression.node_limit,
                   kv.GetInt("suppress.node_limit", c.suppression.node_limit));
  ASSIGN_OR_RETURN(int64_t rounds,
                   kv.GetInt("suppress.max_rounds", c.suppression.max_rounds));
  c.suppression.max_rounds = static_cast<int>(rounds);
  ASSIGN_OR_RETURN(c.person_rho,
                   kv.GetDouble("topdown.person_rho", c.person_rho));
  ASSIGN_OR_RETURN(c.housing_rho,
                   kv.GetDouble("topdown.housing_rho", c.housing_rho));
  ASSIGN_OR_RETURN(c.detailed_share,
                   kv.GetDouble("topdown.detailed_share", c.detailed_share));
  ASSIGN_OR_RETURN(c.invariants.state_total_population,
                   kv.GetBool("topdown.state_invariant",
                              c.invariants.state_total_population));
  ASSIGN_OR_RETURN(c.invariants.block_housing_units,
                   kv.GetBool("topdown.housing_invariant",
                              c.invariants.block_housing_units));
  ASSIGN_OR_RETURN(c.external.dropout,
                   kv.GetDouble("external.dropout", c.external.dropout));
  ASSIGN_OR_RETURN(c.external.age_error,
                   kv.GetDouble("external.age_error", c.external.age_error));
  ASSIGN_OR_RETURN(int64_t shift, kv.GetInt("external.max_age_shift",
                                            c.external.max_age_shift));
  c.external.max_age_shift = static_cast<int>(shift);
  ASSIGN_OR_RETURN(c.attack, kv.GetBool("attack.enabled", c.attack));
  ASSIGN_OR_RETURN(c.reconstruction.joint_node_limit,
                   kv.GetInt("attack.joint_node_limit",
                             c.reconstruction.joint_node_limit));
  ASSIGN_OR_RETURN(c.reconstruction.block_node_limit,
                   kv.GetInt("attack.block_node_limit",
                             c.reconstruction.block_node_limit));
  ASSIGN_OR_RETURN(c.reconstruction.count_node_limit,
                   kv.GetInt("attack.count_node_limit",
                             c.reconstruction.count_node_limit));
  c.canonical = kv.Canonical();
  RETURN_IF_ERROR(c.Validate());
  return c;
}

absl::StatusOr<ProtectedRelease> Protect(Arm arm, const Population& truth,
                                         const ExperimentConfig& config,
                                         uint64_t seed) {
  const CellSchema schema(AgeGranularity::kSingleYear, truth.num_races);
  ASSIGN_OR_RETURN(std::vector<TableSpec> specs, DefaultTableSpecs(schema));
  ProtectedRelease release;
  switch (arm) {
    case Arm::kNone:
      release.microdata = truth;
      break;
    case Arm::kSwap: {
      SwapConfig swap = config.swap;
      swap.seed = seed;
      ASSIGN_OR_RETURN(SwapResult r, SwapHouseholds(truth, swap));
      release.log = FormatSwapLog(r.log, truth.hierarchy);
      release.microdata = std::move(r.swapped);
      break;
    }
    case Arm::kSuppress: {
      ASSIGN_OR_RETURN(PublishedTableSet tables,
                       PublishTables(truth, std::move(specs)));
      ASSIGN_OR_RETURN(SuppressionResult r,
                       SuppressTables(tables, truth.hierarchy,
                                      config.suppression));
      release.tables = std::move(r.tables);
      return release;
    }
    case Arm::kTopDown:
    case Arm::kBottomUp: {
      ASSIGN_OR_RETURN(TopDownConfig td, config.TopDown(seed));
      ASSIGN_OR_RETURN(TopDownResult r, arm == Arm::kTopDown
                                            ? TopDownRun(truth, td)
                                            : BottomUpRun(truth, td));
      release.microdata = std::move(r.protected_population);
      release.ledger = r.ledger;
      release.charged = true;
      break;
    }
  }
  ASSIGN_OR_RETURN(release.tables,
                   PublishTables(*release.microdata, std::move(specs)));
  return release;
}

absl::StatusOr<ExperimentResult> RunExperiment(const ExperimentConfig& config) {
  RETURN_IF_ERROR(config.Validate());
  ExperimentResult result;
  result.config = config;
  std::vector<AccuracyAccumulator> accuracy;
  std::vector<std::vector<double>> bias_truth(config.arms.size());
  std::vector<std::vector<double>> bias_released(config.arms.size());

  for (uint64_t seed : config.seeds) {
    PopulationConfig pc = config.population;
    pc.seed = seed;
    ASSIGN_OR_RETURN(const Population truth, GeneratePopulation(pc));
    if (accuracy.empty()) {
      result.hierarchy = truth.hierarchy;
      accuracy.assign(config.arms.size(),
                      AccuracyAccumulator(truth.hierarchy));
    }
    const std::vector<StatisticVector> truth_stats = GeounitStatistics(truth);
    ExternalFileConfig ec = config.external;
    ec.seed = seed;
    ASSIGN_OR_RETURN(const std::vector<ExternalRow> external,
                     MakeExternalFile(truth, ec));

    for (size_t a = 0; a < config.arms.size(); ++a) {
      ArmRun run;
      run.arm = config.arms[a];
      run.seed = seed;
      absl::StatusOr<ProtectedRelease> release =
          Protect(run.arm, truth, config, seed);
      if (release.ok() && release->microdata.has_value()) {
        run.released = GeounitStatistics(*release->microdata);
      } else if (release.ok()) {
        absl::StatusOr<std::vector<StatisticVector>> stats =
            GeounitStatisticsFromTables(release->tables, truth.hierarchy);
        if (stats.ok()) {
          run.released = *std::move(stats);
        } else {
          release = stats.status();
        }
      }
      if (!release.ok()) {
        run.status = release.status();
        result.runs.push_back(std::move(run));
        continue;
      }
      if (release->charged) {
        run.ledger_rho = release->ledger.Total();
        run.ledger_csv = release->ledger.ExportCsv();
      }
      accuracy[a].Add(seed, truth_stats, run.released);
      for (int b : truth.hierarchy.blocks()) {
        bias_truth[a].push_back(static_cast<double>(truth_stats[b][0]));
        bias_released[a].push_back(static_cast<double>(run.released[b][0]));
      }
      if (config.attack) {
        absl::StatusOr<Reconstruction> recon = Reconstruct(
            release->tables, truth.hierarchy, config.reconstruction);
        if (recon.ok()) {
          run.attack = Reidentify(recon->persons, external, truth);
        } else {
          run.attack_status = recon.status();
        }
      }
      result.runs.push_back(std::move(run));
    }
  }
  for (size_t a = 0; a < config.arms.size(); ++a) {
    result.accuracy.push_back(accuracy[a].Summary());
    result.accuracy_detail.push_back(accuracy[a].Detail());
    result.block_bias.push_back(
        SmallAreaBias(bias_truth[a], bias_released[a]));
  }
  return result;
}

std::optional<AttackReport> PooledAttack(const ExperimentResult& result,
                                         Arm arm) {
  std::optional<AttackReport> pooled;
  std::array<double, kNumUniverses> baseline_hits{};
  for (const ArmRun& run : result.runs) {
    if (run.arm != arm || !run.attack.has_value()) continue;
    if (!pooled.has_value()) {
      pooled = AttackReport{};
      pooled->agreement.persons.assign(kNumBlockSizeBins, 0);
      pooled->agreement.matched.assign(kNumBlockSizeBins, 0);
    }
    const AttackReport& r = *run.attack;
    for (int b = 0; b < kNumBlockSizeBins; ++b) {
      pooled->agreement.persons[b] += r.agreement.persons[b];
      pooled->agreement.matched[b] += r.agreement.matched[b];
    }
    pooled->agreement.total_persons += r.agreement.total_persons;
    pooled->agreement.total_matched += r.agreement.total_matched;
    for (int u = 0; u < kNumUniverses; ++u) {
      UniverseStats& s = pooled->universes[u];
      s.persons += r.universes[u].persons;
      s.putative += r.universes[u].putative;
      s.confirmed += r.universes[u].confirmed;
      baseline_hits[u] += r.universes[u].baseline.value_or(0.0) *
                          static_cast<double>(r.universes[u].persons);
    }
  }
  if (pooled.has_value()) {
    for (int u = 0; u < kNumUniverses; ++u) {
      UniverseStats& s = pooled->universes[u];
      if (s.persons > 0) {
        s.baseline = baseline_hits[u] / static_cast<double>(s.persons);
      }
    }
  }
  return pooled;
}

std::string ConfigHash(std::string_view canonical) {
  return fmt::format("{:016x}", StableHash(canonical));
}

absl::Status WriteExperiment(const ExperimentResult& result,
                             const std::string& dir) {
  const ExperimentConfig& config = result.config;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    return absl::UnavailableError(
        fmt::format("cannot create {}: {}", dir, ec.message()));
  }
  const std::filesystem::path root(dir);

  std::string manifest =
      fmt::format("config_hash={}\n", ConfigHash(config.canonical));
  std::string seeds, arms;
  for (uint64_t s : config.seeds) {
    seeds += (seeds.empty() ? "" : ",") + std::to_string(s);
  }
  for (Arm a : config.arms) {
    arms += (arms.empty() ? "" : ",") + std::string(ArmName(a));
  }
  manifest += fmt::format("seeds={}\narms={}\n", seeds, arms);

  std::string summary =
      "arm,status,seeds_ok,ledger_rho,county_age_mae,relative_mae_block,"
      "relative_mae_county,relative_mae_state,agreement,putative_rate,"
      "confirmed_rate,precision,nonmodal_unique_precision\n";
  std::string accuracy_csv =
      "arm,level,statistic,n,mae,mean_truth,relative_mae,q05,q50,q95\n";
  std::string detail_csv =
      "arm,seed,level,geocode,statistic,truth,released,error\n";
  std::string attack_csv =
      "arm,seed,universe,persons,putative,confirmed,putative_rate,"
      "confirmed_rate,precision,modal_baseline\n";
  std::string agreement_csv = "arm,seed,bin,persons,matched,agreement\n";
  std::string bias_csv = "arm,group,n,mean_truth,mean_error,se\n";
  std::string ledger_csv =
      "arm,seed,geolevel,query_group,sigma2,sensitivity,rho\n";

  for (size_t a = 0; a < config.arms.size(); ++a) {
    const Arm arm = config.arms[a];
    const std::string name(ArmName(arm));
    std::string status = "ok";
    int ok = 0;
    std::optional<double> rho;
    for (const ArmRun& run : result.runs) {
      if (run.arm != arm) continue;
      const std::string prefix = fmt::format("{},{},", name, run.seed);
      if (!run.status.ok()) {
        if (status == "ok") status = Sanitize(run.status.ToString());
        continue;
      }
      ++ok;
      if (!run.ledger_csv.empty()) {
        if (!rho.has_value()) rho = run.ledger_rho;
        ledger_csv += Prefixed(run.ledger_csv, prefix, false, "");
      }
      if (run.attack.has_value()) {
        attack_csv +=
            Prefixed(FormatReidentification(*run.attack), prefix, false, "");
        agreement_csv +=
            Prefixed(FormatAgreement(run.attack->agreement), prefix, false, "");
      } else if (!run.attack_status.ok() && status == "ok") {
        status = Sanitize("attack: " + run.attack_status.ToString());
      }
    }
    if (rho.has_value()) {
      manifest += fmt::format("ledger_rho.{}={:.9f}\n", name, *rho);
    }
    const std::vector<AccuracyRow>& rows = result.accuracy[a];
    accuracy_csv += Prefixed(FormatAccuracy(rows), name + ",", false, "");
    detail_csv += Prefixed(result.accuracy_detail[a], name + ",", false, "");
    bias_csv +=
        Prefixed(FormatSmallAreaBias(result.block_bias[a]), name + ",", false,
                 "");

    auto relative = [&](GeoLevel level) -> std::optional<double> {
      const AccuracyRow* r = FindRow(rows, level, Statistic::kTotal);
      if (r == nullptr) return std::nullopt;
      return r->relative_mae;
    };
    std::optional<double> county_age;
    double sum = 0.0;
    int groups = 0;
    for (Statistic s : {Statistic::kAge0To17, Statistic::kAge18To64,
                        Statistic::kAge65Plus}) {
      if (const AccuracyRow* r = FindRow(rows, GeoLevel::kCounty, s)) {
        sum += r->mae;
        ++groups;
      }
    }
    if (groups > 0) county_age = sum / groups;
    const std::optional<AttackReport> pooled = PooledAttack(result, arm);
    std::optional<double> agreement, putative, confirmed, precision, nonmodal;
    if (pooled.has_value()) {
      const UniverseStats& all = pooled->at(Universe::kAll);
      agreement = pooled->agreement.OverallRate();
      putative = all.PutativeRate();
      confirmed = all.ConfirmedRate();
      precision = all.Precision();
      nonmodal = pooled->at(Universe::kNonmodalUniques).Precision();
    }
    summary += fmt::format(
        "{},{},{},{},{},{},{},{},{},{},{},{},{}\n", name, status, ok,
        rho.has_value() ? fmt::format("{:.9f}", *rho) : "NA", Rate(county_age),
        Rate(relative(GeoLevel::kBlock)), Rate(relative(GeoLevel::kCounty)),
        Rate(relative(GeoLevel::kState)), Rate(agreement), Rate(putative),
        Rate(confirmed), Rate(precision), Rate(nonmodal));
  }

  RETURN_IF_ERROR(WriteFile(root / "manifest.txt", manifest));
  RETURN_IF_ERROR(WriteFile(root / "summary.csv", summary));
  RETURN_IF_ERROR(WriteFile(root / "accuracy.csv", accuracy_csv));
  RETURN_IF_ERROR(WriteFile(root / "accuracy_detail.csv", detail_csv));
  RETURN_IF_ERROR(WriteFile(root / "attack.csv", attack_csv));
  RETURN_IF_ERROR(WriteFile(root / "agreement.csv", agreement_csv));
  RETURN_IF_ERROR(WriteFile(root / "small_area_bias.csv", bias_csv));
  RETURN_IF_ERROR(WriteFile(root / "ledger.csv", ledger_csv));
  return absl::OkStatus();
}

}  // namespace dalab
