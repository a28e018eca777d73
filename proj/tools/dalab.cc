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

// Command-line driver. Every subcommand writes CSV files and a manifest.txt
// of key=value lines into --out.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dalab/attack/reconstruction.h"
#include "dalab/attack/reidentification.h"
#include "dalab/common/csv.h"
#include "dalab/common/key_value_config.h"
#include "dalab/common/status_macros.h"
#include "dalab/geo/microdata_io.h"
#include "dalab/harness/accuracy.h"
#include "dalab/harness/experiment.h"
#include "dalab/harness/uncertainty.h"
#include "dalab/privacy/audits.h"
#include "dalab/tabulation/tables.h"
#include "fmt/format.h"

namespace dalab {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitConsistency = 3;

struct Options {
  std::string config_path;
  std::optional<uint64_t> seed;
  std::string out = "out";
  std::string in;
  std::string truth;
  std::string arm;
  int bootstrap = 0;
};

int ExitCodeFor(const absl::Status& status) {
  switch (status.code()) {
    case absl::StatusCode::kOk:
      return kExitOk;
    case absl::StatusCode::kInvalidArgument:
    case absl::StatusCode::kOutOfRange:
      return kExitConfig;
    case absl::StatusCode::kFailedPrecondition:
    case absl::StatusCode::kResourceExhausted:
      return kExitConsistency;
    default:
      return kExitFailure;
  }
}

// Splits the file into audit.* keys and everything else.
struct Config {
  KeyValueConfig audit;
  ExperimentConfig experiment;
  std::string hash;
};

absl::StatusOr<Config> LoadConfig(const Options& options) {
  KeyValueConfig all;
  if (!options.config_path.empty()) {
    absl::StatusOr<KeyValueConfig> loaded =
        KeyValueConfig::Load(options.config_path);
    if (!loaded.ok()) {
      // A missing or unreadable config file is a config error too.
      return absl::InvalidArgumentError(loaded.status().message());
    }
    all = *std::move(loaded);
  }
  Config config;
  KeyValueConfig rest;
  for (const auto& [key, value] : all.entries()) {
    if (key.rfind("audit.", 0) == 0) {
      config.audit.Set(key, value);
    } else {
      rest.Set(key, value);
    }
  }
  ASSIGN_OR_RETURN(config.experiment, ExperimentConfigFromKeys(rest));
  if (options.seed.has_value()) {
    config.experiment.population.seed = *options.seed;
    config.experiment.seeds = {*options.seed};
  }
  config.hash = ConfigHash(all.Canonical());
  return config;
}

uint64_t SeedOf(const Options& options, const Config& config) {
  return options.seed.value_or(config.experiment.population.seed);
}

std::filesystem::path Path(const std::string& dir, const char* name) {
  return std::filesystem::path(dir) / name;
}

absl::Status Write(const std::string& dir, const char* name,
                   std::string_view contents) {
  return WriteFile(Path(dir, name).string(), contents);
}

absl::Status PrepareOut(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    return absl::UnavailableError(
        fmt::format("cannot create {}: {}", dir, ec.message()));
  }
  return absl::OkStatus();
}

struct Manifest {
  Manifest(std::string command, std::string config_hash, uint64_t seed)
      : command(std::move(command)),
        config_hash(std::move(config_hash)),
        seed(seed) {}

  std::string command;
  std::string config_hash;
  uint64_t seed = 0;
  std::optional<double> ledger_rho;
  std::vector<std::pair<std::string, std::string>> extra;

  std::string Format() const {
    std::string out = fmt::format("command={}\nconfig_hash={}\nseed={}\n",
                                  command, config_hash, seed);
    out += "ledger_rho=" +
           (ledger_rho.has_value() ? fmt::format("{:.9f}", *ledger_rho)
                                   : std::string("NA")) +
           "\n";
    for (const auto& [k, v] : extra) out += k + "=" + v + "\n";
    return out;
  }
};

absl::StatusOr<Population> LoadPopulationDir(const std::string& dir) {
  return LoadPopulation(Path(dir, "microdata.csv").string(),
                        Path(dir, "hierarchy.csv").string());
}

absl::Status WritePopulationDir(const Population& pop, const std::string& dir) {
  return SavePopulation(pop, Path(dir, "microdata.csv").string(),
                        Path(dir, "hierarchy.csv").string());
}

absl::StatusOr<KeyValueConfig> LoadManifest(const std::string& dir) {
  return KeyValueConfig::Load(Path(dir, "manifest.txt").string());
}

// Published tables of a directory written by tabulate or protect.
absl::StatusOr<PublishedTableSet> LoadTablesDir(const std::string& dir,
                                                GeoHierarchy* hierarchy) {
  ASSIGN_OR_RETURN(KeyValueConfig manifest, LoadManifest(dir));
  ASSIGN_OR_RETURN(int64_t num_races, manifest.GetInt("num_races", -1));
  if (num_races < 1) {
    return absl::InvalidArgumentError(
        fmt::format("{} has no num_races in its manifest", dir));
  }
  ASSIGN_OR_RETURN(std::string geo_text,
                   ReadFile(Path(dir, "hierarchy.csv").string()));
  ASSIGN_OR_RETURN(*hierarchy, ParseHierarchy(geo_text));
  ASSIGN_OR_RETURN(std::string text, ReadFile(Path(dir, "tables.csv").string()));
  const CellSchema schema(AgeGranularity::kSingleYear,
                          static_cast<int>(num_races));
  ASSIGN_OR_RETURN(std::vector<TableSpec> specs, DefaultTableSpecs(schema));
  return ParsePublishedTables(text, *hierarchy, std::move(specs));
}

absl::Status Generate(const Options& options) {
  ASSIGN_OR_RETURN(Config config, LoadConfig(options));
  PopulationConfig pc = config.experiment.population;
  pc.seed = SeedOf(options, config);
  ASSIGN_OR_RETURN(Population pop, GeneratePopulation(pc));
  RETURN_IF_ERROR(PrepareOut(options.out));
  RETURN_IF_ERROR(WritePopulationDir(pop, options.out));
  Manifest m("generate", config.hash, pc.seed);
  m.extra = {{"num_races", std::to_string(pop.num_races)},
             {"persons", std::to_string(pop.persons.size())}};
  return Write(options.out, "manifest.txt", m.Format());
}

absl::Status Tabulate(const Options& options) {
  ASSIGN_OR_RETURN(Config config, LoadConfig(options));
  ASSIGN_OR_RETURN(Population pop, LoadPopulationDir(options.in));
  const CellSchema schema(AgeGranularity::kSingleYear, pop.num_races);
  ASSIGN_OR_RETURN(std::vector<TableSpec> specs, DefaultTableSpecs(schema));
  ASSIGN_OR_RETURN(PublishedTableSet set, PublishTables(pop, std::move(specs)));
  RETURN_IF_ERROR(PrepareOut(options.out));
  RETURN_IF_ERROR(Write(options.out, "hierarchy.csv",
                        FormatHierarchy(pop.hierarchy)));
  RETURN_IF_ERROR(Write(options.out, "tables.csv",
                        FormatPublishedTables(set, pop.hierarchy)));
  Manifest m("tabulate", config.hash, SeedOf(options, config));
  m.extra = {{"num_races", std::to_string(pop.num_races)},
             {"tables", std::to_string(set.tables.size())}};
  return Write(options.out, "manifest.txt", m.Format());
}

absl::Status ProtectCommand(const Options& options) {
  ASSIGN_OR_RETURN(Config config, LoadConfig(options));
  ASSIGN_OR_RETURN(Arm arm, ParseArm(options.arm));
  ASSIGN_OR_RETURN(Population truth, LoadPopulationDir(options.in));
  const uint64_t seed = SeedOf(options, config);
  ASSIGN_OR_RETURN(ProtectedRelease release,
                   Protect(arm, truth, config.experiment, seed));
  RETURN_IF_ERROR(PrepareOut(options.out));
  if (release.microdata.has_value()) {
    RETURN_IF_ERROR(WritePopulationDir(*release.microdata, options.out));
  } else {
    RETURN_IF_ERROR(Write(options.out, "hierarchy.csv",
                          FormatHierarchy(truth.hierarchy)));
  }
  RETURN_IF_ERROR(Write(options.out, "tables.csv",
                        FormatPublishedTables(release.tables,
                                              truth.hierarchy)));
  Manifest m("protect", config.hash, seed);
  if (release.charged) {
    m.ledger_rho = release.ledger.Total();
    RETURN_IF_ERROR(
        Write(options.out, "ledger.csv", release.ledger.ExportCsv()));
  }
  if (arm == Arm::kSwap) {
    RETURN_IF_ERROR(Write(options.out, "swap_log.csv", release.log));
  }
  m.extra = {{"arm", std::string(ArmName(arm))},
             {"num_races", std::to_string(truth.num_races)}};
  return Write(options.out, "manifest.txt", m.Format());
}

absl::Status Attack(const Options& options) {
  ASSIGN_OR_RETURN(Config config, LoadConfig(options));
  GeoHierarchy hierarchy;
  ASSIGN_OR_RETURN(PublishedTableSet tables,
                   LoadTablesDir(options.in, &hierarchy));
  ReconstructionConfig rc = config.experiment.reconstruction;
  ASSIGN_OR_RETURN(Reconstruction recon, Reconstruct(tables, hierarchy, rc));
  RETURN_IF_ERROR(PrepareOut(options.out));
  Population rebuilt;
  rebuilt.hierarchy = hierarchy;
  rebuilt.num_races = tables.specs.front().schema.num_races();
  rebuilt.persons = recon.persons;
  ASSIGN_OR_RETURN(rebuilt.households, DeriveHouseholds(rebuilt.persons));
  RETURN_IF_ERROR(WritePopulationDir(rebuilt, options.out));
  std::string blocks = "geocode,persons,joint,count_complete,feasible_count\n";
  for (const BlockReconstruction& b : recon.blocks) {
    blocks += fmt::format("{},{},{},{},{}\n", hierarchy.unit(b.block).code,
                          b.persons, b.joint ? 1 : 0, b.count_complete ? 1 : 0,
                          b.count_complete ? std::to_string(b.feasible_count)
                                           : std::string("NA"));
  }
  RETURN_IF_ERROR(Write(options.out, "blocks.csv", blocks));
  const uint64_t seed = SeedOf(options, config);
  if (!options.truth.empty()) {
    ASSIGN_OR_RETURN(Population truth, LoadPopulationDir(options.truth));
    ExternalFileConfig ec = config.experiment.external;
    ec.seed = seed;
    ASSIGN_OR_RETURN(std::vector<ExternalRow> external,
                     MakeExternalFile(truth, ec));
    const AttackReport report = Reidentify(recon.persons, external, truth);
    RETURN_IF_ERROR(Write(options.out, "agreement.csv",
                          FormatAgreement(report.agreement)));
    RETURN_IF_ERROR(
        Write(options.out, "attack.csv", FormatReidentification(report)));
  }
  Manifest m("attack", config.hash, seed);
  m.extra = {{"num_races", std::to_string(rebuilt.num_races)},
             {"persons", std::to_string(recon.persons.size())}};
  return Write(options.out, "manifest.txt", m.Format());
}

absl::Status Audit(const Options& options) {
  ASSIGN_OR_RETURN(Config config, LoadConfig(options));
  const KeyValueConfig& kv = config.audit;
  RETURN_IF_ERROR(kv.CheckKnownKeys(
      {"audit.sigma2", "audit.alphas", "audit.epsilon", "audit.level",
       "audit.trials"}));
  ASSIGN_OR_RETURN(std::vector<double> sigma2s,
                   kv.GetDoubleList("audit.sigma2", {0.5, 1.0, 4.0}));
  ASSIGN_OR_RETURN(std::vector<double> alphas,
                   kv.GetDoubleList("audit.alphas",
                                    {1.5, 2.0, 4.0, 8.0, 16.0, 32.0}));
  ASSIGN_OR_RETURN(double epsilon, kv.GetDouble("audit.epsilon", std::log(2.0)));
  ASSIGN_OR_RETURN(double level, kv.GetDouble("audit.level", 0.05));
  ASSIGN_OR_RETURN(int64_t trials, kv.GetInt("audit.trials", 100'000));
  const uint64_t seed = SeedOf(options, config);
  RETURN_IF_ERROR(PrepareOut(options.out));
  std::vector<std::string> violations;

  std::string renyi =
      "sigma2,alpha,divergence,bound,rho_hat,charged_rho,truncation_error\n";
  for (double sigma2 : sigma2s) {
    ASSIGN_OR_RETURN(RenyiAuditResult r,
                     RenyiAudit(NoiseMechanism::Gaussian(sigma2), {3, 0, 7},
                                {3, 1, 7}, alphas));
    for (const RenyiRow& row : r.rows) {
      renyi += fmt::format("{},{},{:.12g},{:.12g},{:.12g},{:.12g},{:.3g}\n",
                           sigma2, row.alpha, row.divergence, row.bound,
                           r.rho_hat, r.charged_rho, r.truncation_error);
    }
    if (r.rho_hat > r.charged_rho * (1 + 1e-6)) {
      violations.push_back(fmt::format("renyi sigma2={}", sigma2));
    }
  }
  RETURN_IF_ERROR(Write(options.out, "renyi_audit.csv", renyi));

  PosteriorAuditInput input;
  input.num_records = 3;
  input.queries = {{0}, {0, 1}, {1, 2}};
  input.prior = {0.3, 0.1, 0.05, 0.15, 0.1, 0.05, 0.05, 0.2};
  input.epsilon = epsilon;
  std::string posterior =
      "target,epsilon,max_posterior_ratio,max_prior_posterior_ratio,outputs,"
      "truncated_mass\n";
  for (int target = 0; target < input.num_records; ++target) {
    input.target = target;
    ASSIGN_OR_RETURN(PosteriorAuditResult r, PosteriorRatioAudit(input));
    posterior += fmt::format("{},{:.12g},{:.12g},{:.12g},{},{:.3g}\n", target,
                             epsilon, r.max_posterior_ratio,
                             r.max_prior_posterior_ratio, r.outputs,
                             r.truncated_mass);
    if (r.max_posterior_ratio > std::exp(epsilon) * (1 + 1e-9)) {
      violations.push_back(fmt::format("posterior target={}", target));
    }
  }
  RETURN_IF_ERROR(Write(options.out, "posterior_audit.csv", posterior));

  std::string power = "mechanism,parameter,level,trials,power,se,bound\n";
  struct Case {
    NoiseMechanism mechanism;
    const char* name;
  };
  for (const Case& c : {Case{NoiseMechanism::Gaussian(1.0), "gaussian"},
                        Case{NoiseMechanism::Laplace(epsilon), "laplace"}}) {
    ASSIGN_OR_RETURN(PowerTestResult r,
                     MembershipPowerTest(c.mechanism, {5}, {6}, level, trials,
                                         seed));
    double bound = level * std::exp(epsilon);
    if (c.mechanism.kind == NoiseMechanism::Kind::kDiscreteGaussian) {
      ASSIGN_OR_RETURN(bound, TradeoffPowerBound(
                                  1.0 / (2 * c.mechanism.parameter), level));
    }
    power += fmt::format("{},{:.12g},{},{},{:.6f},{:.6f},{:.6f}\n", c.name,
                         c.mechanism.parameter, level, r.trials, r.power,
                         r.standard_error, bound);
    if (r.power > bound + 3 * r.standard_error) {
      violations.push_back(fmt::format("power {}", c.name));
    }
  }
  RETURN_IF_ERROR(Write(options.out, "power_test.csv", power));

  Manifest m("audit", config.hash, seed);
  m.extra = {{"violations", std::to_string(violations.size())}};
  RETURN_IF_ERROR(Write(options.out, "manifest.txt", m.Format()));
  if (!violations.empty()) {
    return absl::FailedPreconditionError(
        "audit bound violated: " + violations.front());
  }
  return absl::OkStatus();
}

absl::Status Report(const Options& options) {
  ASSIGN_OR_RETURN(Config config, LoadConfig(options));
  ASSIGN_OR_RETURN(Population truth, LoadPopulationDir(options.truth));
  std::vector<StatisticVector> released;
  std::optional<Population> protected_pop;
  if (std::filesystem::exists(Path(options.in, "microdata.csv"))) {
    ASSIGN_OR_RETURN(protected_pop, LoadPopulationDir(options.in));
    released = GeounitStatistics(*protected_pop);
  } else {
    GeoHierarchy hierarchy;
    ASSIGN_OR_RETURN(PublishedTableSet tables,
                     LoadTablesDir(options.in, &hierarchy));
    ASSIGN_OR_RETURN(released,
                     GeounitStatisticsFromTables(tables, truth.hierarchy));
  }
  if (released.size() != static_cast<size_t>(truth.hierarchy.size())) {
    return absl::FailedPreconditionError(
        "protected output and truth have different geographies");
  }
  const uint64_t seed = SeedOf(options, config);
  const std::vector<StatisticVector> truth_stats = GeounitStatistics(truth);
  AccuracyAccumulator acc(truth.hierarchy);
  acc.Add(seed, truth_stats, released);
  std::vector<double> t, e;
  for (int b : truth.hierarchy.blocks()) {
    t.push_back(static_cast<double>(truth_stats[b][0]));
    e.push_back(static_cast<double>(released[b][0]));
  }
  RETURN_IF_ERROR(PrepareOut(options.out));
  RETURN_IF_ERROR(
      Write(options.out, "accuracy.csv", FormatAccuracy(acc.Summary())));
  RETURN_IF_ERROR(Write(options.out, "accuracy_detail.csv", acc.Detail()));
  RETURN_IF_ERROR(Write(options.out, "small_area_bias.csv",
                        FormatSmallAreaBias(SmallAreaBias(t, e))));
  ASSIGN_OR_RETURN(TopDownConfig td, config.experiment.TopDown(seed));
  ASSIGN_OR_RETURN(
      std::vector<MoeRow> moe,
      PremeasurementMoe(td.allocation, CellSchema(td.age, truth.num_races)));
  RETURN_IF_ERROR(Write(options.out, "moe.csv", FormatMoe(moe)));
  if (options.bootstrap > 0) {
    if (!protected_pop.has_value()) {
      return absl::InvalidArgumentError(
          "--bootstrap needs protected microdata");
    }
    ASSIGN_OR_RETURN(BootstrapResult b,
                     BootstrapUncertainty(*protected_pop, td,
                                          options.bootstrap, seed));
    RETURN_IF_ERROR(Write(options.out, "bootstrap.csv",
                          FormatBootstrap(b, truth.hierarchy)));
  }
  Manifest m("report", config.hash, seed);
  return Write(options.out, "manifest.txt", m.Format());
}

absl::Status Experiment(const Options& options) {
  ASSIGN_OR_RETURN(Config config, LoadConfig(options));
  ASSIGN_OR_RETURN(ExperimentResult result, RunExperiment(config.experiment));
  for (const ArmRun& run : result.runs) {
    if (!run.status.ok()) {
      std::cerr << fmt::format("arm {} seed {}: {}\n", ArmName(run.arm),
                               run.seed, run.status.ToString());
    }
  }
  return WriteExperiment(result, options.out);
}

int Main(int argc, char** argv) {
  CLI::App app{"Disclosure avoidance laboratory"};
  app.require_subcommand(1);
  app.fallthrough();
  Options options;
  uint64_t seed = 0;
  app.add_option("--config", options.config_path, "key=value config file")
      ->check(CLI::ExistingFile);
  CLI::Option* seed_opt = app.add_option("--seed", seed, "seed override");
  app.add_option("--out", options.out, "output directory");

  CLI::App* generate = app.add_subcommand("generate", "synthetic population");
  CLI::App* tabulate = app.add_subcommand("tabulate", "published tables");
  tabulate->add_option("--in", options.in, "population directory")->required();
  CLI::App* protect = app.add_subcommand("protect", "run one protection arm");
  protect->add_option("--in", options.in, "population directory")->required();
  protect->add_option("--arm", options.arm, "none|swap|suppress|topdown|bottomup")
      ->required();
  CLI::App* attack = app.add_subcommand("attack", "reconstruct and reidentify");
  attack->add_option("--in", options.in, "tables directory")->required();
  attack->add_option("--truth", options.truth, "confidential population");
  CLI::App* audit = app.add_subcommand("audit", "privacy audits");
  CLI::App* report = app.add_subcommand("report", "accuracy and uncertainty");
  report->add_option("--in", options.in, "protected directory")->required();
  report->add_option("--truth", options.truth, "confidential population")
      ->required();
  report->add_option("--bootstrap", options.bootstrap, "bootstrap replicates");
  CLI::App* experiment = app.add_subcommand("experiment", "all arms, all seeds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  if (seed_opt->count() > 0) options.seed = seed;

  absl::Status status;
  if (generate->parsed()) {
    status = Generate(options);
  } else if (tabulate->parsed()) {
    status = Tabulate(options);
  } else if (protect->parsed()) {
    status = ProtectCommand(options);
  } else if (attack->parsed()) {
    status = Attack(options);
  } else if (audit->parsed()) {
    status = Audit(options);
  } else if (report->parsed()) {
    status = Report(options);
  } else if (experiment->parsed()) {
    status = Experiment(options);
  }
  if (!status.ok()) std::cerr << "dalab: " << status.ToString() << "\n";
  return ExitCodeFor(status);
}

}  // namespace
}  // namespace dalab

int main(int argc, char** argv) { return dalab::Main(argc, argv); }
