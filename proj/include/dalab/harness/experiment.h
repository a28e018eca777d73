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

#ifndef DALAB_HARNESS_EXPERIMENT_H_
#define DALAB_HARNESS_EXPERIMENT_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dalab/attack/reidentification.h"
#include "dalab/common/key_value_config.h"
#include "dalab/harness/accuracy.h"
#include "dalab/sdl/suppression.h"
#include "dalab/sdl/swapping.h"
#include "dalab/topdown/topdown.h"

namespace dalab {

enum class Arm { kNone = 0, kSwap, kSuppress, kTopDown, kBottomUp };
inline constexpr int kNumArms = 5;
std::string_view ArmName(Arm arm);
// Accepts "bottomup" as well as "bottom_up".
absl::StatusOr<Arm> ParseArm(std::string_view name);

struct ExperimentConfig {
  PopulationConfig population;
  std::vector<Arm> arms = {Arm::kNone, Arm::kSwap, Arm::kSuppress,
                           Arm::kTopDown, Arm::kBottomUp};
  // Each seed generates one confidential population shared by every arm and
  // seeds every mechanism run on it.
  std::vector<uint64_t> seeds = {1, 2, 3, 4, 5};
  SwapConfig swap;
  SuppressionConfig suppression;
  double person_rho = 2.56;
  double housing_rho = 0.07;
  double detailed_share = 0.8;
  InvariantSpec invariants;
  bool attack = true;
  ExternalFileConfig external;
  ReconstructionConfig reconstruction = {.count_node_limit = 0};
  // Canonical key text the config was read from; hashed into the manifest.
  std::string canonical;

  absl::Status Validate() const;
  absl::StatusOr<TopDownConfig> TopDown(uint64_t seed) const;
};

// Reads population.*, experiment.*, swap.*, suppress.*, topdown.*,
// external.* and attack.* keys. Unknown keys are InvalidArgument.
absl::StatusOr<ExperimentConfig> ExperimentConfigFromKeys(
    const KeyValueConfig& kv);
std::vector<std::string> ExperimentConfigKeys();

// Output of one protection arm on one confidential population.
struct ProtectedRelease {
  // Absent for suppression, which releases tables only.
  std::optional<Population> microdata;
  PublishedTableSet tables;
  PrivacyLedger ledger;
  bool charged = false;  // true for the arms that spend privacy loss
  std::string log;       // swap log, when swapping
};

absl::StatusOr<ProtectedRelease> Protect(Arm arm, const Population& truth,
                                         const ExperimentConfig& config,
                                         uint64_t seed);

struct ArmRun {
  Arm arm = Arm::kNone;
  uint64_t seed = 0;
  absl::Status status;
  double ledger_rho = 0.0;
  std::string ledger_csv;
  std::vector<StatisticVector> released;
  // The attack can fail on its own, for instance when a search budget runs
  // out; the arm's accuracy still counts.
  absl::Status attack_status;
  std::optional<AttackReport> attack;
};

struct ExperimentResult {
  ExperimentConfig config;
  GeoHierarchy hierarchy;  // of the first seed's population
  std::vector<ArmRun> runs;  // seed-major, arms in config order
  // Per arm in config order.
  std::vector<std::vector<AccuracyRow>> accuracy;
  std::vector<std::string> accuracy_detail;
  std::vector<std::vector<BiasRow>> block_bias;
};

absl::StatusOr<ExperimentResult> RunExperiment(const ExperimentConfig& config);

// Pooled attack counts of one arm over its successful seeds.
std::optional<AttackReport> PooledAttack(const ExperimentResult& result,
                                         Arm arm);

// Writes manifest.txt, summary.csv, accuracy.csv, accuracy_detail.csv,
// attack.csv, agreement.csv, small_area_bias.csv and ledger.csv. The
// contents depend only on the config.
absl::Status WriteExperiment(const ExperimentResult& result,
                             const std::string& dir);

std::string ConfigHash(std::string_view canonical);

}  // namespace dalab

#endif  // DALAB_HARNESS_EXPERIMENT_H_
