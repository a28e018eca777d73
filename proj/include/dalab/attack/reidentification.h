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

#ifndef DALAB_ATTACK_REIDENTIFICATION_H_
#define DALAB_ATTACK_REIDENTIFICATION_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "dalab/attack/reconstruction.h"
#include "dalab/geo/population.h"

namespace dalab {

// One row of the attacker's identified file. Race and ethnicity are absent.
struct ExternalRow {
  std::string person_id;
  int block = 0;
  int sex = 0;
  int age = 0;
};

struct ExternalFileConfig {
  double dropout = 0.2;     // fraction of persons missing from the file
  double age_error = 0.05;  // fraction of rows with a wrong age
  int max_age_shift = 3;    // wrong ages move by 1..max_age_shift years
  uint64_t seed = 1;

  absl::Status Validate() const;
};

// The confidential file minus race and ethnicity.
std::vector<ExternalRow> ExternalFromTruth(const Population& truth);

// Degraded copy of the truth: rows drop out and ages shift independently.
absl::StatusOr<std::vector<ExternalRow>> MakeExternalFile(
    const Population& truth, const ExternalFileConfig& config);

// Persons alone in their block on (sex, age bin), sorted by id.
std::vector<std::string> PopulationUniques(const Population& truth);

enum class Universe { kAll = 0, kUniques, kModalUniques, kNonmodalUniques };
inline constexpr int kNumUniverses = 4;
std::string_view UniverseName(Universe u);

// Expected precision of assigning every person the modal race and ethnicity
// of their block, per universe. Empty universes have no value.
std::array<std::optional<double>, kNumUniverses> ModalRaceBaseline(
    const Population& truth);

struct UniverseStats {
  int64_t persons = 0;
  int64_t putative = 0;
  int64_t confirmed = 0;
  std::optional<double> baseline;

  double PutativeRate() const;
  double ConfirmedRate() const;
  // Not available without putative matches.
  std::optional<double> Precision() const;
};

struct AttackReport {
  AgreementReport agreement;
  std::array<UniverseStats, kNumUniverses> universes;

  const UniverseStats& at(Universe u) const {
    return universes[static_cast<int>(u)];
  }
};

// Links external rows to reconstructed records on (block, sex, age bin).
// Within a key, a row takes an unused record of the same exact age if there
// is one, otherwise the next unused record in id order; rows left over once
// every record is used cycle through the records. A link is confirmed when
// the row's true race and ethnicity equal the record's.
AttackReport Reidentify(const std::vector<PersonRecord>& reconstructed,
                        const std::vector<ExternalRow>& external,
                        const Population& truth);

// universe,persons,putative,confirmed,putative_rate,confirmed_rate,
// precision,modal_baseline
std::string FormatReidentification(const AttackReport& report);

}  // namespace dalab

#endif  // DALAB_ATTACK_REIDENTIFICATION_H_
