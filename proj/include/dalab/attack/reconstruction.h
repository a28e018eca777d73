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

#ifndef DALAB_ATTACK_RECONSTRUCTION_H_
#define DALAB_ATTACK_RECONSTRUCTION_H_

#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "dalab/common/integer_system.h"
#include "dalab/geo/population.h"
#include "dalab/tabulation/schema.h"
#include "dalab/tabulation/tables.h"

namespace dalab {

struct ReconstructionConfig {
  // Search budget for one tract solved jointly with all its blocks. When it
  // runs out, each block is solved on its own tables instead.
  int64_t joint_node_limit = 20'000;
  // Budget for a block solved on its own tables.
  int64_t block_node_limit = 200'000;
  // Feasible solutions are counted per block when this is positive and the
  // enumeration finishes within the budget.
  int64_t count_node_limit = 1'000'000;
};

struct BlockReconstruction {
  int block = 0;
  int64_t persons = 0;
  // True when the block came from a joint solve of its tract.
  bool joint = false;
  bool count_complete = false;
  uint64_t feasible_count = 0;  // valid when count_complete
};

struct Reconstruction {
  // Profiles are (sex, age bin, race, ethnicity) when the tables carry
  // single-year or binned ages.
  CellSchema profile_schema{AgeGranularity::kAgeBin, 1};
  std::vector<PersonRecord> persons;
  std::vector<BlockReconstruction> blocks;  // one per block, in block order
};

// Equations over profile counts of the blocks of one geounit's subtree, one
// per group of published cells that maps onto a group of profiles. Withheld
// cells drop their group.
struct ProfileSystem {
  IntegerSystem system;
  // (block, profile) of each variable.
  std::vector<std::pair<int, int>> variables;
};

// Block-only system: the tables published at the block itself.
absl::StatusOr<ProfileSystem> BlockProfileSystem(const PublishedTableSet& tables,
                                                 const GeoHierarchy& hierarchy,
                                                 int block);

// One feasible set of records for every block. FailedPrecondition names the
// first block whose own tables admit no solution.
absl::StatusOr<Reconstruction> Reconstruct(
    const PublishedTableSet& tables, const GeoHierarchy& hierarchy,
    const ReconstructionConfig& config = {});

// Block-size bins for agreement reporting: 1-9, 10-49, ..., 1000+.
int BlockSizeBin(int64_t persons);
std::string BlockSizeBinLabel(int bin);
inline constexpr int kNumBlockSizeBins = 7;

struct AgreementReport {
  std::vector<int64_t> persons;  // truth persons per block-size bin
  std::vector<int64_t> matched;
  int64_t total_persons = 0;
  int64_t total_matched = 0;

  double Rate(int bin) const;
  double OverallRate() const;
};

// Matches records on (block, sex, age bin, race, ethnicity); bins use the
// true block population.
AgreementReport AgreementRate(const std::vector<PersonRecord>& reconstructed,
                              const Population& truth);

std::string FormatAgreement(const AgreementReport& report);

}  // namespace dalab

#endif  // DALAB_ATTACK_RECONSTRUCTION_H_
