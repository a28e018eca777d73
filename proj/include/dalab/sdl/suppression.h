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

#ifndef DALAB_SDL_SUPPRESSION_H_
#define DALAB_SDL_SUPPRESSION_H_

#include <cstdint>
#include <vector>

#include "absl/status/statusor.h"
#include "dalab/geo/geography.h"
#include "dalab/tabulation/tables.h"

namespace dalab {

struct CellRef {
  int table = 0;  // index into PublishedTableSet::tables
  int cell = 0;

  bool operator==(const CellRef&) const = default;
  auto operator<=>(const CellRef&) const = default;
};

// total = sum of parts, an identity every released table set satisfies.
struct TableRelation {
  CellRef total;
  std::vector<CellRef> parts;
};

// Identities between published cells: a parent unit's cell is the sum of the
// same cell in its children, and within one unit a coarser table's cell is the
// sum of the cells of any table that refines it.
std::vector<TableRelation> TableRelations(const PublishedTableSet& set,
                                          const GeoHierarchy& hierarchy);

struct SuppressionConfig {
  // Cells built from 1 to threshold - 1 households are withheld.
  int64_t threshold = 5;
  bool complementary = true;
  // Budget per witness search while choosing complements.
  int64_t node_limit = 2'000;
  int max_rounds = 50;

  absl::Status Validate() const;
};

struct SuppressionResult {
  PublishedTableSet tables;
  int64_t primary = 0;
  int64_t complementary = 0;
  int audit_rounds = 0;
};

// Requires household counts on every table. Complementary cells are chosen
// greedily, smallest value first, for every relation left with a single
// withheld cell. Then, while the subtraction audit cannot show two values for
// some withheld cell, the released cells of a balancing move through it are
// withheld too.
absl::StatusOr<SuppressionResult> SuppressTables(
    const PublishedTableSet& tables, const GeoHierarchy& hierarchy,
    const SuppressionConfig& config);

struct CellInterval {
  CellRef cell;
  // Outer bound: no feasible value lies outside [lo, hi].
  int64_t lo = 0;
  int64_t hi = 0;
  // Values shown feasible by explicit solutions.
  int64_t witnessed_lo = 0;
  int64_t witnessed_hi = 0;

  bool exact() const { return lo == witnessed_lo && hi == witnessed_hi; }
  // Proven recoverable: a single feasible value.
  bool disclosed() const { return lo == hi; }
  // Proven to admit two values.
  bool protected_cell() const { return witnessed_hi > witnessed_lo; }
};

struct AttackOptions {
  int64_t node_limit = 20'000;
  // Try for exact bounds in components with at most this many cells.
  int exact_component_limit = 64;
  // Longest chain of unit changes tried when looking for a second value in a
  // larger component.
  int repair_depth = 40;
};

// Feasibility intervals of every withheld cell given only the released
// values, nonnegativity and TableRelations. Unsuppressed cells are constants
// and are not reported. Components of at most exact_component_limit cells get
// exact intervals; in larger ones [lo, hi] is the propagated outer bound and
// the witnesses come from local moves. Values stored under withheld cells
// seed the search only after they are checked against every equation.
// FailedPrecondition when the released values are contradictory.
absl::StatusOr<std::vector<CellInterval>> SubtractionAttack(
    const PublishedTableSet& tables, const GeoHierarchy& hierarchy,
    const AttackOptions& options = {});

}  // namespace dalab

#endif  // DALAB_SDL_SUPPRESSION_H_
