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

#ifndef DALAB_TOPDOWN_ROUNDING_H_
#define DALAB_TOPDOWN_ROUNDING_H_

#include <cstdint>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"
#include "dalab/topdown/estimator.h"

namespace dalab {

// Integer range for a row whose real total is 'sum': floor and ceiling of the
// sum, intersected with the constraint.
std::pair<int64_t, int64_t> RoundingRowBounds(double sum,
                                              const RowConstraint& constraint);

// Rounds every entry of the rows x cols matrix x to its floor or ceiling so
// that column l sums to column_totals[l] (skipped when column_totals is
// empty) and row r sums into [row_lo[r], row_hi[r]]. Among such matrices the
// result minimizes the L1 distance to x; ties round up the lower flattened
// index. Entries within 1e-9 of an integer are taken as that integer.
// Returns Internal when no such rounding exists.
absl::StatusOr<std::vector<int64_t>> ControlledRound(
    const std::vector<double>& x, int rows, int cols,
    const std::vector<int64_t>& column_totals,
    const std::vector<int64_t>& row_lo, const std::vector<int64_t>& row_hi);

}  // namespace dalab

#endif  // DALAB_TOPDOWN_ROUNDING_H_
