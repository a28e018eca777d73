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

#ifndef DALAB_TOPDOWN_ESTIMATOR_H_
#define DALAB_TOPDOWN_ESTIMATOR_H_

#include <vector>

#include "absl/status/statusor.h"

namespace dalab {

struct RowConstraint {
  enum class Kind { kFree, kEqual, kAtLeast };
  Kind kind = Kind::kFree;
  double value = 0.0;

  static RowConstraint Free() { return {Kind::kFree, 0.0}; }
  static RowConstraint Equal(double v) { return {Kind::kEqual, v}; }
  static RowConstraint AtLeast(double v) { return {Kind::kAtLeast, v}; }
};

// Joint estimate for the children ("rows") of one parent over the schema
// cells ("columns"):
//
//   minimize  sum_r [ sum_l (x_rl - y_rl)^2 / vd + (sum_l x_rl - z_r)^2 / vt ]
//   s.t.      sum_r x_rl = P_l        for every cell l (when P is given)
//             row constraint on sum_l x_rl
//             x >= 0                  (when nonnegative)
//
// The root is a single row with no column totals.
struct EstimationProblem {
  int num_rows = 0;
  int num_cells = 0;
  // num_rows x num_cells, row-major.
  std::vector<double> detailed;
  double detailed_variance = 1.0;
  // One per row; empty when totals were not measured.
  std::vector<double> totals;
  double total_variance = 1.0;
  std::vector<RowConstraint> rows;
  // Parent cell totals; empty when there is no parent.
  std::vector<double> column_totals;
  // False gives the equality-constrained least-squares solution, ignoring
  // nonnegativity and lower bounds (diagnostic mode).
  bool nonnegative = true;
};

struct EstimationResult {
  std::vector<double> x;  // num_rows x num_cells, row-major
  int iterations = 0;
  // L-infinity violation of the equality and bound constraints.
  double max_violation = 0.0;
};

// Solves the problem in two phases: the equality-constrained weighted least
// squares solution first, then nonnegativity, warm-started from the first
// phase's row multipliers. Infeasible constraints give FailedPrecondition
// naming the constraint; failure to reach 1e-8 violation gives Internal.
absl::StatusOr<EstimationResult> EstimateCounts(
    const EstimationProblem& problem);

}  // namespace dalab

#endif  // DALAB_TOPDOWN_ESTIMATOR_H_
