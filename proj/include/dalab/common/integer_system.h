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

#ifndef DALAB_COMMON_INTEGER_SYSTEM_H_
#define DALAB_COMMON_INTEGER_SYSTEM_H_

#include <cstdint>
#include <limits>
#include <vector>

namespace dalab {

// A system of linear equations with 0/1 coefficients,
//     sum_{v in equation} x_v = rhs,
// over nonnegative integer variables with optional upper bounds. This is the
// shape of every question asked about published count tables: reconstruction
// of profile counts and the feasibility interval of a suppressed cell.
class IntegerSystem {
 public:
  static constexpr int64_t kUnbounded = int64_t{1} << 60;

  int AddVariable(int64_t upper = kUnbounded);
  // Duplicate variables in one equation are not allowed.
  void AddEquation(std::vector<int> vars, int64_t rhs);
  // Sum of coeffs[i] * vars[i] = rhs with every coefficient +1 or -1.
  void AddSignedEquation(std::vector<int> vars, std::vector<int> coeffs,
                         int64_t rhs);

  int num_variables() const { return static_cast<int>(upper_.size()); }
  int num_equations() const { return static_cast<int>(rhs_.size()); }
  const std::vector<int>& equation(int e) const { return equations_[e]; }
  int64_t rhs(int e) const { return rhs_[e]; }
  int64_t upper(int v) const { return upper_[v]; }
  // Coefficient of the i-th term of equation e.
  int coeff(int e, int i) const {
    return coeffs_[e].empty() ? 1 : coeffs_[e][i];
  }
  const std::vector<int>& equations_of(int v) const { return var_eqs_[v]; }
  // Coefficient of v in each of equations_of(v).
  const std::vector<int>& coeffs_of(int v) const { return var_coeffs_[v]; }

  // True when every equation holds and every value is within bounds.
  bool Satisfies(const std::vector<int64_t>& values) const;

 private:
  std::vector<int64_t> upper_;
  std::vector<std::vector<int>> var_eqs_;
  std::vector<std::vector<int>> var_coeffs_;
  std::vector<std::vector<int>> equations_;
  // Empty for an all-ones equation.
  std::vector<std::vector<int>> coeffs_;
  std::vector<int64_t> rhs_;
};

struct VariableBounds {
  std::vector<int64_t> lo;
  std::vector<int64_t> hi;
};

// Bounds propagation to a fixpoint. Returns false when the system is proven
// infeasible. The resulting bounds contain every integer solution.
bool PropagateBounds(const IntegerSystem& system, VariableBounds& bounds);
VariableBounds InitialBounds(const IntegerSystem& system);

enum class SearchOutcome { kFound, kInfeasible, kNodeLimit };

struct SolveOptions {
  int64_t node_limit = 1'000'000;
  // Optional preferred value per variable; values closest to the hint are
  // tried first. Without hints, values are tried from the upper bound down.
  std::vector<int64_t> hint;
  // Optional extra bounds, intersected with the system's own bounds.
  const VariableBounds* restrict_to = nullptr;
};

struct SolveResult {
  SearchOutcome outcome = SearchOutcome::kInfeasible;
  std::vector<int64_t> values;
  int64_t nodes = 0;
};

// Depth-first search with bounds propagation for one solution. Variables
// that appear in no equation and have no finite bound take their hint (or 0).
SolveResult FindSolution(const IntegerSystem& system,
                         const SolveOptions& options = {});

struct CountResult {
  // False when the node limit was reached or the solution set is unbounded.
  bool complete = false;
  uint64_t count = 0;
  int64_t nodes = 0;
};

// Counts all solutions by exhaustive search with propagation.
CountResult CountSolutions(const IntegerSystem& system,
                           int64_t node_limit = 1'000'000);

struct FeasibleInterval {
  int64_t lo = 0;
  int64_t hi = 0;
  // False when a search hit its node limit and the interval is the
  // propagated outer bound rather than the exact integer range.
  bool exact = true;
  bool feasible = true;
};

// Exact integer range of variable v over all solutions.
FeasibleInterval VariableRange(const IntegerSystem& system, int v,
                               int64_t node_limit = 200'000);

}  // namespace dalab

#endif  // DALAB_COMMON_INTEGER_SYSTEM_H_
