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

#include "dalab/common/integer_system.h"

#include <algorithm>
#include <cassert>

namespace dalab {
namespace {

constexpr int64_t kInf = IntegerSystem::kUnbounded;

bool IsInf(int64_t x) { return x >= kInf; }

// Trail-based bounds store shared by the searches below. Each equation keeps
// the finite parts of the minimum and maximum of its left side and the number
// of terms that are unbounded in each direction.
class BoundsState {
 public:
  BoundsState(const IntegerSystem& system, const VariableBounds& bounds)
      : system_(system),
        lo_(bounds.lo),
        hi_(bounds.hi),
        sum_min_(system.num_equations(), 0),
        sum_max_(system.num_equations(), 0),
        inf_min_(system.num_equations(), 0),
        inf_max_(system.num_equations(), 0),
        queued_(system.num_equations(), 0) {
    for (int e = 0; e < system.num_equations(); ++e) {
      const std::vector<int>& vars = system.equation(e);
      for (size_t i = 0; i < vars.size(); ++i) {
        AddTerm(e, system.coeff(e, static_cast<int>(i)), lo_[vars[i]],
                hi_[vars[i]], 1);
      }
      Enqueue(e);
    }
  }

  int64_t lo(int v) const { return lo_[v]; }
  int64_t hi(int v) const { return hi_[v]; }
  const std::vector<int64_t>& lo() const { return lo_; }
  const std::vector<int64_t>& hi() const { return hi_; }

  size_t Mark() const { return trail_.size(); }

  void Undo(size_t mark) {
    while (trail_.size() > mark) {
      const TrailEntry t = trail_.back();
      trail_.pop_back();
      Assign(t.var, t.lo, t.hi);
    }
    ClearQueue();
  }

  // Tightens bounds of v; returns false if the domain becomes empty.
  bool Tighten(int v, int64_t new_lo, int64_t new_hi) {
    new_lo = std::max(new_lo, lo_[v]);
    new_hi = std::min(new_hi, hi_[v]);
    if (new_lo > new_hi) return false;
    if (new_lo == lo_[v] && new_hi == hi_[v]) return true;
    trail_.push_back({v, lo_[v], hi_[v]});
    Assign(v, new_lo, new_hi);
    for (int e : system_.equations_of(v)) Enqueue(e);
    return true;
  }

  bool Propagate() {
    while (!queue_.empty()) {
      const int e = queue_.back();
      queue_.pop_back();
      queued_[e] = 0;
      const int64_t rhs = system_.rhs(e);
      if (inf_min_[e] == 0 && sum_min_[e] > rhs) return Fail();
      if (inf_max_[e] == 0 && sum_max_[e] < rhs) return Fail();
      if (inf_min_[e] > 1 && inf_max_[e] > 1) continue;
      const std::vector<int>& vars = system_.equation(e);
      for (size_t i = 0; i < vars.size(); ++i) {
        const int v = vars[i];
        const int c = system_.coeff(e, static_cast<int>(i));
        // Term t = c * v lies in [rhs - others_max, rhs - others_min].
        const bool t_min_inf = c < 0 && IsInf(hi_[v]);
        const bool t_max_inf = c > 0 && IsInf(hi_[v]);
        const int64_t t_min = c > 0 ? lo_[v] : (t_min_inf ? 0 : -hi_[v]);
        const int64_t t_max = c > 0 ? (t_max_inf ? 0 : hi_[v]) : -lo_[v];
        const bool others_min_finite = inf_min_[e] - (t_min_inf ? 1 : 0) == 0;
        const bool others_max_finite = inf_max_[e] - (t_max_inf ? 1 : 0) == 0;
        int64_t new_lo = lo_[v];
        int64_t new_hi = hi_[v];
        if (others_min_finite) {
          const int64_t t_hi = rhs - (sum_min_[e] - t_min);
          if (c > 0) {
            new_hi = std::min(new_hi, t_hi);
          } else {
            new_lo = std::max(new_lo, -t_hi);
          }
        }
        if (others_max_finite) {
          const int64_t t_lo = rhs - (sum_max_[e] - t_max);
          if (c > 0) {
            new_lo = std::max(new_lo, t_lo);
          } else {
            new_hi = std::min(new_hi, -t_lo);
          }
        }
        if (new_hi < hi_[v] || new_lo > lo_[v]) {
          if (!Tighten(v, new_lo, new_hi)) return Fail();
        }
      }
    }
    return true;
  }

 private:
  struct TrailEntry {
    int var;
    int64_t lo;
    int64_t hi;
  };

  // Adds (sign = 1) or removes (sign = -1) the range of c * v.
  void AddTerm(int e, int c, int64_t lo, int64_t hi, int sign) {
    if (c > 0) {
      sum_min_[e] += sign * lo;
      if (IsInf(hi)) {
        inf_max_[e] += sign;
      } else {
        sum_max_[e] += sign * hi;
      }
    } else {
      sum_max_[e] -= sign * lo;
      if (IsInf(hi)) {
        inf_min_[e] += sign;
      } else {
        sum_min_[e] -= sign * hi;
      }
    }
  }

  void Assign(int v, int64_t new_lo, int64_t new_hi) {
    const std::vector<int>& eqs = system_.equations_of(v);
    const std::vector<int>& cs = system_.coeffs_of(v);
    for (size_t k = 0; k < eqs.size(); ++k) {
      AddTerm(eqs[k], cs[k], lo_[v], hi_[v], -1);
      AddTerm(eqs[k], cs[k], new_lo, new_hi, 1);
    }
    lo_[v] = new_lo;
    hi_[v] = new_hi;
  }

  void Enqueue(int e) {
    if (!queued_[e]) {
      queued_[e] = 1;
      queue_.push_back(e);
    }
  }

  void ClearQueue() {
    for (int e : queue_) queued_[e] = 0;
    queue_.clear();
  }

  bool Fail() {
    ClearQueue();
    return false;
  }

  const IntegerSystem& system_;
  std::vector<int64_t> lo_;
  std::vector<int64_t> hi_;
  std::vector<int64_t> sum_min_;
  std::vector<int64_t> sum_max_;
  std::vector<int> inf_min_;
  std::vector<int> inf_max_;
  std::vector<char> queued_;
  std::vector<int> queue_;
  std::vector<TrailEntry> trail_;
};

// Picks the unfixed variable with the smallest finite domain; variables that
// appear in no equation are left for the caller. Returns -1 when none remain.
int ChooseVariable(const IntegerSystem& system, const BoundsState& state) {
  int best = -1;
  int64_t best_size = 0;
  for (int v = 0; v < system.num_variables(); ++v) {
    if (system.equations_of(v).empty()) continue;
    const int64_t lo = state.lo(v);
    const int64_t hi = state.hi(v);
    if (lo == hi) continue;
    const int64_t size = IsInf(hi) ? kInf : hi - lo;
    if (best < 0 || size < best_size) {
      best = v;
      best_size = size;
    }
  }
  return best;
}

std::vector<int64_t> ValueOrder(int64_t lo, int64_t hi,
                                const std::vector<int64_t>& hint, int v) {
  std::vector<int64_t> order;
  if (IsInf(hi)) {
    // Unbounded in the current domain: only reachable for variables whose
    // every equation still has another unbounded term. Try a short range.
    hi = lo + 64;
  }
  order.reserve(static_cast<size_t>(hi - lo + 1));
  if (!hint.empty()) {
    const int64_t h = std::clamp(hint[v], lo, hi);
    order.push_back(h);
    for (int64_t d = 1; h - d >= lo || h + d <= hi; ++d) {
      if (h + d <= hi) order.push_back(h + d);
      if (h - d >= lo) order.push_back(h - d);
    }
  } else {
    for (int64_t x = hi; x >= lo; --x) order.push_back(x);
  }
  return order;
}

class Solver {
 public:
  Solver(const IntegerSystem& system, BoundsState& state,
         const std::vector<int64_t>& hint, int64_t node_limit)
      : system_(system), state_(state), hint_(hint), node_limit_(node_limit) {}

  // Returns true when a full assignment was found (left in the state).
  bool Search() {
    if (++nodes_ > node_limit_) {
      limit_hit_ = true;
      return false;
    }
    const int v = ChooseVariable(system_, state_);
    if (v < 0) return true;
    for (int64_t value : ValueOrder(state_.lo(v), state_.hi(v), hint_, v)) {
      const size_t mark = state_.Mark();
      if (state_.Tighten(v, value, value) && state_.Propagate()) {
        if (Search()) return true;
      }
      state_.Undo(mark);
      if (limit_hit_) return false;
    }
    return false;
  }

  uint64_t Count() {
    if (++nodes_ > node_limit_) {
      limit_hit_ = true;
      return 0;
    }
    const int v = ChooseVariable(system_, state_);
    if (v < 0) return 1;
    if (IsInf(state_.hi(v))) {
      unbounded_ = true;
      return 0;
    }
    uint64_t total = 0;
    for (int64_t value = state_.lo(v); value <= state_.hi(v); ++value) {
      const size_t mark = state_.Mark();
      if (state_.Tighten(v, value, value) && state_.Propagate()) {
        total += Count();
      }
      state_.Undo(mark);
      if (limit_hit_ || unbounded_) return 0;
    }
    return total;
  }

  int64_t nodes() const { return nodes_; }
  bool limit_hit() const { return limit_hit_; }
  bool unbounded() const { return unbounded_; }

 private:
  const IntegerSystem& system_;
  BoundsState& state_;
  const std::vector<int64_t>& hint_;
  int64_t node_limit_;
  int64_t nodes_ = 0;
  bool limit_hit_ = false;
  bool unbounded_ = false;
};

VariableBounds Intersect(const VariableBounds& a, const VariableBounds* b) {
  VariableBounds out = a;
  if (b == nullptr) return out;
  for (size_t v = 0; v < out.lo.size(); ++v) {
    out.lo[v] = std::max(out.lo[v], b->lo[v]);
    out.hi[v] = std::min(out.hi[v], b->hi[v]);
  }
  return out;
}

bool BoundsNonEmpty(const VariableBounds& b) {
  for (size_t v = 0; v < b.lo.size(); ++v) {
    if (b.lo[v] > b.hi[v]) return false;
  }
  return true;
}

}  // namespace

int IntegerSystem::AddVariable(int64_t upper) {
  upper_.push_back(std::min(upper, kUnbounded));
  var_eqs_.emplace_back();
  var_coeffs_.emplace_back();
  return static_cast<int>(upper_.size()) - 1;
}

void IntegerSystem::AddEquation(std::vector<int> vars, int64_t rhs) {
  const int e = static_cast<int>(rhs_.size());
  for (int v : vars) {
    var_eqs_[v].push_back(e);
    var_coeffs_[v].push_back(1);
  }
  equations_.push_back(std::move(vars));
  coeffs_.emplace_back();
  rhs_.push_back(rhs);
}

void IntegerSystem::AddSignedEquation(std::vector<int> vars,
                                      std::vector<int> coeffs, int64_t rhs) {
  assert(vars.size() == coeffs.size());
  const int e = static_cast<int>(rhs_.size());
  for (size_t i = 0; i < vars.size(); ++i) {
    assert(coeffs[i] == 1 || coeffs[i] == -1);
    var_eqs_[vars[i]].push_back(e);
    var_coeffs_[vars[i]].push_back(coeffs[i]);
  }
  equations_.push_back(std::move(vars));
  coeffs_.push_back(std::move(coeffs));
  rhs_.push_back(rhs);
}

bool IntegerSystem::Satisfies(const std::vector<int64_t>& values) const {
  if (static_cast<int>(values.size()) != num_variables()) return false;
  for (int v = 0; v < num_variables(); ++v) {
    if (values[v] < 0 || values[v] > upper_[v]) return false;
  }
  for (int e = 0; e < num_equations(); ++e) {
    int64_t sum = 0;
    for (size_t i = 0; i < equations_[e].size(); ++i) {
      sum += coeff(e, static_cast<int>(i)) * values[equations_[e][i]];
    }
    if (sum != rhs_[e]) return false;
  }
  return true;
}

VariableBounds InitialBounds(const IntegerSystem& system) {
  VariableBounds b;
  b.lo.assign(system.num_variables(), 0);
  b.hi.resize(system.num_variables());
  for (int v = 0; v < system.num_variables(); ++v) b.hi[v] = system.upper(v);
  return b;
}

bool PropagateBounds(const IntegerSystem& system, VariableBounds& bounds) {
  if (!BoundsNonEmpty(bounds)) return false;
  BoundsState state(system, bounds);
  if (!state.Propagate()) return false;
  bounds.lo = state.lo();
  bounds.hi = state.hi();
  return true;
}

SolveResult FindSolution(const IntegerSystem& system,
                         const SolveOptions& options) {
  SolveResult result;
  VariableBounds bounds =
      Intersect(InitialBounds(system), options.restrict_to);
  if (!BoundsNonEmpty(bounds)) return result;
  BoundsState state(system, bounds);
  if (!state.Propagate()) {
    result.nodes = 1;
    return result;
  }
  Solver solver(system, state, options.hint, options.node_limit);
  const bool found = solver.Search();
  result.nodes = solver.nodes();
  if (!found) {
    result.outcome = solver.limit_hit() ? SearchOutcome::kNodeLimit
                                        : SearchOutcome::kInfeasible;
    return result;
  }
  result.outcome = SearchOutcome::kFound;
  result.values.resize(system.num_variables());
  for (int v = 0; v < system.num_variables(); ++v) {
    const int64_t lo = state.lo(v);
    const int64_t hi = state.hi(v);
    if (lo == hi) {
      result.values[v] = lo;
    } else {
      const int64_t h = options.hint.empty() ? lo : options.hint[v];
      result.values[v] = std::clamp(h, lo, hi);
    }
  }
  return result;
}

CountResult CountSolutions(const IntegerSystem& system, int64_t node_limit) {
  CountResult result;
  VariableBounds bounds = InitialBounds(system);
  for (int v = 0; v < system.num_variables(); ++v) {
    if (system.equations_of(v).empty() && IsInf(bounds.hi[v])) {
      return result;  // unbounded free variable
    }
  }
  BoundsState state(system, bounds);
  if (!state.Propagate()) {
    result.complete = true;
    result.nodes = 1;
    return result;
  }
  // Free variables with finite bounds multiply the count.
  uint64_t free_factor = 1;
  for (int v = 0; v < system.num_variables(); ++v) {
    if (system.equations_of(v).empty()) {
      free_factor *= static_cast<uint64_t>(bounds.hi[v] - bounds.lo[v] + 1);
    }
  }
  static const std::vector<int64_t> kNoHint;
  Solver solver(system, state, kNoHint, node_limit);
  const uint64_t count = solver.Count();
  result.nodes = solver.nodes();
  if (solver.limit_hit() || solver.unbounded()) return result;
  result.complete = true;
  result.count = count * free_factor;
  return result;
}

FeasibleInterval VariableRange(const IntegerSystem& system, int v,
                               int64_t node_limit) {
  FeasibleInterval out;
  VariableBounds root = InitialBounds(system);
  if (!PropagateBounds(system, root)) {
    out.feasible = false;
    return out;
  }
  out.lo = root.lo[v];
  out.hi = root.hi[v];
  SolveOptions options;
  options.node_limit = node_limit;
  SolveResult any = FindSolution(system, options);
  if (any.outcome == SearchOutcome::kInfeasible) {
    out.feasible = false;
    return out;
  }
  if (any.outcome == SearchOutcome::kNodeLimit) {
    out.exact = false;
    return out;
  }
  const int64_t witness = any.values[v];

  // 0 = infeasible, 1 = feasible, 2 = unknown.
  auto feasible_within = [&](int64_t a, int64_t b) {
    VariableBounds restrict = root;
    restrict.lo[v] = std::max(restrict.lo[v], a);
    restrict.hi[v] = std::min(restrict.hi[v], b);
    SolveOptions o;
    o.node_limit = node_limit;
    o.restrict_to = &restrict;
    const SolveResult r = FindSolution(system, o);
    if (r.outcome == SearchOutcome::kFound) return 1;
    if (r.outcome == SearchOutcome::kInfeasible) return 0;
    return 2;
  };

  // Smallest feasible value in [root.lo, witness].
  int64_t lo = root.lo[v];
  int64_t hi = witness;
  while (lo < hi) {
    const int64_t mid = lo + (hi - lo) / 2;
    const int r = feasible_within(root.lo[v], mid);
    if (r == 2) {
      out.exact = false;
      break;
    }
    if (r == 1) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  if (out.exact) out.lo = lo;

  if (IsInf(root.hi[v])) {
    out.hi = kInf;
    return out;
  }
  lo = witness;
  hi = root.hi[v];
  bool hi_exact = true;
  while (lo < hi) {
    const int64_t mid = lo + (hi - lo + 1) / 2;
    const int r = feasible_within(mid, root.hi[v]);
    if (r == 2) {
      hi_exact = false;
      break;
    }
    if (r == 1) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  if (hi_exact) {
    out.hi = lo;
  } else {
    out.exact = false;
  }
  return out;
}

}  // namespace dalab
