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

#include "dalab/topdown/estimator.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "Eigen/Dense"
#include "fmt/format.h"

namespace dalab {
namespace {

constexpr int kMaxNewton = 200;
constexpr int kMaxHalvings = 60;
// Parent cells at or below this are treated as zero.
constexpr double kZeroCell = 1e-12;

// How a row enters the dual. a_r is the row's multiplier.
enum class RowType {
  kEqual,         // sum = T
  kFreeTotal,     // penalized toward the total measurement
  kFreeFixed,     // no total measured and no constraint: a_r = 0
  kAtLeastTotal,  // sum >= L and penalized toward the total
  kAtLeastBox,    // sum >= L, no total: a_r >= 0
};

struct Structure {
  std::vector<int> rows;  // problem rows carried as dual variables
  std::vector<RowType> types;
  std::vector<int> live;  // cells with a positive parent total (or all)
  bool has_columns = false;
};

struct Evaluation {
  double value = 0.0;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
  std::vector<double> sums;
};

class DualSolver {
 public:
  DualSolver(const EstimationProblem& p, const Structure& st, bool nonnegative)
      : p_(p), st_(st), nonnegative_(nonnegative), n_(st.rows.size()),
        num_live_(st.live.size()) {
    y_.resize(n_ * num_live_);
    for (int i = 0; i < n_; ++i) {
      for (int j = 0; j < num_live_; ++j) {
        y_[i * num_live_ + j] =
            p.detailed[static_cast<size_t>(st.rows[i]) * p.num_cells + st.live[j]];
      }
    }
    kappa_ = p.totals.empty() ? 0.0 : p.total_variance / p.detailed_variance;
  }

  // Fills the dual value, gradient and generalized Hessian at 'a'; when 'x'
  // is given it receives the primal point (n x live, row-major).
  void Evaluate(const Eigen::VectorXd& a, Evaluation& e,
                std::vector<double>* x = nullptr) const {
    e.value = 0.0;
    e.sums.assign(n_, 0.0);
    e.hess.setZero(n_, n_);
    if (x != nullptr) x->assign(n_ * num_live_, 0.0);
    std::vector<double> v(n_);
    std::vector<int> order(n_);
    for (int j = 0; j < num_live_; ++j) {
      for (int i = 0; i < n_; ++i) v[i] = y_[i * num_live_ + j] + a[i];
      if (!st_.has_columns) {
        for (int i = 0; i < n_; ++i) {
          const double xi = nonnegative_ ? std::max(0.0, v[i]) : v[i];
          e.value += 0.5 * xi * xi;
          e.sums[i] += xi;
          if (xi > 0.0 || !nonnegative_) e.hess(i, i) += 1.0;
          if (x != nullptr) (*x)[i * num_live_ + j] = xi;
        }
        continue;
      }
      const double total = p_.column_totals[st_.live[j]];
      int k = n_;
      double u = 0.0;
      if (nonnegative_) {
        // Projection of v onto {x >= 0, sum x = total}.
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int l, int r) {
          return v[l] != v[r] ? v[l] > v[r] : l < r;
        });
        double cum = 0.0;
        k = 0;
        for (int t = 0; t < n_; ++t) {
          cum += v[order[t]];
          const double ut = (total - cum) / (t + 1);
          if (v[order[t]] + ut > 0.0) {
            k = t + 1;
            u = ut;
          }
        }
      } else {
        std::iota(order.begin(), order.end(), 0);
        u = (total - std::accumulate(v.begin(), v.end(), 0.0)) / n_;
      }
      const double inv_k = 1.0 / k;
      for (int t = 0; t < k; ++t) {
        const int i = order[t];
        const double xi = nonnegative_ ? std::max(0.0, v[i] + u) : v[i] + u;
        e.value += v[i] * xi - 0.5 * xi * xi;
        e.sums[i] += xi;
        if (x != nullptr) (*x)[i * num_live_ + j] = xi;
        e.hess(i, i) += 1.0;
        for (int t2 = 0; t2 < k; ++t2) e.hess(i, order[t2]) -= inv_k;
      }
    }
    e.grad.resize(n_);
    for (int i = 0; i < n_; ++i) {
      const int r = st_.rows[i];
      const double s = e.sums[i];
      const double c = p_.rows[r].value;
      const double z = p_.totals.empty() ? 0.0 : p_.totals[r];
      switch (st_.types[i]) {
        case RowType::kEqual:
          e.value -= c * a[i];
          e.grad[i] = s - c;
          break;
        case RowType::kFreeTotal:
          e.value += -z * a[i] + 0.5 * kappa_ * a[i] * a[i];
          e.grad[i] = s - z + kappa_ * a[i];
          e.hess(i, i) += kappa_;
          break;
        case RowType::kFreeFixed:
          e.grad[i] = 0.0;
          break;
        case RowType::kAtLeastTotal: {
          const double target = z - kappa_ * a[i];
          const double best = std::max(c, target);
          e.value += -a[i] * best - (best - z) * (best - z) / (2 * kappa_);
          e.grad[i] = s - best;
          if (target > c) e.hess(i, i) += kappa_;
          break;
        }
        case RowType::kAtLeastBox:
          e.value -= c * a[i];
          e.grad[i] = s - c;
          break;
      }
    }
  }

  // True for coordinates that do not move this iteration.
  bool Pinned(int i, const Eigen::VectorXd& a, const Evaluation& e) const {
    if (st_.types[i] == RowType::kFreeFixed) return true;
    return st_.types[i] == RowType::kAtLeastBox && a[i] <= 0.0 &&
           e.grad[i] > 0.0;
  }

  double ProjectedResidual(const Eigen::VectorXd& a, const Evaluation& e) const {
    double r = 0.0;
    for (int i = 0; i < n_; ++i) {
      if (!Pinned(i, a, e)) r = std::max(r, std::abs(e.grad[i]));
    }
    return r;
  }

  // Damped semismooth Newton on the dual. Returns the iteration count.
  int Solve(Eigen::VectorXd& a, double tol) const {
    for (int i = 0; i < n_; ++i) {
      if (st_.types[i] == RowType::kFreeFixed) a[i] = 0.0;
      if (st_.types[i] == RowType::kAtLeastBox) a[i] = std::max(a[i], 0.0);
    }
    Evaluation e, trial;
    int iter = 0;
    for (; iter < kMaxNewton; ++iter) {
      Evaluate(a, e);
      if (ProjectedResidual(a, e) <= tol) break;
      std::vector<int> free;
      for (int i = 0; i < n_; ++i) {
        if (!Pinned(i, a, e)) free.push_back(i);
      }
      const int f = free.size();
      Eigen::MatrixXd h(f, f);
      Eigen::VectorXd g(f);
      double max_diag = 0.0;
      for (int r = 0; r < f; ++r) {
        g[r] = e.grad[free[r]];
        for (int c = 0; c < f; ++c) h(r, c) = e.hess(free[r], free[c]);
        max_diag = std::max(max_diag, h(r, r));
      }
      h.diagonal().array() += 1e-9 * (1.0 + max_diag);
      const Eigen::VectorXd step = -h.ldlt().solve(g);
      double t = 1.0;
      bool accepted = false;
      Eigen::VectorXd next = a;
      for (int half = 0; half < kMaxHalvings; ++half, t *= 0.5) {
        next = a;
        for (int r = 0; r < f; ++r) next[free[r]] += t * step[r];
        for (int i = 0; i < n_; ++i) {
          if (st_.types[i] == RowType::kAtLeastBox) next[i] = std::max(next[i], 0.0);
        }
        Evaluate(next, trial);
        const double predicted = e.grad.dot(next - a);
        if (trial.value <= e.value + 1e-4 * predicted +
                               1e-14 * (1.0 + std::abs(e.value))) {
          accepted = true;
          break;
        }
      }
      if (!accepted) break;
      a = next;
    }
    return iter;
  }

 private:
  const EstimationProblem& p_;
  const Structure& st_;
  bool nonnegative_;
  int n_;
  int num_live_;
  std::vector<double> y_;
  double kappa_ = 0.0;
};

Structure Prepare(const EstimationProblem& p, bool nonnegative) {
  Structure st;
  st.has_columns = !p.column_totals.empty();
  const bool has_total = !p.totals.empty();
  for (int r = 0; r < p.num_rows; ++r) {
    const RowConstraint& rc = p.rows[r];
    RowType type;
    if (rc.kind == RowConstraint::Kind::kEqual) {
      if (nonnegative && rc.value == 0.0) continue;  // all zero
      type = RowType::kEqual;
    } else if (rc.kind == RowConstraint::Kind::kAtLeast && nonnegative &&
               rc.value > 0.0) {
      type = has_total ? RowType::kAtLeastTotal : RowType::kAtLeastBox;
    } else {
      type = has_total ? RowType::kFreeTotal : RowType::kFreeFixed;
    }
    st.rows.push_back(r);
    st.types.push_back(type);
  }
  for (int l = 0; l < p.num_cells; ++l) {
    if (!st.has_columns || !nonnegative || p.column_totals[l] > kZeroCell) {
      st.live.push_back(l);
    }
  }
  return st;
}

absl::Status CheckShape(const EstimationProblem& p) {
  const size_t cells = static_cast<size_t>(p.num_rows) * p.num_cells;
  if (p.num_rows < 1 || p.num_cells < 1 || p.detailed.size() != cells ||
      p.rows.size() != static_cast<size_t>(p.num_rows) ||
      (!p.totals.empty() && p.totals.size() != static_cast<size_t>(p.num_rows)) ||
      (!p.column_totals.empty() &&
       p.column_totals.size() != static_cast<size_t>(p.num_cells))) {
    return absl::InvalidArgumentError("estimation problem has inconsistent sizes");
  }
  if (!(p.detailed_variance > 0.0) || !(p.total_variance > 0.0)) {
    return absl::InvalidArgumentError("noise variances must be positive");
  }
  return absl::OkStatus();
}

absl::Status CheckFeasible(const EstimationProblem& p, double tol) {
  double eq_sum = 0.0;
  double lower_sum = 0.0;
  bool all_equal = true;
  for (int r = 0; r < p.num_rows; ++r) {
    const RowConstraint& rc = p.rows[r];
    if (rc.kind == RowConstraint::Kind::kEqual) {
      if (rc.value < 0.0) {
        return absl::FailedPreconditionError(fmt::format(
            "row {} must total {} but counts are nonnegative", r, rc.value));
      }
      eq_sum += rc.value;
    } else {
      all_equal = false;
      if (rc.kind == RowConstraint::Kind::kAtLeast) {
        lower_sum += std::max(0.0, rc.value);
      }
    }
  }
  if (p.column_totals.empty()) return absl::OkStatus();
  double parent = 0.0;
  for (int l = 0; l < p.num_cells; ++l) {
    if (p.column_totals[l] < -tol) {
      return absl::FailedPreconditionError(fmt::format(
          "parent cell {} is negative ({})", l, p.column_totals[l]));
    }
    parent += std::max(0.0, p.column_totals[l]);
  }
  if (all_equal && std::abs(eq_sum - parent) > tol) {
    return absl::FailedPreconditionError(fmt::format(
        "children's fixed totals sum to {} but the parent total is {}", eq_sum,
        parent));
  }
  if (eq_sum + lower_sum > parent + tol) {
    return absl::FailedPreconditionError(fmt::format(
        "children need at least {} persons but the parent total is {}",
        eq_sum + lower_sum, parent));
  }
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<EstimationResult> EstimateCounts(
    const EstimationProblem& problem) {
  if (absl::Status s = CheckShape(problem); !s.ok()) return s;
  double scale = 1.0;
  for (double c : problem.column_totals) scale += std::abs(c);
  for (const RowConstraint& rc : problem.rows) scale += std::abs(rc.value);
  for (double z : problem.totals) scale += std::abs(z);
  const double solve_tol = std::max(1e-10, 1e-15 * scale);
  const double accept_tol = std::max(1e-8, 1e-13 * scale);
  if (problem.nonnegative) {
    if (absl::Status s = CheckFeasible(problem, accept_tol); !s.ok()) return s;
  }

  const Structure st = Prepare(problem, problem.nonnegative);
  const int n = st.rows.size();
  Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
  EstimationResult result;
  if (problem.nonnegative) {
    // Phase one: same rows and cells, equality constraints only.
    Structure eq = st;
    for (RowType& t : eq.types) {
      if (t == RowType::kAtLeastTotal) t = RowType::kFreeTotal;
      if (t == RowType::kAtLeastBox) t = RowType::kFreeFixed;
    }
    result.iterations += DualSolver(problem, eq, false).Solve(a, solve_tol);
  }
  const DualSolver solver(problem, st, problem.nonnegative);
  result.iterations += solver.Solve(a, solve_tol);

  std::vector<double> x;
  Evaluation e;
  solver.Evaluate(a, e, &x);
  const int num_live = st.live.size();
  result.x.assign(static_cast<size_t>(problem.num_rows) * problem.num_cells, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < num_live; ++j) {
      result.x[static_cast<size_t>(st.rows[i]) * problem.num_cells + st.live[j]] =
          x[i * num_live + j];
    }
  }

  // Constraint violations, recomputed from the primal point.
  double violation = 0.0;
  if (!problem.column_totals.empty()) {
    for (int l = 0; l < problem.num_cells; ++l) {
      double sum = 0.0;
      for (int r = 0; r < problem.num_rows; ++r) {
        sum += result.x[static_cast<size_t>(r) * problem.num_cells + l];
      }
      const double target = problem.nonnegative && problem.column_totals[l] <= kZeroCell
                                ? 0.0
                                : problem.column_totals[l];
      violation = std::max(violation, std::abs(sum - target));
    }
  }
  for (int r = 0; r < problem.num_rows; ++r) {
    const RowConstraint& rc = problem.rows[r];
    double sum = 0.0;
    for (int l = 0; l < problem.num_cells; ++l) {
      sum += result.x[static_cast<size_t>(r) * problem.num_cells + l];
    }
    if (rc.kind == RowConstraint::Kind::kEqual) {
      violation = std::max(violation, std::abs(sum - rc.value));
    } else if (rc.kind == RowConstraint::Kind::kAtLeast && problem.nonnegative) {
      violation = std::max(violation, rc.value - sum);
    }
  }
  result.max_violation = violation;
  if (violation > accept_tol) {
    return absl::InternalError(fmt::format(
        "estimator stopped with constraint violation {} after {} iterations",
        violation, result.iterations));
  }
  return result;
}

}  // namespace dalab
