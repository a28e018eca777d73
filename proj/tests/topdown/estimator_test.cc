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

#include <cmath>
#include <limits>

#include "Eigen/Dense"
#include "dalab/common/rng.h"
#include "dalab/topdown/estimator.h"
#include "dalab/topdown/rounding.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace dalab {
namespace {

using ::testing::ElementsAre;

double Objective(const EstimationProblem& p, const std::vector<double>& x) {
  double f = 0.0;
  for (int r = 0; r < p.num_rows; ++r) {
    double s = 0.0;
    for (int l = 0; l < p.num_cells; ++l) {
      const double d = x[r * p.num_cells + l] - p.detailed[r * p.num_cells + l];
      f += d * d / p.detailed_variance;
      s += x[r * p.num_cells + l];
    }
    if (!p.totals.empty()) f += (s - p.totals[r]) * (s - p.totals[r]) / p.total_variance;
  }
  return f;
}

// Minimizes over every choice of zero entries and active lower-bound rows by
// solving the equality-constrained KKT system of each choice.
std::vector<double> BruteForce(const EstimationProblem& p) {
  const int n = p.num_rows * p.num_cells;
  std::vector<int> lower_rows;
  for (int r = 0; r < p.num_rows; ++r) {
    if (p.rows[r].kind == RowConstraint::Kind::kAtLeast) lower_rows.push_back(r);
  }
  // Hessian and linear term of 0.5 x'Qx - b'x.
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  for (int r = 0; r < p.num_rows; ++r) {
    for (int l = 0; l < p.num_cells; ++l) {
      const int i = r * p.num_cells + l;
      q(i, i) += 2.0 / p.detailed_variance;
      b[i] += 2.0 * p.detailed[i] / p.detailed_variance;
      if (p.totals.empty()) continue;
      for (int l2 = 0; l2 < p.num_cells; ++l2) {
        q(i, r * p.num_cells + l2) += 2.0 / p.total_variance;
      }
      b[i] += 2.0 * p.totals[r] / p.total_variance;
    }
  }
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> best_x;
  for (int zmask = 0; zmask < (1 << n); ++zmask) {
    for (int amask = 0; amask < (1 << lower_rows.size()); ++amask) {
      std::vector<Eigen::VectorXd> rows;
      std::vector<double> rhs;
      auto add = [&](Eigen::VectorXd row, double v) {
        rows.push_back(std::move(row));
        rhs.push_back(v);
      };
      if (!p.column_totals.empty()) {
        for (int l = 0; l < p.num_cells; ++l) {
          Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
          for (int r = 0; r < p.num_rows; ++r) e[r * p.num_cells + l] = 1;
          add(e, p.column_totals[l]);
        }
      }
      for (int r = 0; r < p.num_rows; ++r) {
        bool fixed = p.rows[r].kind == RowConstraint::Kind::kEqual;
        for (size_t k = 0; k < lower_rows.size(); ++k) {
          if (lower_rows[k] == r && (amask >> k & 1)) fixed = true;
        }
        if (!fixed) continue;
        Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
        for (int l = 0; l < p.num_cells; ++l) e[r * p.num_cells + l] = 1;
        add(e, p.rows[r].value);
      }
      for (int i = 0; i < n; ++i) {
        if (!(zmask >> i & 1)) continue;
        Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
        e[i] = 1;
        add(e, 0.0);
      }
      const int m = rows.size();
      Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + m, n + m);
      Eigen::VectorXd k_rhs(n + m);
      kkt.topLeftCorner(n, n) = q;
      k_rhs.head(n) = b;
      for (int j = 0; j < m; ++j) {
        kkt.block(n + j, 0, 1, n) = rows[j].transpose();
        kkt.block(0, n + j, n, 1) = rows[j];
        k_rhs[n + j] = rhs[j];
      }
      const Eigen::VectorXd sol = kkt.completeOrthogonalDecomposition().solve(k_rhs);
      if ((kkt * sol - k_rhs).cwiseAbs().maxCoeff() > 1e-7) continue;
      std::vector<double> x(sol.data(), sol.data() + n);
      bool ok = true;
      for (double v : x) ok = ok && v >= -1e-9;
      for (int r : lower_rows) {
        double s = 0.0;
        for (int l = 0; l < p.num_cells; ++l) s += x[r * p.num_cells + l];
        ok = ok && s >= p.rows[r].value - 1e-9;
      }
      if (!ok) continue;
      const double f = Objective(p, x);
      if (f < best) {
        best = f;
        best_x = x;
      }
    }
  }
  return best_x;
}

TEST(EstimatorTest, SiblingsUnderParentTotal) {
  EstimationProblem p;
  p.num_rows = 2;
  p.num_cells = 1;
  p.detailed = {3, 4};
  p.rows = {RowConstraint::Free(), RowConstraint::Free()};
  p.column_totals = {9};
  auto r = EstimateCounts(p);
  ASSERT_TRUE(r.ok()) << r.status();
  EXPECT_NEAR(r->x[0], 4.0, 1e-9);
  EXPECT_NEAR(r->x[1], 5.0, 1e-9);
}

TEST(EstimatorTest, NegativeMeasurementUnderZeroParent) {
  EstimationProblem p;
  p.num_rows = 1;
  p.num_cells = 1;
  p.detailed = {-2};
  p.rows = {RowConstraint::Free()};
  p.column_totals = {0};
  auto r = EstimateCounts(p);
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r->x[0], 0.0);
}

TEST(EstimatorTest, FeasibleMeasurementIsFixedPoint) {
  EstimationProblem p;
  p.num_rows = 2;
  p.num_cells = 3;
  p.detailed = {1, 0, 4, 2, 3, 0};
  p.totals = {5, 5};
  p.rows = {RowConstraint::AtLeast(2), RowConstraint::Equal(5)};
  p.column_totals = {3, 3, 4};
  auto r = EstimateCounts(p);
  ASSERT_TRUE(r.ok());
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(r->x[i], p.detailed[i], 1e-9);
}

TEST(EstimatorTest, RootNonnegativeProjection) {
  // Single row, equality total: x = max(0, y + a) with sum 6.
  EstimationProblem p;
  p.num_rows = 1;
  p.num_cells = 4;
  p.detailed = {5, -3, 2, 1};
  p.rows = {RowConstraint::Equal(6)};
  auto r = EstimateCounts(p);
  ASSERT_TRUE(r.ok());
  // a = -2/3: (4.333, 0, 1.333, 0.333).
  EXPECT_THAT(r->x[1], 0.0);
  EXPECT_NEAR(r->x[0], 5 - 2.0 / 3, 1e-9);
  EXPECT_NEAR(r->x[2], 2 - 2.0 / 3, 1e-9);
  EXPECT_NEAR(r->x[3], 1 - 2.0 / 3, 1e-9);
}

TEST(EstimatorTest, MatchesBruteForceOnRandomProblems) {
  RngStream rng = RngStream::For(17, "estimator-oracle");
  int checked = 0;
  for (int trial = 0; trial < 150; ++trial) {
    EstimationProblem p;
    p.num_rows = 2 + trial % 2;
    p.num_cells = p.num_rows == 2 ? 4 : 3;
    const bool with_parent = trial % 5 != 0;
    for (int i = 0; i < p.num_rows * p.num_cells; ++i) {
      p.detailed.push_back(static_cast<double>(rng.UniformInt(-3, 5)));
    }
    p.detailed_variance = 0.5 + rng.UniformDouble() * 3;
    if (trial % 3 != 0) {
      for (int r = 0; r < p.num_rows; ++r) {
        p.totals.push_back(static_cast<double>(rng.UniformInt(-2, 10)));
      }
      p.total_variance = 0.5 + rng.UniformDouble() * 6;
    }
    double parent = 0.0;
    if (with_parent) {
      for (int l = 0; l < p.num_cells; ++l) {
        p.column_totals.push_back(static_cast<double>(rng.UniformInt(0, 4)));
        parent += p.column_totals.back();
      }
    } else {
      parent = 12;
    }
    double committed = 0.0;
    for (int r = 0; r < p.num_rows; ++r) {
      const int kind = rng.UniformInt(0, 2);
      const double room = parent - committed;
      if (kind == 1 && room >= 1) {
        const double lb = static_cast<double>(rng.UniformInt(1, std::min(3.0, room)));
        p.rows.push_back(RowConstraint::AtLeast(lb));
        committed += lb;
      } else {
        p.rows.push_back(RowConstraint::Free());
      }
    }
    if (with_parent && trial % 4 == 1) {
      // Pin every row: equalities splitting the parent total.
      double left = parent;
      for (int r = 0; r + 1 < p.num_rows; ++r) {
        const double v = std::floor(left / 2);
        p.rows[r] = RowConstraint::Equal(v);
        left -= v;
      }
      p.rows.back() = RowConstraint::Equal(left);
    }
    if (!with_parent && trial % 2 == 0) p.rows[0] = RowConstraint::Equal(7);
    auto r = EstimateCounts(p);
    ASSERT_TRUE(r.ok()) << "trial " << trial << ": " << r.status();
    const std::vector<double> oracle = BruteForce(p);
    ASSERT_FALSE(oracle.empty()) << "trial " << trial;
    EXPECT_NEAR(Objective(p, r->x), Objective(p, oracle), 1e-7) << "trial " << trial;
    for (size_t i = 0; i < oracle.size(); ++i) {
      EXPECT_NEAR(r->x[i], oracle[i], 1e-6) << "trial " << trial << " entry " << i;
    }
    EXPECT_LE(r->max_violation, 1e-8);
    ++checked;
  }
  EXPECT_EQ(checked, 150);
}

TEST(EstimatorTest, DiagnosticModeIgnoresNonnegativity) {
  EstimationProblem p;
  p.num_rows = 2;
  p.num_cells = 2;
  p.detailed = {-3, 1, 2, 2};
  p.rows = {RowConstraint::Free(), RowConstraint::Free()};
  p.column_totals = {0, 4};
  p.nonnegative = false;
  auto r = EstimateCounts(p);
  ASSERT_TRUE(r.ok());
  // Each column shifts equally: (-2.5, 2.5) and (1.5, 1.5).
  EXPECT_THAT(r->x, ElementsAre(-2.5, 1.5, 2.5, 2.5));
}

TEST(EstimatorTest, InconsistentEqualitiesAreConsistencyErrors) {
  EstimationProblem p;
  p.num_rows = 2;
  p.num_cells = 1;
  p.detailed = {1, 1};
  p.rows = {RowConstraint::Equal(2), RowConstraint::Equal(2)};
  p.column_totals = {5};
  EXPECT_EQ(EstimateCounts(p).status().code(), absl::StatusCode::kFailedPrecondition);
  p.rows = {RowConstraint::AtLeast(4), RowConstraint::AtLeast(4)};
  EXPECT_EQ(EstimateCounts(p).status().code(), absl::StatusCode::kFailedPrecondition);
}

TEST(RoundingTest, IntegerInputUnchanged) {
  auto r = ControlledRound({1, 2, 0, 3}, 2, 2, {1, 5}, {3, 3}, {3, 3});
  ASSERT_TRUE(r.ok());
  EXPECT_THAT(*r, ElementsAre(1, 2, 0, 3));
}

TEST(RoundingTest, TieGoesToLowerIndex) {
  auto row = ControlledRound({4.5, 4.5}, 1, 2, {}, {9}, {9});
  ASSERT_TRUE(row.ok());
  EXPECT_THAT(*row, ElementsAre(5, 4));
  auto col = ControlledRound({4.5, 4.5}, 2, 1, {9}, {4, 4}, {5, 5});
  ASSERT_TRUE(col.ok());
  EXPECT_THAT(*col, ElementsAre(5, 4));
}

TEST(RoundingTest, SmallestL1UnderTotal) {
  auto r = ControlledRound({0.2, 0.2, 0.6}, 1, 3, {}, {1}, {1});
  ASSERT_TRUE(r.ok());
  EXPECT_THAT(*r, ElementsAre(0, 0, 1));
}

TEST(RoundingTest, MatchesBruteForceL1) {
  RngStream rng = RngStream::For(5, "rounding-oracle");
  for (int trial = 0; trial < 200; ++trial) {
    const int rows = 2 + trial % 3;
    const int cols = 3;
    // A real matrix with integer column totals: random shares of each total.
    std::vector<double> x(rows * cols);
    std::vector<int64_t> col_tot(cols);
    for (int c = 0; c < cols; ++c) {
      col_tot[c] = rng.UniformInt(0, 5);
      std::vector<double> w(rows);
      double sum = 0.0;
      for (double& v : w) sum += (v = rng.UniformDouble() + (trial % 7 == 0 ? 0.0 : 0.01));
      for (int r = 0; r < rows; ++r) {
        x[r * cols + c] = sum > 0 ? col_tot[c] * w[r] / sum : 0.0;
      }
      if (trial % 11 == 0) {
        for (int r = 0; r < rows; ++r) x[r * cols + c] = double(col_tot[c]) / rows;
      }
    }
    std::vector<int64_t> lo(rows), hi(rows);
    for (int r = 0; r < rows; ++r) {
      double s = 0.0;
      for (int c = 0; c < cols; ++c) s += x[r * cols + c];
      std::tie(lo[r], hi[r]) = RoundingRowBounds(s, RowConstraint::Free());
    }
    auto got = ControlledRound(x, rows, cols, col_tot, lo, hi);
    ASSERT_TRUE(got.ok()) << "trial " << trial << ": " << got.status();
    // Enumerate all floor/ceil choices.
    const int n = rows * cols;
    double best = std::numeric_limits<double>::infinity();
    for (int mask = 0; mask < (1 << n); ++mask) {
      std::vector<int64_t> v(n);
      bool ok = true;
      for (int i = 0; i < n && ok; ++i) {
        const double fl = std::floor(x[i] + 1e-12);
        v[i] = static_cast<int64_t>(fl) + (mask >> i & 1);
        if ((mask >> i & 1) && std::abs(x[i] - std::round(x[i])) <= 1e-9) ok = false;
      }
      if (!ok) continue;
      for (int c = 0; c < cols && ok; ++c) {
        int64_t s = 0;
        for (int r = 0; r < rows; ++r) s += v[r * cols + c];
        ok = s == col_tot[c];
      }
      for (int r = 0; r < rows && ok; ++r) {
        int64_t s = 0;
        for (int c = 0; c < cols; ++c) s += v[r * cols + c];
        ok = s >= lo[r] && s <= hi[r];
      }
      if (!ok) continue;
      double l1 = 0.0;
      for (int i = 0; i < n; ++i) l1 += std::abs(v[i] - x[i]);
      best = std::min(best, l1);
    }
    double l1 = 0.0;
    for (int i = 0; i < n; ++i) l1 += std::abs((*got)[i] - x[i]);
    EXPECT_NEAR(l1, best, 1e-6) << "trial " << trial;
    for (int c = 0; c < cols; ++c) {
      int64_t s = 0;
      for (int r = 0; r < rows; ++r) s += (*got)[r * cols + c];
      EXPECT_EQ(s, col_tot[c]);
    }
  }
}

TEST(RoundingTest, RowBounds) {
  using Bounds = std::pair<int64_t, int64_t>;
  EXPECT_EQ(RoundingRowBounds(3.4, RowConstraint::Free()), Bounds(3, 4));
  EXPECT_EQ(RoundingRowBounds(3.0000000001, RowConstraint::Free()), Bounds(3, 3));
  EXPECT_EQ(RoundingRowBounds(3.4, RowConstraint::AtLeast(4)), Bounds(4, 4));
  EXPECT_EQ(RoundingRowBounds(6.9999999999, RowConstraint::Equal(7)), Bounds(7, 7));
}

}  // namespace
}  // namespace dalab
