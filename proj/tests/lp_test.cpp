#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "carbomarket/common/error.hpp"
#include "carbomarket/lp/simplex.hpp"
#include "support/tableau_oracle.hpp"

namespace cm = carbomarket;
using cm::lp::LpProblem;
using cm::lp::LpSolution;
using cm::lp::LpStatus;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

LpProblem Dense(const MatrixXd& a, const VectorXd& b, const VectorXd& c) {
  return LpProblem(c, a.sparseView(), b);
}

// Feasible and bounded by construction: b = A x0 with x0 >= 0, and
// c = A'y0 + s with s >= 0 (dual feasible).
struct RandomLp {
  MatrixXd a;
  VectorXd b;
  VectorXd c;
};

RandomLp MakeRandomLp(std::mt19937& rng, int m, int n, double zero_prob = 0.3) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> pos(0.0, 1.0);
  RandomLp lp;
  lp.a = MatrixXd::Zero(m, n);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      if (pos(rng) > 0.35) lp.a(i, j) = std::round(u(rng) * 100.0) / 10.0;
    }
  }
  VectorXd x0(n);
  for (int j = 0; j < n; ++j) x0[j] = pos(rng) < zero_prob ? 0.0 : pos(rng) * 5;
  lp.b = lp.a * x0;
  VectorXd y0(m);
  for (int i = 0; i < m; ++i) y0[i] = u(rng);
  VectorXd s(n);
  for (int j = 0; j < n; ++j) s[j] = pos(rng) < 0.2 ? 0.0 : pos(rng) * 3;
  lp.c = lp.a.transpose() * y0 + s;
  return lp;
}

void ExpectSolutionInvariants(const LpProblem& p, const LpSolution& sol) {
  ASSERT_EQ(sol.status, LpStatus::kOptimal);
  const int m = p.constraint_count();
  const int n = p.variable_count();
  ASSERT_EQ(static_cast<int>(sol.basis.size()), m);
  std::vector<bool> basic(n + m, false);
  for (int j : sol.basis) basic[j] = true;
  for (int j = 0; j < n; ++j) {
    EXPECT_GE(sol.primal[j], 0.0);
    if (!basic[j]) {
      EXPECT_EQ(sol.primal[j], 0.0);
      EXPECT_GE(sol.reduced_costs[j], -1e-9);
    }
  }
  const VectorXd residual = p.constraint_matrix() * sol.primal - p.rhs();
  EXPECT_LE(residual.lpNorm<Eigen::Infinity>(),
            1e-8 * (1.0 + p.rhs().lpNorm<Eigen::Infinity>()));
  // y = A_B^{-T} c_B
  const cm::lp::BasisFactorization f(p.constraint_matrix(), sol.basis);
  VectorXd cb(m);
  for (int r = 0; r < m; ++r) {
    cb[r] = sol.basis[r] < n ? p.cost()[sol.basis[r]] : 0.0;
  }
  EXPECT_LE((f.matrix().transpose() * sol.duals - cb).lpNorm<Eigen::Infinity>(),
            1e-8 * (1.0 + cb.lpNorm<Eigen::Infinity>()));
  // Strong duality and complementary slackness.
  const double dual_obj = p.rhs().dot(sol.duals);
  EXPECT_NEAR(dual_obj, sol.objective, 1e-7 * (1.0 + std::abs(sol.objective)));
  for (int j = 0; j < n; ++j) {
    EXPECT_LE(std::abs(sol.primal[j] * sol.reduced_costs[j]), 1e-7);
  }
}

}  // namespace

TEST(Simplex, OneConstraintPicksCheapVariable) {
  MatrixXd a(1, 2);
  a << 1, 1;
  const LpProblem p = Dense(a, VectorXd::Ones(1), VectorXd::Unit(2, 0));
  const LpSolution sol = cm::lp::Solve(p);
  ASSERT_TRUE(sol.optimal());
  EXPECT_DOUBLE_EQ(sol.primal[0], 0.0);
  EXPECT_DOUBLE_EQ(sol.primal[1], 1.0);
  EXPECT_DOUBLE_EQ(sol.objective, 0.0);
  ASSERT_EQ(sol.basis.size(), 1u);
  EXPECT_EQ(sol.basis[0], 1);
}

TEST(Simplex, SingleBindingBoundHasUnitDual) {
  // min -x1  s.t.  x1 + s = 1
  MatrixXd a(1, 2);
  a << 1, 1;
  VectorXd c(2);
  c << -1, 0;
  const LpSolution sol = cm::lp::Solve(Dense(a, VectorXd::Ones(1), c));
  ASSERT_TRUE(sol.optimal());
  EXPECT_DOUBLE_EQ(sol.primal[0], 1.0);
  EXPECT_DOUBLE_EQ(sol.objective, -1.0);
  EXPECT_DOUBLE_EQ(sol.duals[0], -1.0);
}

TEST(Simplex, MatchesTableauOracleOnRandomInstances) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    const RandomLp lp = MakeRandomLp(rng, 10, 20);
    const LpProblem p = Dense(lp.a, lp.b, lp.c);
    const LpSolution sol = cm::lp::Solve(p);
    const auto oracle = cmtest::TableauSolve(lp.a, lp.b, lp.c);
    ASSERT_EQ(oracle.status, cmtest::TableauResult::kOptimal) << trial;
    ASSERT_TRUE(sol.optimal()) << trial;
    EXPECT_NEAR(sol.objective, oracle.objective, 1e-7) << trial;
    ExpectSolutionInvariants(p, sol);
  }
}

TEST(Simplex, BlandOnlyRuleAgreesWithDantzig) {
  std::mt19937 rng(5);
  cm::lp::SimplexOptions bland;
  bland.force_bland = true;
  for (int trial = 0; trial < 20; ++trial) {
    const RandomLp lp = MakeRandomLp(rng, 8, 15);
    const LpProblem p = Dense(lp.a, lp.b, lp.c);
    const LpSolution a = cm::lp::Solve(p);
    const LpSolution b = cm::lp::Solve(p, bland);
    ASSERT_TRUE(a.optimal() && b.optimal());
    EXPECT_NEAR(a.objective, b.objective, 1e-8);
  }
}

TEST(Simplex, ReportsInfeasibleAndUnbounded) {
  // x1 + x2 = -1 with x >= 0 is infeasible.
  MatrixXd a(1, 2);
  a << 1, 1;
  EXPECT_EQ(cm::lp::Solve(Dense(a, -VectorXd::Ones(1), VectorXd::Ones(2))).status,
            LpStatus::kInfeasible);
  // min -x1 s.t. x1 - x2 = 0 is unbounded.
  MatrixXd a2(1, 2);
  a2 << 1, -1;
  VectorXd c(2);
  c << -1, 0;
  EXPECT_EQ(cm::lp::Solve(Dense(a2, VectorXd::Zero(1), c)).status,
            LpStatus::kUnbounded);
}

TEST(Simplex, TerminatesOnCyclingExample) {
  // Beale's example, which cycles under the textbook Dantzig rule with
  // lowest-index tie breaking. Slacks s1..s3 are columns 4..6.
  MatrixXd a(3, 7);
  a << 0.25, -8, -1, 9, 1, 0, 0,  //
      0.5, -12, -0.5, 3, 0, 1, 0,  //
      0, 0, 1, 0, 0, 0, 1;
  VectorXd b(3);
  b << 0, 0, 1;
  VectorXd c(7);
  c << -0.75, 20, -0.5, 6, 0, 0, 0;
  const LpProblem p = Dense(a, b, c);
  const LpSolution sol = cm::lp::Solve(p);
  ASSERT_TRUE(sol.optimal());
  EXPECT_NEAR(sol.objective, -1.25, 1e-12);
  EXPECT_LE(sol.pivots, 50 * p.variable_count());
  ExpectSolutionInvariants(p, sol);
}

TEST(Simplex, TerminatesOnHighlyDegenerateInstances) {
  // Many rows share the same (zero) right-hand side.
  std::mt19937 rng(17);
  std::uniform_int_distribution<int> coef(-3, 3);
  for (int trial = 0; trial < 30; ++trial) {
    const int m = 12;
    const int n = 24;
    MatrixXd a = MatrixXd::Zero(m, n);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) a(i, j) = coef(rng);
      a(i, i) = 1.0;  // keeps rows independent
    }
    VectorXd b = VectorXd::Zero(m);
    b[m - 1] = 1.0;
    a.row(m - 1).setOnes();
    VectorXd c(n);
    for (int j = 0; j < n; ++j) c[j] = coef(rng);
    const LpProblem p = Dense(a, b, c);
    const LpSolution sol = cm::lp::Solve(p);
    const auto oracle = cmtest::TableauSolve(a, b, c);
    ASSERT_LE(sol.pivots, 50 * n);
    if (oracle.status == cmtest::TableauResult::kOptimal) {
      ASSERT_TRUE(sol.optimal()) << trial;
      EXPECT_NEAR(sol.objective, oracle.objective, 1e-7) << trial;
    } else {
      EXPECT_FALSE(sol.optimal()) << trial;
    }
  }
}

TEST(Simplex, RedundantRowsAreTolerated) {
  MatrixXd a(3, 3);
  a << 1, 1, 1,  //
      2, 2, 2,   //
      1, 0, -1;
  VectorXd b(3);
  b << 2, 4, 0;
  VectorXd c(3);
  c << 1, 3, 2;
  const LpProblem p = Dense(a, b, c);
  const LpSolution sol = cm::lp::Solve(p);
  ASSERT_TRUE(sol.optimal());
  EXPECT_NEAR(sol.objective, 3.0, 1e-12);  // x1 = x3 = 1
  EXPECT_EQ(sol.basis.size(), 3u);
  EXPECT_LE((a * sol.primal - b).lpNorm<Eigen::Infinity>(), 1e-10);
  // The artificial left in the basis still allows a warm start.
  const LpSolution again = cm::lp::SolveWithBasis(p, sol.basis);
  ASSERT_TRUE(again.optimal());
  EXPECT_EQ(again.pivots, 0);
}

TEST(WarmStart, OptimalBasisIsAFixedPoint) {
  std::mt19937 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const RandomLp lp = MakeRandomLp(rng, 10, 20);
    const LpProblem p = Dense(lp.a, lp.b, lp.c);
    const LpSolution cold = cm::lp::Solve(p);
    const LpSolution warm = cm::lp::SolveWithBasis(p, cold.basis);
    ASSERT_TRUE(warm.optimal());
    EXPECT_EQ(warm.pivots, 0);
    EXPECT_EQ(warm.basis, cold.basis);
    EXPECT_LE((warm.primal - cold.primal).lpNorm<Eigen::Infinity>(), 1e-12);
  }
}

TEST(WarmStart, ParametricRhsStepMatchesColdSolve) {
  std::mt19937 rng(29);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int fewer_pivots = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const RandomLp lp = MakeRandomLp(rng, 10, 20, 0.0);
    // b(y) = A (x0 + y d) stays feasible for small y.
    VectorXd d(20);
    for (int j = 0; j < 20; ++j) d[j] = u(rng);
    const LpProblem p0 = Dense(lp.a, lp.b, lp.c);
    const LpSolution at_y = cm::lp::Solve(p0);
    ASSERT_TRUE(at_y.optimal());
    const LpProblem p1 = p0.WithRhs(lp.b + 0.3 * lp.a * d);
    const LpSolution cold = cm::lp::Solve(p1);
    const LpSolution warm = cm::lp::SolveWithBasis(p1, at_y.basis);
    ASSERT_EQ(cold.status, warm.status) << trial;
    if (!cold.optimal()) continue;
    EXPECT_NEAR(warm.objective, cold.objective,
                1e-8 * (1.0 + std::abs(cold.objective)))
        << trial;
    ExpectSolutionInvariants(p1, warm);
    if (warm.pivots < cold.pivots) ++fewer_pivots;
  }
  EXPECT_GT(fewer_pivots, 25);
}

TEST(WarmStart, EquivalenceOnPerturbedCostsAndRhs) {
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const RandomLp lp = MakeRandomLp(rng, 8, 16);
    const LpProblem p = Dense(lp.a, lp.b, lp.c);
    const LpSolution base = cm::lp::Solve(p);
    ASSERT_TRUE(base.optimal());
    VectorXd c2 = lp.c;
    for (int j = 0; j < c2.size(); ++j) c2[j] += 0.5 * u(rng);
    const LpProblem q = trial % 2 == 0 ? p.WithCost(c2) : p;
    const LpSolution cold = cm::lp::Solve(q);
    const LpSolution warm = cm::lp::SolveWithBasis(q, base.basis);
    ASSERT_EQ(cold.status, warm.status) << trial;
    if (cold.optimal()) {
      EXPECT_NEAR(warm.objective, cold.objective,
                  1e-8 * (1.0 + std::abs(cold.objective)))
          << trial;
    }
  }
}

TEST(WarmStart, SingularBasisFallsBackToColdSolve) {
  MatrixXd a(2, 4);
  a << 1, 2, 1, 0,  //
      2, 4, 0, 1;
  VectorXd b(2);
  b << 4, 6;
  VectorXd c(4);
  c << -1, -1, 0, 0;
  const LpProblem p = Dense(a, b, c);
  const std::vector<int> singular{0, 1};  // columns 0 and 1 are parallel
  const LpSolution warm = cm::lp::SolveWithBasis(p, singular);
  const LpSolution cold = cm::lp::Solve(p);
  ASSERT_TRUE(warm.optimal());
  EXPECT_DOUBLE_EQ(warm.objective, cold.objective);
  // Malformed bases take the same route.
  const std::vector<int> short_basis{2};
  EXPECT_DOUBLE_EQ(cm::lp::SolveWithBasis(p, short_basis).objective,
                   cold.objective);
}

TEST(FeasibilityInterval, ParameterIndependentBasisIsUnbounded) {
  MatrixXd a = MatrixXd::Identity(2, 2);
  const std::vector<int> basis{0, 1};
  VectorXd h(2);
  h << 1, 2;
  const auto iv = cm::lp::FeasibilityInterval(
      a.sparseView(), basis, MatrixXd::Zero(2, 1), h, VectorXd::Ones(1));
  EXPECT_TRUE(std::isinf(iv.lo) && iv.lo < 0);
  EXPECT_TRUE(std::isinf(iv.hi) && iv.hi > 0);
}

TEST(FeasibilityInterval, SingleRootGivesHalfLine) {
  // x_B = 1 - y
  MatrixXd a = MatrixXd::Identity(1, 1);
  const std::vector<int> basis{0};
  MatrixXd g(1, 1);
  g << -1;
  const auto iv = cm::lp::FeasibilityInterval(a.sparseView(), basis, g,
                                              VectorXd::Ones(1), VectorXd::Ones(1));
  EXPECT_TRUE(std::isinf(iv.lo) && iv.lo < 0);
  EXPECT_NEAR(iv.hi, 1.0, 1e-8);
}

TEST(FeasibilityInterval, EmptyIntervalIsAnError) {
  MatrixXd a = MatrixXd::Identity(2, 2);
  const std::vector<int> basis{0, 1};
  MatrixXd g(2, 1);
  g << 1, -1;
  VectorXd h(2);
  h << -2, -2;  // needs y >= 2 and y <= -2
  try {
    cm::lp::FeasibilityInterval(a.sparseView(), basis, g, h, VectorXd::Ones(1));
    FAIL() << "expected an error";
  } catch (const cm::Error& e) {
    EXPECT_EQ(e.code(), "E_EMPTY_INTERVAL");
    EXPECT_EQ(e.kind(), cm::ErrorKind::kNumeric);
  }
}

TEST(FeasibilityInterval, RandomIntervalsMatchPointwiseChecks) {
  std::mt19937 rng(41);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const RandomLp lp = MakeRandomLp(rng, 6, 12, 0.0);
    VectorXd d(6);
    for (int i = 0; i < 6; ++i) d[i] = u(rng);
    const LpProblem p = Dense(lp.a, lp.b, lp.c);
    const LpSolution sol = cm::lp::Solve(p);
    ASSERT_TRUE(sol.optimal());
    MatrixXd g = d;  // one parameter direction
    const auto iv = cm::lp::FeasibilityInterval(p.constraint_matrix(), sol.basis,
                                                g, lp.b, VectorXd::Ones(1));
    ASSERT_TRUE(iv.Contains(0.0, 1e-9));
    const cm::lp::BasisFactorization f(p.constraint_matrix(), sol.basis);
    for (double y : {iv.lo, iv.hi}) {
      if (std::isinf(y)) continue;
      const VectorXd inside = f.Solve(lp.b + y * d);
      EXPECT_GE(inside.minCoeff(), -1e-7);
      // Slightly beyond the end a component goes negative.
      const double beyond = y + (y == iv.hi ? 1e-4 : -1e-4);
      EXPECT_LT(f.Solve(lp.b + beyond * d).minCoeff(), 0.0);
    }
  }
}

TEST(Trace, EnvironmentToggleWritesPivotLines) {
  const auto path =
      std::filesystem::temp_directory_path() / "carbomarket_lp_trace_test.txt";
  std::filesystem::remove(path);
  ::setenv("CARBOMARKET_LP_TRACE", path.c_str(), 1);
  std::mt19937 rng(3);
  const RandomLp lp = MakeRandomLp(rng, 5, 10);
  cm::lp::Solve(Dense(lp.a, lp.b, lp.c));
  ::unsetenv("CARBOMARKET_LP_TRACE");
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_NE(ss.str().find("lp.begin"), std::string::npos);
  EXPECT_NE(ss.str().find("lp.end status=optimal"), std::string::npos);
  std::filesystem::remove(path);
}
