#pragma once

#include <limits>
#include <span>
#include <vector>

#include "carbomarket/lp/lp_problem.hpp"

namespace carbomarket::lp {

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

const char* LpStatusName(LpStatus status);

struct SimplexOptions {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-9;
  double pivot_tol = 1e-11;
  int refactor_interval = 64;
  // Switch from Dantzig to Bland after this many consecutive degenerate
  // pivots, expressed as a multiple of the row count.
  int degenerate_factor = 3;
  // Total pivot budget as a multiple of the variable count.
  int pivot_budget_factor = 50;
  bool force_bland = false;
};

// Basis entries are column indices. An index >= variable_count() denotes the
// artificial column of row (index - variable_count()); such entries only remain
// for rows that are linear combinations of others and carry a zero value.
struct LpSolution {
  LpStatus status = LpStatus::kInfeasible;
  VectorXd primal;
  std::vector<int> basis;
  VectorXd duals;
  VectorXd reduced_costs;
  double objective = std::numeric_limits<double>::quiet_NaN();
  int pivots = 0;
  bool warm_started = false;

  bool optimal() const { return status == LpStatus::kOptimal; }
};

LpSolution Solve(const LpProblem& problem, const SimplexOptions& options = {});

// Starts from `start_basis`. Primal-feasible starts continue with the primal
// simplex, dual-feasible ones with the dual simplex; anything else (including a
// singular or malformed basis) falls back to a cold solve.
LpSolution SolveWithBasis(const LpProblem& problem,
                          std::span<const int> start_basis,
                          const SimplexOptions& options = {});

// Dense LU of the basis matrix A_B, for callers that need A_B^{-1} products.
class BasisFactorization {
 public:
  // Throws Error(kNumeric, "E_SINGULAR_BASIS") if A_B is numerically singular
  // or the basis is malformed.
  BasisFactorization(const SparseMatrix& a, std::span<const int> basis);

  VectorXd Solve(const VectorXd& rhs) const;           // A_B^{-1} rhs
  VectorXd SolveTranspose(const VectorXd& rhs) const;  // A_B^{-T} rhs
  const MatrixXd& matrix() const { return basis_matrix_; }

 private:
  MatrixXd basis_matrix_;
  Eigen::PartialPivLU<MatrixXd> lu_;
};

struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  bool Contains(double y, double tol = 0.0) const {
    return y >= lo - tol && y <= hi + tol;
  }
};

// Largest closed interval of y on which A_B^{-1}(y * G * ray + h) >= -tol.
// Throws Error(kNumeric, "E_EMPTY_INTERVAL") when no such y exists.
Interval FeasibilityInterval(const SparseMatrix& a, std::span<const int> basis,
                             const MatrixXd& g, const VectorXd& h,
                             const VectorXd& ray, double tol = 1e-9);

// Same, with the direction already multiplied out (d = G * ray).
Interval FeasibilityInterval(const BasisFactorization& factor,
                             const VectorXd& direction, const VectorXd& h,
                             double tol = 1e-9);

// Extracts the dense basis column for index `j` (artificial indices map to unit
// vectors).
VectorXd BasisColumn(const SparseMatrix& a, int j);

}  // namespace carbomarket::lp
