#include "carbomarket/lp/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

#include "carbomarket/common/error.hpp"

namespace carbomarket::lp {

const char* LpStatusName(LpStatus status) {
  switch (status) {
    case LpStatus::kOptimal:
      return "optimal";
    case LpStatus::kInfeasible:
      return "infeasible";
    case LpStatus::kUnbounded:
      return "unbounded";
  }
  return "unknown";
}

VectorXd BasisColumn(const SparseMatrix& a, int j) {
  VectorXd col = VectorXd::Zero(a.rows());
  if (j >= a.cols()) {
    col[j - a.cols()] = 1.0;
    return col;
  }
  for (SparseMatrix::InnerIterator it(a, j); it; ++it) col[it.row()] = it.value();
  return col;
}

namespace {

// Debug trajectory dump, enabled by CARBOMARKET_LP_TRACE ("1"/"stderr" or a
// file path to append to).
class Trace {
 public:
  Trace() {
    const char* env = std::getenv("CARBOMARKET_LP_TRACE");
    if (env == nullptr || *env == '\0' || std::strcmp(env, "0") == 0) return;
    if (std::strcmp(env, "1") == 0 || std::strcmp(env, "stderr") == 0) {
      out_ = stderr;
    } else {
      out_ = std::fopen(env, "a");
      owned_ = out_ != nullptr;
    }
  }
  ~Trace() {
    if (owned_) std::fclose(out_);
  }
  Trace(const Trace&) = delete;
  Trace& operator=(const Trace&) = delete;

  bool on() const { return out_ != nullptr; }
  template <typename... Args>
  void Line(const char* fmt, Args... args) {
    if (out_ == nullptr) return;
    std::fprintf(out_, fmt, args...);
    std::fputc('\n', out_);
  }

 private:
  std::FILE* out_ = nullptr;
  bool owned_ = false;
};

enum class PrimalResult { kOptimal, kUnbounded };
enum class DualResult { kOptimal, kInfeasible, kStalled };

class Engine {
 public:
  Engine(const LpProblem& problem, const SimplexOptions& options, Trace& trace)
      : a_(problem.constraint_matrix()),
        c_(problem.cost()),
        b_(problem.rhs()),
        opt_(options),
        trace_(trace),
        m_(problem.constraint_count()),
        n_(problem.variable_count()),
        sign_(m_, 1.0),
        basis_(m_, -1),
        pos_(n_ + m_, -1),
        budget_(std::max(1, opt_.pivot_budget_factor) * std::max(n_, 1)) {}

  // Cold start: crash basis from singleton columns, artificials elsewhere.
  LpSolution Cold() {
    std::fill(pos_.begin(), pos_.end(), -1);
    std::vector<bool> row_taken(m_, false);
    for (int j = 0; j < n_; ++j) {
      if (a_.col(j).nonZeros() != 1) continue;
      SparseMatrix::InnerIterator it(a_, j);
      while (it && it.value() == 0.0) ++it;
      if (!it) continue;
      const int r = static_cast<int>(it.row());
      if (row_taken[r]) continue;
      if (b_[r] / it.value() < 0.0) continue;
      row_taken[r] = true;
      basis_[r] = j;
    }
    bool any_artificial = false;
    for (int r = 0; r < m_; ++r) {
      if (row_taken[r]) continue;
      basis_[r] = n_ + r;
      sign_[r] = b_[r] < 0.0 ? -1.0 : 1.0;
      any_artificial = true;
    }
    for (int r = 0; r < m_; ++r) pos_[basis_[r]] = r;
    if (!Refactor()) {
      ThrowNumeric("E_SINGULAR_BASIS", "crash basis is singular");
    }

    if (any_artificial) {
      VectorXd phase1 = VectorXd::Zero(n_ + m_);
      phase1.tail(m_).setOnes();
      PrimalLoop(phase1, 1);
      double infeasibility = 0.0;
      for (int r = 0; r < m_; ++r) {
        if (basis_[r] >= n_) infeasibility += std::max(xb_[r], 0.0);
      }
      const double scale = 1.0 + (m_ > 0 ? b_.lpNorm<Eigen::Infinity>() : 0.0);
      if (infeasibility > 1e-8 * scale) {
        LpSolution sol;
        sol.status = LpStatus::kInfeasible;
        sol.pivots = pivots_;
        sol.basis = basis_;
        trace_.Line("lp.end status=infeasible pivots=%d residual=%.17g",
                    pivots_, infeasibility);
        return sol;
      }
      DriveOutArtificials();
    }
    return Phase2();
  }

  LpSolution Warm(std::span<const int> start) {
    if (static_cast<int>(start.size()) != m_) return Restart();
    std::fill(pos_.begin(), pos_.end(), -1);
    for (int r = 0; r < m_; ++r) {
      const int j = start[r];
      if (j < 0 || j >= n_ + m_ || pos_[j] >= 0) return Restart();
      basis_[r] = j;
      pos_[j] = r;
    }
    if (!Refactor()) return Restart();
    for (int r = 0; r < m_; ++r) {
      if (basis_[r] >= n_ && std::abs(xb_[r]) > opt_.feasibility_tol) {
        return Restart();
      }
    }
    bool primal_feasible = true;
    for (int r = 0; r < m_; ++r) {
      if (xb_[r] < -opt_.feasibility_tol) primal_feasible = false;
    }
    if (primal_feasible) return Phase2();

    const VectorXd cost = ExtendedCost();
    const VectorXd y = Duals(cost);
    for (int j = 0; j < n_; ++j) {
      if (pos_[j] >= 0) continue;
      if (c_[j] - a_.col(j).dot(y) < -opt_.optimality_tol) return Restart();
    }
    switch (DualLoop(cost)) {
      case DualResult::kOptimal:
        return Finish(LpStatus::kOptimal);
      case DualResult::kInfeasible:
        // Confirm with a cold solve; an infeasibility verdict from a warm
        // start is rare and worth the extra work to double-check.
        return Restart();
      case DualResult::kStalled:
        return Restart();
    }
    return Restart();
  }

 private:
  LpSolution Restart() {
    const int spent = pivots_;
    pivots_ = 0;
    std::fill(sign_.begin(), sign_.end(), 1.0);
    LpSolution sol = Cold();
    sol.pivots += spent;
    return sol;
  }

  VectorXd ExtendedCost() const {
    VectorXd cost = VectorXd::Zero(n_ + m_);
    cost.head(n_) = c_;
    return cost;
  }

  LpSolution Phase2() {
    const PrimalResult res = PrimalLoop(ExtendedCost(), 2);
    return Finish(res == PrimalResult::kOptimal ? LpStatus::kOptimal
                                                : LpStatus::kUnbounded);
  }

  // y·A_j, with artificial columns mapped to signed unit vectors.
  double ColumnDot(const VectorXd& y, int j) const {
    if (j >= n_) return sign_[j - n_] * y[j - n_];
    return a_.col(j).dot(y);
  }

  VectorXd FtranColumn(int j) const {
    if (j >= n_) return sign_[j - n_] * binv_.col(j - n_);
    VectorXd out = VectorXd::Zero(m_);
    for (SparseMatrix::InnerIterator it(a_, j); it; ++it) {
      out.noalias() += it.value() * binv_.col(it.row());
    }
    return out;
  }

  VectorXd Duals(const VectorXd& cost) const {
    VectorXd cb(m_);
    for (int r = 0; r < m_; ++r) cb[r] = cost[basis_[r]];
    return binv_.transpose() * cb;
  }

  double Objective(const VectorXd& cost) const {
    double v = 0.0;
    for (int r = 0; r < m_; ++r) v += cost[basis_[r]] * xb_[r];
    return v;
  }

  MatrixXd BasisMatrix() const {
    MatrixXd bm = MatrixXd::Zero(m_, m_);
    for (int r = 0; r < m_; ++r) {
      const int j = basis_[r];
      if (j >= n_) {
        bm(j - n_, r) = sign_[j - n_];
      } else {
        for (SparseMatrix::InnerIterator it(a_, j); it; ++it) {
          bm(it.row(), r) = it.value();
        }
      }
    }
    return bm;
  }

  bool Refactor() {
    since_refactor_ = 0;
    if (m_ == 0) {
      binv_.resize(0, 0);
      xb_.resize(0);
      return true;
    }
    const MatrixXd bm = BasisMatrix();
    Eigen::PartialPivLU<MatrixXd> lu(bm);
    const auto diag = lu.matrixLU().diagonal().cwiseAbs();
    const double scale = std::max(1.0, bm.lpNorm<Eigen::Infinity>());
    if (!(diag.minCoeff() > 1e-11 * scale)) return false;
    binv_ = lu.inverse();
    xb_ = lu.solve(b_);
    return binv_.allFinite() && xb_.allFinite();
  }

  void Pivot(int r, int q, const VectorXd& alpha, double step) {
    xb_.noalias() -= step * alpha;
    xb_[r] = step;
    const Eigen::RowVectorXd pivot_row = binv_.row(r) / alpha[r];
    binv_.noalias() -= alpha * pivot_row;
    binv_.row(r) = pivot_row;
    pos_[basis_[r]] = -1;
    basis_[r] = q;
    pos_[q] = r;
    ++pivots_;
    if (++since_refactor_ >= opt_.refactor_interval) {
      if (!Refactor()) {
        // One retry from scratch with the same basis is all Refactor can do;
        // a genuinely singular basis here means the pivot was bad.
        ThrowNumeric("E_SINGULAR_BASIS",
                     "basis became singular after " + std::to_string(pivots_) +
                         " pivots");
      }
    }
  }

  void CheckBudget() const {
    if (pivots_ >= budget_) {
      ThrowNumeric("E_PIVOT_BUDGET", "simplex exceeded pivot budget of " +
                                         std::to_string(budget_));
    }
  }

  PrimalResult PrimalLoop(const VectorXd& cost, int phase) {
    bool bland = opt_.force_bland;
    int degenerate_run = 0;
    const int degenerate_limit = std::max(1, opt_.degenerate_factor * m_);
    while (true) {
      CheckBudget();
      const VectorXd y = Duals(cost);
      int q = -1;
      double best = -opt_.optimality_tol;
      for (int j = 0; j < n_; ++j) {
        if (pos_[j] >= 0) continue;
        const double d = cost[j] - a_.col(j).dot(y);
        if (bland) {
          if (d < -opt_.optimality_tol) {
            q = j;
            break;
          }
        } else if (d < best) {
          best = d;
          q = j;
        }
      }
      if (q < 0) return PrimalResult::kOptimal;

      const VectorXd alpha = FtranColumn(q);
      const double alpha_scale = std::max(1.0, alpha.lpNorm<Eigen::Infinity>());
      const double ptol = opt_.pivot_tol * alpha_scale;
      int r = -1;
      // A basic artificial (redundant row, value zero) must not move.
      for (int i = 0; i < m_ && phase == 2; ++i) {
        if (basis_[i] >= n_ && std::abs(alpha[i]) > ptol) {
          r = i;
          break;
        }
      }
      double step = 0.0;
      if (r >= 0) {
        step = 0.0;
      } else if (bland) {
        double min_ratio = std::numeric_limits<double>::infinity();
        for (int i = 0; i < m_; ++i) {
          if (alpha[i] <= ptol) continue;
          const double ratio = std::max(xb_[i], 0.0) / alpha[i];
          if (r < 0 || ratio < min_ratio - 1e-12 ||
              (ratio <= min_ratio + 1e-12 && basis_[i] < basis_[r])) {
            min_ratio = std::min(min_ratio, ratio);
            r = i;
          }
        }
        if (r >= 0) step = std::max(xb_[r], 0.0) / alpha[r];
      } else {
        // Two-pass (Harris) ratio test: among rows whose ratio is within the
        // feasibility tolerance of the minimum, take the largest pivot.
        double bound = std::numeric_limits<double>::infinity();
        for (int i = 0; i < m_; ++i) {
          if (alpha[i] <= ptol) continue;
          bound = std::min(bound,
                           (std::max(xb_[i], 0.0) + opt_.feasibility_tol) / alpha[i]);
        }
        double best_alpha = 0.0;
        for (int i = 0; i < m_; ++i) {
          if (alpha[i] <= ptol) continue;
          if (std::max(xb_[i], 0.0) / alpha[i] <= bound && alpha[i] > best_alpha) {
            best_alpha = alpha[i];
            r = i;
          }
        }
        if (r >= 0) step = std::max(xb_[r], 0.0) / alpha[r];
      }
      if (r < 0) return PrimalResult::kUnbounded;

      if (step <= opt_.feasibility_tol) {
        if (++degenerate_run > degenerate_limit) bland = true;
      } else {
        degenerate_run = 0;
      }
      const int leaving = basis_[r];
      Pivot(r, q, alpha, step);
      if (trace_.on()) {
        trace_.Line("lp.pivot phase=%d iter=%d enter=%d leave=%d row=%d "
                    "step=%.17g obj=%.17g rule=%s",
                    phase, pivots_, q, leaving, r, step, Objective(cost),
                    bland ? "bland" : "dantzig");
      }
    }
  }

  DualResult DualLoop(const VectorXd& cost) {
    while (true) {
      if (pivots_ >= budget_) return DualResult::kStalled;
      int r = -1;
      double worst = -opt_.feasibility_tol;
      for (int i = 0; i < m_; ++i) {
        if (xb_[i] < worst) {
          worst = xb_[i];
          r = i;
        }
      }
      if (r < 0) return DualResult::kOptimal;
      if (basis_[r] >= n_) return DualResult::kStalled;

      const VectorXd y = Duals(cost);
      const VectorXd row = binv_.row(r).transpose();
      int q = -1;
      double min_ratio = std::numeric_limits<double>::infinity();
      double q_alpha = 0.0;
      for (int j = 0; j < n_; ++j) {
        if (pos_[j] >= 0) continue;
        const double arj = a_.col(j).dot(row);
        if (arj >= -opt_.pivot_tol) continue;
        const double d = std::max(cost[j] - a_.col(j).dot(y), 0.0);
        const double ratio = d / -arj;
        if (ratio < min_ratio - 1e-12 ||
            (ratio <= min_ratio + 1e-12 && std::abs(arj) > std::abs(q_alpha))) {
          min_ratio = std::min(min_ratio, ratio);
          q = j;
          q_alpha = arj;
        }
      }
      if (q < 0) return DualResult::kInfeasible;

      const VectorXd alpha = FtranColumn(q);
      if (std::abs(alpha[r]) <= opt_.pivot_tol) return DualResult::kStalled;
      const double step = xb_[r] / alpha[r];
      const int leaving = basis_[r];
      Pivot(r, q, alpha, step);
      if (trace_.on()) {
        trace_.Line("lp.pivot phase=dual iter=%d enter=%d leave=%d row=%d "
                    "step=%.17g obj=%.17g",
                    pivots_, q, leaving, r, step, Objective(cost));
      }
    }
  }

  void DriveOutArtificials() {
    for (int r = 0; r < m_; ++r) {
      if (basis_[r] < n_) continue;
      const VectorXd row = binv_.row(r).transpose();
      int q = -1;
      double best = 1e-7;
      for (int j = 0; j < n_; ++j) {
        if (pos_[j] >= 0) continue;
        const double v = std::abs(a_.col(j).dot(row));
        if (v > best) {
          best = v;
          q = j;
        }
      }
      if (q < 0) continue;  // redundant row; the artificial stays at zero
      const VectorXd alpha = FtranColumn(q);
      Pivot(r, q, alpha, xb_[r] / alpha[r]);
      if (trace_.on()) {
        trace_.Line("lp.pivot phase=drive iter=%d enter=%d row=%d", pivots_, q,
                    r);
      }
    }
  }

  LpSolution Finish(LpStatus status) {
    LpSolution sol;
    sol.status = status;
    sol.pivots = pivots_;
    // Remaining artificials sit at zero, so their sign is immaterial; use the
    // canonical +1 columns for everything exposed to callers.
    std::fill(sign_.begin(), sign_.end(), 1.0);
    if (!Refactor()) {
      ThrowNumeric("E_SINGULAR_BASIS", "final basis is numerically singular");
    }
    sol.basis = basis_;
    if (status != LpStatus::kOptimal) return sol;

    const MatrixXd bm = BasisMatrix();
    const double b_scale = 1.0 + (m_ > 0 ? b_.lpNorm<Eigen::Infinity>() : 0.0);
    if (m_ > 0 && (bm * xb_ - b_).lpNorm<Eigen::Infinity>() > 1e-8 * b_scale) {
      ThrowNumeric("E_SINGULAR_BASIS", "basis residual exceeds tolerance");
    }
    sol.primal = VectorXd::Zero(n_);
    for (int r = 0; r < m_; ++r) {
      const int j = basis_[r];
      if (j < n_) sol.primal[j] = std::max(xb_[r], 0.0);
    }
    const VectorXd cost = ExtendedCost();
    sol.duals = Duals(cost);
    sol.reduced_costs = c_ - a_.transpose() * sol.duals;
    for (int r = 0; r < m_; ++r) {
      if (basis_[r] < n_) sol.reduced_costs[basis_[r]] = 0.0;
    }
    sol.objective = c_.dot(sol.primal);
    return sol;
  }

  const SparseMatrix& a_;
  const VectorXd& c_;
  const VectorXd& b_;
  const SimplexOptions& opt_;
  Trace& trace_;
  const int m_;
  const int n_;
  std::vector<double> sign_;
  std::vector<int> basis_;
  std::vector<int> pos_;
  MatrixXd binv_;
  VectorXd xb_;
  int pivots_ = 0;
  int since_refactor_ = 0;
  const int budget_;
};

LpSolution Run(const LpProblem& problem, const SimplexOptions& options,
               const std::span<const int>* start) {
  Trace trace;
  trace.Line("lp.begin rows=%d cols=%d warm=%d", problem.constraint_count(),
             problem.variable_count(), start != nullptr ? 1 : 0);
  Engine engine(problem, options, trace);
  LpSolution sol = start != nullptr ? engine.Warm(*start) : engine.Cold();
  sol.warm_started = start != nullptr;
  trace.Line("lp.end status=%s pivots=%d obj=%.17g", LpStatusName(sol.status),
             sol.pivots, sol.objective);
  return sol;
}

}  // namespace

LpSolution Solve(const LpProblem& problem, const SimplexOptions& options) {
  return Run(problem, options, nullptr);
}

LpSolution SolveWithBasis(const LpProblem& problem,
                          std::span<const int> start_basis,
                          const SimplexOptions& options) {
  return Run(problem, options, &start_basis);
}

BasisFactorization::BasisFactorization(const SparseMatrix& a,
                                       std::span<const int> basis) {
  const int m = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());
  if (static_cast<int>(basis.size()) != m) {
    ThrowNumeric("E_SINGULAR_BASIS", "basis has " + std::to_string(basis.size()) +
                                         " entries for " + std::to_string(m) +
                                         " rows");
  }
  basis_matrix_ = MatrixXd::Zero(m, m);
  for (int r = 0; r < m; ++r) {
    const int j = basis[r];
    if (j < 0 || j >= n + m) {
      ThrowNumeric("E_SINGULAR_BASIS", "basis index out of range");
    }
    basis_matrix_.col(r) = BasisColumn(a, j);
  }
  if (m == 0) return;
  lu_.compute(basis_matrix_);
  const double scale = std::max(1.0, basis_matrix_.lpNorm<Eigen::Infinity>());
  if (!(lu_.matrixLU().diagonal().cwiseAbs().minCoeff() > 1e-11 * scale)) {
    ThrowNumeric("E_SINGULAR_BASIS", "basis matrix is numerically singular");
  }
}

VectorXd BasisFactorization::Solve(const VectorXd& rhs) const {
  if (basis_matrix_.rows() == 0) return VectorXd();
  return lu_.solve(rhs);
}

VectorXd BasisFactorization::SolveTranspose(const VectorXd& rhs) const {
  if (basis_matrix_.rows() == 0) return VectorXd();
  return lu_.transpose().solve(rhs);
}

Interval FeasibilityInterval(const BasisFactorization& factor,
                             const VectorXd& direction, const VectorXd& h,
                             double tol) {
  // x_B(y) = u + y v
  const VectorXd u = factor.Solve(h);
  const VectorXd v = factor.Solve(direction);
  Interval out;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    // Treat numerically-zero slopes as constant components.
    const double slope_tol = 1e-12 * (1.0 + std::abs(u[i]));
    if (std::abs(v[i]) <= slope_tol) {
      if (u[i] < -tol) {
        ThrowNumeric("E_EMPTY_INTERVAL",
                     "basic component " + std::to_string(i) +
                         " is negative for every parameter value");
      }
      continue;
    }
    const double root = (-tol - u[i]) / v[i];
    if (v[i] > 0.0) {
      out.lo = std::max(out.lo, root);
    } else {
      out.hi = std::min(out.hi, root);
    }
  }
  if (out.lo > out.hi) {
    ThrowNumeric("E_EMPTY_INTERVAL", "feasibility interval is empty");
  }
  return out;
}

Interval FeasibilityInterval(const SparseMatrix& a, std::span<const int> basis,
                             const MatrixXd& g, const VectorXd& h,
                             const VectorXd& ray, double tol) {
  const BasisFactorization factor(a, basis);
  return FeasibilityInterval(factor, g * ray, h, tol);
}

}  // namespace carbomarket::lp
