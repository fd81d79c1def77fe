#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace carbomarket::lp {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// Standard-form linear program:  min c'x  s.t.  A x = b,  x >= 0.
//
// The constraint matrix is shared between copies, so re-targeting the right-hand
// side (the parametric sweeps do this thousands of times) does not copy A.
class LpProblem {
 public:
  LpProblem() : matrix_(std::make_shared<const SparseMatrix>()) {}
  LpProblem(VectorXd cost, SparseMatrix constraint_matrix, VectorXd rhs);

  int variable_count() const { return static_cast<int>(cost_.size()); }
  int constraint_count() const { return static_cast<int>(rhs_.size()); }

  const VectorXd& cost() const { return cost_; }
  const SparseMatrix& constraint_matrix() const { return *matrix_; }
  const VectorXd& rhs() const { return rhs_; }

  LpProblem WithRhs(VectorXd rhs) const;
  LpProblem WithCost(VectorXd cost) const;

 private:
  LpProblem(VectorXd cost, std::shared_ptr<const SparseMatrix> matrix,
            VectorXd rhs);
  void Validate() const;

  VectorXd cost_;
  std::shared_ptr<const SparseMatrix> matrix_;
  VectorXd rhs_;
};

// Row-oriented helper for assembling sparse LPs. Rows and columns are appended;
// Build() produces the compressed column matrix.
class LpBuilder {
 public:
  int AddVariable(double cost);
  int AddRow(double rhs);
  void Set(int row, int col, double value);
  // Adds a slack column with the given sign (+1 for <=, -1 for >=) to `row`.
  int AddSlack(int row, double sign);

  void SetRhs(int row, double rhs) { rhs_[row] = rhs; }
  void AddToRhs(int row, double delta) { rhs_[row] += delta; }
  int variable_count() const { return static_cast<int>(cost_.size()); }
  int row_count() const { return static_cast<int>(rhs_.size()); }

  LpProblem Build() const;
  SparseMatrix BuildMatrix() const;
  VectorXd Cost() const;
  VectorXd Rhs() const;

 private:
  std::vector<double> cost_;
  std::vector<double> rhs_;
  std::vector<Eigen::Triplet<double>> entries_;
};

}  // namespace carbomarket::lp
