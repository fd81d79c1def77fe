#include "carbomarket/lp/lp_problem.hpp"

#include <cmath>
#include <string>

#include "carbomarket/common/error.hpp"

namespace carbomarket::lp {

LpProblem::LpProblem(VectorXd cost, SparseMatrix constraint_matrix,
                     VectorXd rhs)
    : LpProblem(std::move(cost),
                std::make_shared<const SparseMatrix>(
                    std::move(constraint_matrix)),
                std::move(rhs)) {}

LpProblem::LpProblem(VectorXd cost, std::shared_ptr<const SparseMatrix> matrix,
                     VectorXd rhs)
    : cost_(std::move(cost)), matrix_(std::move(matrix)), rhs_(std::move(rhs)) {
  Validate();
}

void LpProblem::Validate() const {
  if (matrix_->rows() != rhs_.size() || matrix_->cols() != cost_.size()) {
    ThrowData("E_LP_DIMENSION",
              "constraint matrix is " + std::to_string(matrix_->rows()) + "x" +
                  std::to_string(matrix_->cols()) + " but rhs has " +
                  std::to_string(rhs_.size()) + " rows and cost has " +
                  std::to_string(cost_.size()) + " entries");
  }
  if (!rhs_.allFinite() || !cost_.allFinite()) {
    ThrowData("E_LP_NONFINITE", "LP cost or rhs contains non-finite values");
  }
}

LpProblem LpProblem::WithRhs(VectorXd rhs) const {
  return LpProblem(cost_, matrix_, std::move(rhs));
}

LpProblem LpProblem::WithCost(VectorXd cost) const {
  return LpProblem(std::move(cost), matrix_, rhs_);
}

int LpBuilder::AddVariable(double cost) {
  cost_.push_back(cost);
  return static_cast<int>(cost_.size()) - 1;
}

int LpBuilder::AddRow(double rhs) {
  rhs_.push_back(rhs);
  return static_cast<int>(rhs_.size()) - 1;
}

void LpBuilder::Set(int row, int col, double value) {
  if (value != 0.0) entries_.emplace_back(row, col, value);
}

int LpBuilder::AddSlack(int row, double sign) {
  const int col = AddVariable(0.0);
  Set(row, col, sign);
  return col;
}

SparseMatrix LpBuilder::BuildMatrix() const {
  SparseMatrix m(row_count(), variable_count());
  // Duplicate (row, col) entries are summed.
  m.setFromTriplets(entries_.begin(), entries_.end());
  m.makeCompressed();
  return m;
}

VectorXd LpBuilder::Cost() const {
  return Eigen::Map<const VectorXd>(cost_.data(),
                                    static_cast<Eigen::Index>(cost_.size()));
}

VectorXd LpBuilder::Rhs() const {
  return Eigen::Map<const VectorXd>(rhs_.data(),
                                    static_cast<Eigen::Index>(rhs_.size()));
}

LpProblem LpBuilder::Build() const {
  return LpProblem(Cost(), BuildMatrix(), Rhs());
}

}  // namespace carbomarket::lp
