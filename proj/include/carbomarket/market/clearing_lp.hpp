#pragma once

#include <vector>

#include <Eigen/Dense>

#include "carbomarket/lp/lp_problem.hpp"
#include "carbomarket/network/network_case.hpp"

namespace carbomarket {

struct AgentBid {
  PiecewiseLinearCurve cost;  // $/h vs MW
  double p_min = 0.0;
  double p_max = 0.0;
};

// One period's bids. Agents are ordered generators first, then storages,
// matching the order in NetworkCase.
struct BidSet {
  std::vector<AgentBid> generators;
  std::vector<AgentBid> storages;
  Eigen::VectorXd demand;  // MW per bus

  int agent_count() const {
    return static_cast<int>(generators.size() + storages.size());
  }
  const AgentBid& agent(int a) const {
    const int ng = static_cast<int>(generators.size());
    return a < ng ? generators[a] : storages[a - ng];
  }
};

// The epigraph LP in standard form. Every structural variable is shifted to be
// nonnegative: p' = p - p_min, f' = f - min f, sigma' = sigma - min sigma.
// The right-hand side is affine in demand: rhs = G * demand + H.
struct ClearingLp {
  lp::LpProblem problem;
  Eigen::MatrixXd g;  // rows x buses
  Eigen::VectorXd h;

  std::vector<int> agent_bus;
  std::vector<int> p_var;
  std::vector<double> p_offset;
  std::vector<int> f_var;
  std::vector<double> f_offset;
  std::vector<int> sigma_var;  // -1 for agents without emissions
  std::vector<double> sigma_offset;
  int balance_row = 0;
  std::vector<int> upper_row;  // -1 for unlimited branches
  std::vector<int> lower_row;

  double Dispatch(const Eigen::VectorXd& x, int agent) const {
    return x[p_var[agent]] + p_offset[agent];
  }
};

struct ClearingLpOptions {
  double epsilon = 1e-4;       // $/kgCO2
  Eigen::VectorXd loss;        // per bus L_i; empty means case values
};

// Throws Error(kData, "E_DIMENSION") when bids do not match the case.
ClearingLp AssembleClearingLp(const NetworkCase& c, const BidSet& bids,
                              const ClearingLpOptions& options);

// Per-bus loss coefficients used when no direction iteration is requested.
Eigen::VectorXd StaticLoss(const NetworkCase& c);

}  // namespace carbomarket
