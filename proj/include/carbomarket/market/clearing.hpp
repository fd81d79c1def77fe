#pragma once

#include <vector>

#include <Eigen/Dense>

#include "carbomarket/lp/simplex.hpp"
#include "carbomarket/market/clearing_lp.hpp"
#include "carbomarket/network/network_case.hpp"

namespace carbomarket {

struct ClearingResult {
  Eigen::VectorXd dispatch;   // MW per agent (generators, then storages)
  Eigen::VectorXd demand;     // MW per bus
  double lambda_bar = 0.0;    // $/MWh
  Eigen::VectorXd mu_minus;   // $/MWh per branch
  Eigen::VectorXd mu_plus;
  Eigen::VectorXd lmp;        // $/MWh per bus
  Eigen::VectorXd flows;      // MW per branch
  Eigen::VectorXd loss;       // L_i used for this solve
  Eigen::VectorXd emission;   // kgCO2/h per generator
  double total_cost = 0.0;    // $/h, sum of bid costs (no tie-break term)
  double fuel_cost = 0.0;     // $/h, generators' fuel curves only
  double total_emission = 0.0;  // kgCO2/h
  bool degenerate = false;    // some basic variable sits at zero
  int loss_iterations = 1;
  bool loss_converged = true;
  lp::LpSolution lp;

  int generator_count = 0;
  double storage_dispatch(int s) const { return dispatch[generator_count + s]; }
};

struct ClearingOptions {
  double epsilon = 1e-4;
  Eigen::VectorXd loss;  // per bus; empty means the case's static values
  lp::SimplexOptions simplex;
};

// lambda_i = lambda_bar (1 - L_i) + sum_l T_li (mu_minus_l - mu_plus_l)
Eigen::VectorXd ComputeLmps(double lambda_bar, const Eigen::VectorXd& mu_minus,
                            const Eigen::VectorXd& mu_plus,
                            const Eigen::VectorXd& loss,
                            const Eigen::MatrixXd& ptdf);

// Throws Error(kInfeasible, "E_MARKET_INFEASIBLE") naming the most violated
// row, or Error(kNumeric, "E_MARKET_UNBOUNDED").
ClearingResult ClearMarket(const NetworkCase& c, const BidSet& bids,
                           const ClearingOptions& options);

// Re-clears with direction-dependent loss coefficients until the assumed and
// obtained injection directions agree (or max_iters is reached).
ClearingResult ClearWithLossIteration(const NetworkCase& c, const BidSet& bids,
                                      const ClearingOptions& options,
                                      int max_iters = 10);

struct Curtailment {
  double fraction = 0.0;
  bool zero_available = false;
};

// available/dispatched: per period, per renewable plant (MW).
Curtailment RenewableCurtailment(const std::vector<Eigen::VectorXd>& available,
                                 const std::vector<Eigen::VectorXd>& dispatched);

// Total branch congestion rent F (mu+ + mu-) in $/h.
double CongestionRent(const NetworkCase& c, const ClearingResult& r);

}  // namespace carbomarket
