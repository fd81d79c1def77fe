#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "carbomarket/lp/simplex.hpp"
#include "carbomarket/market/clearing.hpp"
#include "carbomarket/market/clearing_lp.hpp"
#include "carbomarket/network/network_case.hpp"

namespace carbomarket {

// The clearing LP with storage outputs frozen into the net demand
// D~ = D - P_s and the half emission cost E = K'x + k_constant ($ per period).
struct CompactAllocationForm {
  ClearingLp lp;
  Eigen::VectorXd k;
  double k_constant = 0.0;
  Eigen::VectorXd net_demand_star;  // D~*, MW per bus
  Eigen::VectorXd demand_star;      // D*, MW per bus
  Eigen::VectorXd storage_power;    // P_s*, MW per storage
  std::vector<int> storage_bus;
  double tau = 1.0;
  double kappa = 0.0;

  // rhs at y * D~*
  Eigen::VectorXd RhsAt(double y) const;
  Eigen::VectorXd RhsFor(const Eigen::VectorXd& net_demand) const;
  Eigen::VectorXd Direction() const { return lp.g * net_demand_star; }
  double Emission(const Eigen::VectorXd& x) const { return k.dot(x) + k_constant; }
};

struct CompactFormOptions {
  double epsilon = 1e-4;
  double kappa = 0.05;
  double tau = 1.0;
};

// Throws Error(kData, "E_STORAGE_BUS") for storages on unknown buses.
CompactAllocationForm BuildCompactForm(const NetworkCase& c, const BidSet& bids,
                                       const ClearingResult& clearing,
                                       const CompactFormOptions& options);

// dE/dD~_i for every bus ($ per MW of net demand) under the given basis:
// G' A_B^{-T} K_B.
Eigen::VectorXd PartialDerivative(const CompactAllocationForm& form,
                                  std::span<const int> basis);
Eigen::VectorXd PartialDerivative(const CompactAllocationForm& form,
                                  const lp::BasisFactorization& factor,
                                  std::span<const int> basis);

// E at an arbitrary net demand; throws Error(kInfeasible) if the fixed-storage
// problem has no solution there.
double EmissionAt(const CompactAllocationForm& form,
                  const Eigen::VectorXd& net_demand);

}  // namespace carbomarket
