#include "carbomarket/allocation/compact_form.hpp"

#include <string>

#include "carbomarket/common/error.hpp"

namespace carbomarket {

Eigen::VectorXd CompactAllocationForm::RhsAt(double y) const {
  return lp.g * (y * net_demand_star) + lp.h;
}

Eigen::VectorXd CompactAllocationForm::RhsFor(const Eigen::VectorXd& net_demand) const {
  return lp.g * net_demand + lp.h;
}

CompactAllocationForm BuildCompactForm(const NetworkCase& c, const BidSet& bids,
                                       const ClearingResult& clearing,
                                       const CompactFormOptions& options) {
  CompactAllocationForm form;
  form.demand_star = clearing.demand;
  form.net_demand_star = clearing.demand;
  const int ng = static_cast<int>(c.generators.size());
  form.storage_power = Eigen::VectorXd::Zero(c.storages.size());
  for (std::size_t s = 0; s < c.storages.size(); ++s) {
    const int bus = c.storages[s].bus;
    if (bus < 0 || bus >= c.bus_count()) {
      ThrowData("E_STORAGE_BUS", "storage " + std::to_string(s) +
                                     " references missing bus index " +
                                     std::to_string(bus));
    }
    form.storage_bus.push_back(bus);
    form.storage_power[s] = clearing.dispatch[ng + static_cast<int>(s)];
    form.net_demand_star[bus] -= form.storage_power[s];
  }

  BidSet fixed;
  fixed.generators = bids.generators;
  fixed.demand = form.net_demand_star;
  // Storages are parameters here, so the LP sees a storage-free case.
  NetworkCase no_storage = c;
  no_storage.storages.clear();
  ClearingLpOptions lo;
  lo.epsilon = options.epsilon;
  lo.loss = clearing.loss;
  form.lp = AssembleClearingLp(no_storage, fixed, lo);

  form.tau = options.tau;
  form.kappa = options.kappa;
  const double w = options.kappa * options.tau / 2.0;
  form.k = Eigen::VectorXd::Zero(form.lp.problem.variable_count());
  for (int g = 0; g < ng; ++g) {
    if (form.lp.sigma_var[g] < 0) continue;
    form.k[form.lp.sigma_var[g]] = w;
    form.k_constant += w * form.lp.sigma_offset[g];
  }
  return form;
}

Eigen::VectorXd PartialDerivative(const CompactAllocationForm& form,
                                  const lp::BasisFactorization& factor,
                                  std::span<const int> basis) {
  const int n = form.lp.problem.variable_count();
  Eigen::VectorXd kb(basis.size());
  for (std::size_t r = 0; r < basis.size(); ++r) {
    kb[r] = basis[r] < n ? form.k[basis[r]] : 0.0;
  }
  const Eigen::VectorXd w = factor.SolveTranspose(kb);
  return form.lp.g.transpose() * w;
}

Eigen::VectorXd PartialDerivative(const CompactAllocationForm& form,
                                  std::span<const int> basis) {
  const lp::BasisFactorization factor(form.lp.problem.constraint_matrix(), basis);
  return PartialDerivative(form, factor, basis);
}

double EmissionAt(const CompactAllocationForm& form,
                  const Eigen::VectorXd& net_demand) {
  const lp::LpSolution sol =
      lp::Solve(form.lp.problem.WithRhs(form.RhsFor(net_demand)));
  if (!sol.optimal()) {
    ThrowInfeasible("E_ALLOCATION_INFEASIBLE",
                    "fixed-storage problem is infeasible at the requested demand");
  }
  return form.Emission(sol.primal);
}

}  // namespace carbomarket
