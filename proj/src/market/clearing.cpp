#include "carbomarket/market/clearing.hpp"

#include <cmath>
#include <sstream>

#include "carbomarket/common/error.hpp"

namespace carbomarket {

Eigen::VectorXd ComputeLmps(double lambda_bar, const Eigen::VectorXd& mu_minus,
                            const Eigen::VectorXd& mu_plus,
                            const Eigen::VectorXd& loss,
                            const Eigen::MatrixXd& ptdf) {
  Eigen::VectorXd lmp =
      lambda_bar * (Eigen::VectorXd::Ones(loss.size()) - loss);
  if (ptdf.rows() > 0) lmp += ptdf.transpose() * (mu_minus - mu_plus);
  return lmp;
}

namespace {

// Elastic re-solve to locate the constraint that cannot be met.
std::string DescribeInfeasibility(const NetworkCase& c, const ClearingLp& clp) {
  const auto& a = clp.problem.constraint_matrix();
  const int m = clp.problem.constraint_count();
  const int n = clp.problem.variable_count();
  std::vector<int> rows{clp.balance_row};
  for (int l = 0; l < c.branch_count(); ++l) {
    if (clp.upper_row[l] >= 0) {
      rows.push_back(clp.upper_row[l]);
      rows.push_back(clp.lower_row[l]);
    }
  }
  std::vector<Eigen::Triplet<double>> trip;
  for (int j = 0; j < n; ++j) {
    for (lp::SparseMatrix::InnerIterator it(a, j); it; ++it) {
      trip.emplace_back(it.row(), j, it.value());
    }
  }
  int col = n;
  for (int r : rows) {
    trip.emplace_back(r, col++, 1.0);
    trip.emplace_back(r, col++, -1.0);
  }
  lp::SparseMatrix elastic(m, col);
  elastic.setFromTriplets(trip.begin(), trip.end());
  Eigen::VectorXd cost = Eigen::VectorXd::Zero(col);
  cost.tail(col - n).setOnes();
  const lp::LpSolution sol =
      lp::Solve(lp::LpProblem(cost, elastic, clp.problem.rhs()));
  if (!sol.optimal()) return "bid bounds are inconsistent";
  int worst = -1;
  double amount = 0.0;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const double v = sol.primal[n + 2 * k] + sol.primal[n + 2 * k + 1];
    if (v > amount) {
      amount = v;
      worst = static_cast<int>(k);
    }
  }
  std::ostringstream msg;
  if (worst < 0) {
    msg << "no single row violated";
  } else if (worst == 0) {
    msg << "power balance short by " << amount << " MW";
  } else {
    int l = 0;
    for (; l < c.branch_count(); ++l) {
      if (clp.upper_row[l] == rows[worst] || clp.lower_row[l] == rows[worst]) break;
    }
    msg << "branch " << l << " limit exceeded by " << amount << " MW";
  }
  return msg.str();
}

}  // namespace

ClearingResult ClearMarket(const NetworkCase& c, const BidSet& bids,
                           const ClearingOptions& options) {
  ClearingLpOptions lp_options;
  lp_options.epsilon = options.epsilon;
  lp_options.loss = options.loss;
  const ClearingLp clp = AssembleClearingLp(c, bids, lp_options);
  lp::LpSolution sol = lp::Solve(clp.problem, options.simplex);
  if (sol.status == lp::LpStatus::kInfeasible) {
    ThrowInfeasible("E_MARKET_INFEASIBLE",
                    "market clearing is infeasible: " + DescribeInfeasibility(c, clp));
  }
  if (sol.status == lp::LpStatus::kUnbounded) {
    ThrowNumeric("E_MARKET_UNBOUNDED", "market clearing LP is unbounded");
  }

  const int ng = static_cast<int>(c.generators.size());
  const int na = bids.agent_count();
  ClearingResult r;
  r.generator_count = ng;
  r.demand = bids.demand;
  r.loss = options.loss.size() == c.bus_count() ? options.loss : StaticLoss(c);
  r.dispatch.resize(na);
  for (int a = 0; a < na; ++a) r.dispatch[a] = clp.Dispatch(sol.primal, a);

  r.lambda_bar = sol.duals[clp.balance_row];
  r.mu_minus = Eigen::VectorXd::Zero(c.branch_count());
  r.mu_plus = Eigen::VectorXd::Zero(c.branch_count());
  for (int l = 0; l < c.branch_count(); ++l) {
    if (clp.upper_row[l] < 0) continue;
    r.mu_plus[l] = std::max(0.0, -sol.duals[clp.upper_row[l]]);
    r.mu_minus[l] = std::max(0.0, sol.duals[clp.lower_row[l]]);
  }
  r.lmp = ComputeLmps(r.lambda_bar, r.mu_minus, r.mu_plus, r.loss, c.ptdf());

  Eigen::VectorXd injection = -bids.demand;
  for (int a = 0; a < na; ++a) injection[clp.agent_bus[a]] += r.dispatch[a];
  r.flows = c.ptdf() * injection;

  r.emission = Eigen::VectorXd::Zero(ng);
  for (int a = 0; a < na; ++a) {
    r.total_cost += bids.agent(a).cost.Value(r.dispatch[a]);
    if (a < ng) {
      r.fuel_cost += c.generators[a].fuel_curve.Value(r.dispatch[a]);
      if (clp.sigma_var[a] >= 0) {
        r.emission[a] = sol.primal[clp.sigma_var[a]] + clp.sigma_offset[a];
      }
    }
  }
  r.total_emission = r.emission.sum();

  for (int row = 0; row < clp.problem.constraint_count(); ++row) {
    const int j = sol.basis[row];
    if (j < clp.problem.variable_count() && std::abs(sol.primal[j]) <= 1e-9) {
      r.degenerate = true;
      break;
    }
  }
  r.lp = std::move(sol);
  return r;
}

ClearingResult ClearWithLossIteration(const NetworkCase& c, const BidSet& bids,
                                      const ClearingOptions& options,
                                      int max_iters) {
  bool directional = false;
  for (const Bus& b : c.buses) directional = directional || b.has_directional_loss();
  if (!directional) return ClearMarket(c, bids, options);

  const int nb = c.bus_count();
  const int ng = static_cast<int>(c.generators.size());
  // true = injecting
  std::vector<bool> assumed(nb);
  for (int i = 0; i < nb; ++i) assumed[i] = !(bids.demand[i] > 0.0);

  ClearingResult r;
  for (int iter = 1; iter <= max_iters; ++iter) {
    ClearingOptions opt = options;
    opt.loss = StaticLoss(c);
    for (int i = 0; i < nb; ++i) {
      const Bus& b = c.buses[i];
      if (b.has_directional_loss()) {
        opt.loss[i] = assumed[i] ? *b.loss_injecting : *b.loss_consuming;
      }
    }
    r = ClearMarket(c, bids, opt);
    r.loss_iterations = iter;
    Eigen::VectorXd net = -bids.demand;
    for (int a = 0; a < bids.agent_count(); ++a) {
      const int bus = a < ng ? c.generators[a].bus : c.storages[a - ng].bus;
      net[bus] += r.dispatch[a];
    }
    bool same = true;
    for (int i = 0; i < nb; ++i) {
      const bool obtained = net[i] > 1e-9;
      if (c.buses[i].has_directional_loss() && obtained != assumed[i]) {
        same = false;
        assumed[i] = obtained;
      }
    }
    if (same) {
      r.loss_converged = true;
      return r;
    }
  }
  r.loss_converged = false;
  return r;
}

Curtailment RenewableCurtailment(const std::vector<Eigen::VectorXd>& available,
                                 const std::vector<Eigen::VectorXd>& dispatched) {
  double avail = 0.0;
  double lost = 0.0;
  for (std::size_t t = 0; t < available.size(); ++t) {
    avail += available[t].sum();
    lost += (available[t] - dispatched[t]).sum();
  }
  Curtailment out;
  if (avail <= 0.0) {
    out.zero_available = true;
    return out;
  }
  out.fraction = std::clamp(lost / avail, 0.0, 1.0);
  return out;
}

double CongestionRent(const NetworkCase& c, const ClearingResult& r) {
  double rent = 0.0;
  for (int l = 0; l < c.branch_count(); ++l) {
    if (c.branches[l].limited()) {
      rent += c.branches[l].capacity * (r.mu_plus[l] + r.mu_minus[l]);
    }
  }
  return rent;
}

}  // namespace carbomarket
