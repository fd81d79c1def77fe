#include "carbomarket/allocation/aumann_shapley.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "carbomarket/common/error.hpp"
#include "carbomarket/common/units.hpp"

namespace carbomarket {

std::uint64_t BasisId(std::span<const int> basis) {
  std::uint64_t h = 1469598103934665603ULL;
  for (int j : basis) {
    h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(j));
    h *= 1099511628211ULL;
  }
  return h;
}

StartPoint FeasibleStart(const CompactAllocationForm& form,
                         const lp::SimplexOptions& simplex) {
  const auto& a = form.lp.problem.constraint_matrix();
  const int m = form.lp.problem.constraint_count();
  const int n = form.lp.problem.variable_count();
  const Eigen::VectorXd dir = form.Direction();

  // min zeta  s.t.  A x - zeta G D~* = H,  zeta + s = 1
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(a.nonZeros() + m + 2);
  for (int j = 0; j < n; ++j) {
    for (lp::SparseMatrix::InnerIterator it(a, j); it; ++it) {
      trip.emplace_back(it.row(), j, it.value());
    }
  }
  for (int r = 0; r < m; ++r) {
    if (dir[r] != 0.0) trip.emplace_back(r, n, -dir[r]);
  }
  trip.emplace_back(m, n, 1.0);
  trip.emplace_back(m, n + 1, 1.0);
  lp::SparseMatrix big(m + 1, n + 2);
  big.setFromTriplets(trip.begin(), trip.end());
  Eigen::VectorXd cost = Eigen::VectorXd::Zero(n + 2);
  cost[n] = 1.0;
  Eigen::VectorXd rhs(m + 1);
  rhs.head(m) = form.lp.h;
  rhs[m] = 1.0;
  const lp::LpSolution sol = lp::Solve(lp::LpProblem(cost, big, rhs), simplex);
  if (!sol.optimal()) {
    ThrowInfeasible("E_START_INFEASIBLE",
                    "no point on the segment to the cleared demand is feasible");
  }

  StartPoint st;
  st.zeta = std::clamp(sol.primal[n], 0.0, 1.0);
  st.used = st.zeta > 1e-12;
  if (!st.used) st.zeta = 0.0;
  st.demand = st.zeta * form.demand_star;
  st.storage = st.zeta * form.storage_power;
  // E is defined by the cost-optimal dispatch at the start, not by whichever
  // feasible point the zeta program returned.
  const lp::LpSolution at_start =
      lp::Solve(form.lp.problem.WithRhs(form.RhsAt(st.zeta)), simplex);
  if (!at_start.optimal()) {
    ThrowNumeric("E_START_INFEASIBLE", "start point lost feasibility on re-solve");
  }
  st.emission = form.Emission(at_start.primal);
  const double denom = st.demand.sum() - st.storage.sum();
  st.load_share = Eigen::VectorXd::Zero(st.demand.size());
  st.storage_share = Eigen::VectorXd::Zero(st.storage.size());
  if (st.used && std::abs(denom) > 0.0) {
    st.load_share = st.demand * (st.emission / denom);
    st.storage_share = -st.storage * (st.emission / denom);
  }
  return st;
}

AllocationResult AumannShapleyPrices(const CompactAllocationForm& form,
                                     const SweepOptions& options,
                                     const StartPoint* start) {
  if (!(options.delta > 0.0)) {
    throw Error(ErrorKind::kUsage, "E_DELTA", "sweep step must be positive");
  }
  const lp::LpProblem& base = form.lp.problem;
  const auto& a = base.constraint_matrix();
  const Eigen::VectorXd dir = form.Direction();
  const Eigen::VectorXd& h = form.lp.h;
  const int nb = static_cast<int>(form.net_demand_star.size());
  const bool from_start = start != nullptr && start->used;

  AllocationResult res;
  if (from_start) res.start = *start;
  double y_prev = from_start ? start->zeta : 0.0;

  lp::LpSolution first = lp::Solve(base.WithRhs(form.RhsAt(y_prev)), options.simplex);
  ++res.lp_solves;
  if (!first.optimal()) {
    if (from_start) {
      ThrowInfeasible("E_START_INFEASIBLE", "sweep start point is infeasible");
    }
    ThrowInfeasible("E_ORIGIN_INFEASIBLE",
                    "fixed-storage problem is infeasible at zero demand; use a "
                    "feasible start");
  }
  res.emission_start = form.Emission(first.primal);
  std::vector<int> warm = first.basis;

  Eigen::VectorXd integral = Eigen::VectorXd::Zero(nb);
  double e_end = res.emission_start;
  int zero_run = 0;
  while (y_prev < 1.0) {
    double probe = std::min(y_prev + options.delta, 1.0);
    int halvings = 0;
    lp::LpSolution sol;
    lp::Interval iv;
    std::unique_ptr<lp::BasisFactorization> factor;
    while (true) {
      sol = warm.empty() ? lp::Solve(base.WithRhs(form.RhsAt(probe)), options.simplex)
                         : lp::SolveWithBasis(base.WithRhs(form.RhsAt(probe)), warm,
                                              options.simplex);
      ++res.lp_solves;
      if (!sol.optimal()) {
        ThrowInfeasible("E_SWEEP_INFEASIBLE",
                        "fixed-storage problem infeasible at y=" + std::to_string(probe));
      }
      factor = std::make_unique<lp::BasisFactorization>(a, sol.basis);
      bool valid = true;
      try {
        iv = lp::FeasibilityInterval(*factor, dir, h);
        valid = iv.Contains(probe, 1e-9);
      } catch (const Error& e) {
        if (e.code() != "E_EMPTY_INTERVAL") throw;
        valid = false;
      }
      if (!valid) {
        // Numerically inconsistent basis: move on and re-solve from scratch.
        ++res.zero_length_restarts;
        if (++zero_run > options.max_zero_length) {
          ThrowNumeric("E_NON_PROGRESS",
                       "no valid critical interval after " +
                           std::to_string(options.max_zero_length) +
                           " restarts near y=" + std::to_string(y_prev));
        }
        probe = std::min(probe + options.delta, 1.0);
        warm.clear();
        continue;
      }
      zero_run = 0;
      // The tolerant interval decides validity; endpoints come from the exact
      // ratios so breakpoints do not overshoot by tol / slope.
      try {
        const lp::Interval exact = lp::FeasibilityInterval(*factor, dir, h, 0.0);
        if (exact.hi > y_prev) iv = exact;
      } catch (const Error& e) {
        if (e.code() != "E_EMPTY_INTERVAL") throw;
      }
      // The probe's region starts after y_prev: some region in between was
      // skipped, so probe closer to y_prev.
      if (iv.lo > y_prev + 1e-12 && halvings < options.max_refinements) {
        probe = y_prev + 0.5 * (probe - y_prev);
        ++halvings;
        ++res.refinements;
        warm = sol.basis;
        continue;
      }
      break;
    }
    // An exact endpoint a few ulps short of 1 would leave an empty last step.
    const double y_next = 1.0 - iv.hi <= 1e-12 ? 1.0 : iv.hi;
    if (iv.lo > y_prev + 1e-12 || !(y_next > y_prev)) {
      ThrowNumeric("E_NON_PROGRESS",
                   "critical interval does not advance past y=" + std::to_string(y_prev));
    }
    const Eigen::VectorXd grad = PartialDerivative(form, *factor, sol.basis);
    integral += (y_next - y_prev) * grad;
    res.breakpoints.push_back({y_prev, y_next, BasisId(sol.basis), grad});
    ++res.iterations;
    if (y_next >= 1.0) {
      const Eigen::VectorXd xb = factor->Solve(form.RhsAt(1.0));
      e_end = form.k_constant;
      for (std::size_t r = 0; r < sol.basis.size(); ++r) {
        if (sol.basis[r] < base.variable_count()) e_end += form.k[sol.basis[r]] * xb[r];
      }
    }
    warm = sol.basis;
    y_prev = y_next;
  }

  res.emission_total = e_end;
  double start_price = 0.0;  // $ per MW, spread uniformly over net demand
  if (from_start) {
    const double denom = form.net_demand_star.sum();
    if (std::abs(denom) > 0.0) {
      start_price = res.emission_start / denom;
    }
  }
  const double to_kwh = 1.0 / (form.tau * kKwhPerMwh);
  res.psi = (integral.array() + start_price).matrix() * to_kwh;
  res.load_cost = (res.psi.array() * form.demand_star.array()).matrix() *
                  (form.tau * kKwhPerMwh);
  res.storage_cost = Eigen::VectorXd::Zero(form.storage_power.size());
  for (int s = 0; s < form.storage_power.size(); ++s) {
    res.storage_cost[s] =
        -res.psi[form.storage_bus[s]] * form.storage_power[s] * form.tau * kKwhPerMwh;
  }
  const double increments = integral.dot(form.net_demand_star);
  res.cost_sharing_error =
      std::abs(increments - (res.emission_total - res.emission_start)) /
      std::max(std::abs(res.emission_total), 1e-12);
  return res;
}

AllocationResult AllocateEmissions(const CompactAllocationForm& form,
                                   const SweepOptions& options) {
  const lp::LpSolution origin =
      lp::Solve(form.lp.problem.WithRhs(form.RhsAt(0.0)), options.simplex);
  if (origin.optimal()) return AumannShapleyPrices(form, options, nullptr);
  const StartPoint start = FeasibleStart(form, options.simplex);
  return AumannShapleyPrices(form, options, &start);
}

}  // namespace carbomarket
