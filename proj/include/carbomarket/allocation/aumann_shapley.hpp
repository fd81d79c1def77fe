#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "carbomarket/allocation/compact_form.hpp"

namespace carbomarket {

struct Breakpoint {
  double y_start = 0.0;
  double y_end = 0.0;
  std::uint64_t basis_id = 0;
  Eigen::VectorXd gradient;  // $ per MW of net demand, constant on the piece
};

struct StartPoint {
  bool used = false;        // true when the sweep starts away from the origin
  double zeta = 0.0;
  Eigen::VectorXd demand;   // D0 = zeta D*
  Eigen::VectorXd storage;  // P0 = zeta P*
  double emission = 0.0;    // E(P0, D0), $
  Eigen::VectorXd load_share;     // proportional allocation at the start, $
  Eigen::VectorXd storage_share;
};

struct AllocationResult {
  Eigen::VectorXd psi;           // $/kWh per bus
  Eigen::VectorXd load_cost;     // E_i, $ per bus
  Eigen::VectorXd storage_cost;  // E_s, $ per storage
  std::vector<Breakpoint> breakpoints;
  StartPoint start;
  double emission_total = 0.0;  // E(P*, D*), $
  double emission_start = 0.0;  // E at the sweep's first point, $
  double cost_sharing_error = 0.0;
  int iterations = 0;  // M
  int lp_solves = 0;
  int refinements = 0;
  int zero_length_restarts = 0;
};

struct SweepOptions {
  double delta = 0.002;
  int max_zero_length = 3;
  int max_refinements = 200;
  lp::SimplexOptions simplex;
};

// Stable 64-bit identifier of a basis (for traces).
std::uint64_t BasisId(std::span<const int> basis);

// Minimal zeta in [0, 1] such that the fixed-storage problem is feasible at
// zeta * D~*, with the proportional allocation of E there.
StartPoint FeasibleStart(const CompactAllocationForm& form,
                         const lp::SimplexOptions& simplex = {});

// Aumann-Shapley prices by the parametric basis sweep from y = 0 (or from
// `start` when given) to y = 1. Throws Error(kInfeasible,
// "E_ORIGIN_INFEASIBLE") when y = 0 is infeasible and no start is given, and
// Error(kNumeric, "E_NON_PROGRESS") when the sweep stalls.
AllocationResult AumannShapleyPrices(const CompactAllocationForm& form,
                                     const SweepOptions& options,
                                     const StartPoint* start = nullptr);

// Runs the sweep from the origin when feasible there, otherwise from
// FeasibleStart.
AllocationResult AllocateEmissions(const CompactAllocationForm& form,
                                   const SweepOptions& options);

}  // namespace carbomarket
