#pragma once

#include <vector>

#include <Eigen/Dense>

#include "carbomarket/market/clearing.hpp"
#include "carbomarket/network/network_case.hpp"

namespace carbomarket {

struct FlowEdge {
  int from = 0;
  int to = 0;
  double p = 0.0;  // MW, > 0
};

// Lossless directed flow picture of one period.
struct FlowGraph {
  int bus_count = 0;
  std::vector<FlowEdge> edges;
  Eigen::VectorXd generation;  // MW per bus
  Eigen::VectorXd emission;    // r^G, kgCO2/h per bus
  Eigen::VectorXd demand;      // MW per bus

  // Largest |inflow + generation - outflow - demand| over buses, MW.
  double ConservationError() const;
};

struct CefResult {
  Eigen::VectorXd rho;            // kgCO2/kWh flowing out of each bus
  Eigen::VectorXd load_emission;  // r^D, kgCO2/h per bus
  std::vector<int> idle_buses;    // zero throughput, rho set to 0
};

// Throws Error(kData, "E_CONSERVATION") if the graph does not balance within
// 1e-6 MW and Error(kNumeric, "E_CEF_SINGULAR") if the intensity system cannot
// be solved.
CefResult CefSolve(const FlowGraph& graph);

// Builds the graph from a cleared period. Discharging storages inject at their
// stored intensity, charging storages are demand. Any loss mismatch is folded
// into bus demands in proportion to their size, so the graph conserves power.
FlowGraph FlowGraphFromClearing(const NetworkCase& c, const ClearingResult& r,
                                const Eigen::VectorXd& storage_intensity);

// psi_i = kappa rho_i / 2, $/kWh
Eigen::VectorXd CefEmissionPrices(const Eigen::VectorXd& rho, double kappa);

struct CefStorageState {
  double stored_energy = 0.0;     // MWh
  double stored_intensity = 0.0;  // kgCO2/kWh
};

struct CefStorageStep {
  CefStorageState state;
  double attributed = 0.0;  // kgCO2 charged to the unit (negative on discharge)
};

// power > 0 discharges, < 0 charges (MW at the grid side). Charging adds
// inflow_intensity * grid energy of CO2 and eta_c * grid energy of storage;
// discharging removes grid energy / eta_d and is credited at the stored
// intensity. Throws Error(kData, "E_CEF_EMPTY") when discharging more than is
// stored.
CefStorageStep CefStorageUpdate(const CefStorageState& state, double power,
                                double inflow_intensity, double tau,
                                double eta_c = 1.0, double eta_d = 1.0);

}  // namespace carbomarket
