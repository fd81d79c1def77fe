#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "carbomarket/allocation/aumann_shapley.hpp"
#include "carbomarket/common/error.hpp"
#include "carbomarket/market/clearing.hpp"
#include "carbomarket/network/network_case.hpp"
#include "carbomarket/storage/policy.hpp"

namespace carbomarket {

enum class StorageStrategy { kProposed, kB1, kB2, kB3Replay };

std::string_view StrategyName(StorageStrategy s);
// Throws Error(kUsage, "E_STRATEGY") for unknown names.
StorageStrategy ParseStrategy(std::string_view name);

struct ScenarioConfig {
  std::string name = "Proposed";
  bool enable_storage = true;
  bool enable_allocation = true;
  std::optional<double> kappa_override;
  std::optional<double> epsilon;
  std::optional<double> delta;
  int horizon = -1;  // -1: the whole series
  std::uint64_t seed = 0;
  // Per storage; empty means every unit runs the proposed policy.
  std::vector<StorageStrategy> strategy;
  // Per storage multiple of the chosen V_s (proposed policy only).
  std::vector<double> v_multiplier;
  // B3-replay: recorded combined prices ($/kWh) per storage, one per period.
  std::vector<std::vector<double>> replay_prices;
  // Also compute CEF prices and the container-model storage emission.
  bool compute_cef = false;
};

ScenarioConfig ProposedScenario();
ScenarioConfig A1Scenario();  // storages, no allocation
ScenarioConfig A2Scenario();  // allocation, no storages
ScenarioConfig A3Scenario();  // neither
std::vector<ScenarioConfig> ScenarioMatrix();
// "Proposed", "A1", "A2", "A3"; throws Error(kUsage, "E_SCENARIO").
ScenarioConfig ScenarioByName(std::string_view name);

// All money in $ for the period (rates times tau).
struct Settlement {
  double load_energy = 0.0;       // sum lambda_i D_i tau
  double load_emission = 0.0;     // sum psi_i D_i tau, psi per MWh
  double storage_energy = 0.0;    // sum lambda_s p_s tau, received
  double storage_emission = 0.0;  // sum psi_s p_s tau, received, psi per MWh
  double generator = 0.0;         // sum lambda_i p_i tau, received
  double congestion_rent = 0.0;   // sum F (mu+ + mu-) tau
  double loss_surplus = 0.0;      // -lambda_bar L_0 tau
  double emission_charges = 0.0;  // load_emission - storage_emission
  double payments() const { return load_energy + load_emission; }
  double revenues() const { return storage_energy + storage_emission + generator; }
  // payments - revenues - rent - loss surplus - emission charges
  double imbalance() const;
  double relative_imbalance() const;
};

// Throws Error(kNumeric, "E_SETTLEMENT") when the relative imbalance exceeds
// 1e-6. psi may be empty (no allocation).
Settlement Settle(const NetworkCase& c, const ClearingResult& r,
                  const Eigen::VectorXd& psi, double tau);

// Generator bids for one period: fuel plus kappa/2 times emission when
// allocation is on, bounds from the series.
std::vector<AgentBid> PlantBids(const NetworkCase& c, int period, double kappa,
                                bool enable_allocation);

// OLS slope of cumulative[k] against hours (k + 1) * tau.
double FitRevenueRate(std::span<const double> cumulative, double tau);

struct StorageRecord {
  double power = 0.0;       // MW, > 0 discharges
  double energy = 0.0;      // MWh after the period
  double gamma = 0.0;       // $/kWh, lambda / 1000 + psi at the bus
  double revenue = 0.0;     // $
  double allocated = 0.0;   // E_s, $
  double emission = 0.0;    // E_s / kappa, kgCO2
  double bid_lo = 0.0;
  double bid_hi = 0.0;
  double cef_emission = 0.0;  // kgCO2, container model
};

struct PeriodRecord {
  int period = 0;
  double fuel_cost = 0.0;      // $/h
  double bid_cost = 0.0;       // $/h
  double emission = 0.0;       // kgCO2/h
  double lambda_bar = 0.0;     // $/MWh
  Eigen::VectorXd lmp;         // $/MWh per bus
  Eigen::VectorXd psi;         // $/kWh per bus
  Eigen::VectorXd cef_psi;     // $/kWh per bus, when computed
  Eigen::VectorXd demand;      // MW per bus
  Eigen::VectorXd dispatch;    // MW per generator
  double renewable_available = 0.0;  // MW
  double renewable_dispatched = 0.0;
  std::vector<StorageRecord> storages;
  Settlement settlement;
  double cost_sharing_error = 0.0;
  int sweep_iterations = 0;
  bool feasible_start = false;
  std::vector<Breakpoint> breakpoints;
};

struct StorageSummary {
  std::string name;
  double revenue_rate = 0.0;   // $/h
  double emission_rate = 0.0;  // kgCO2/h
  double total_revenue = 0.0;  // $
  double cef_emission_rate = 0.0;
};

struct SimulationReport {
  ScenarioConfig config;
  std::vector<PeriodRecord> periods;
  bool completed = false;
  std::string error_code;  // set when a period failed
  ErrorKind error_kind = ErrorKind::kNumeric;
  std::string error_message;
  int failed_period = -1;

  double avg_fuel_cost = 0.0;  // $/h
  double avg_emission = 0.0;   // kgCO2/h
  double curtailment = 0.0;    // fraction of available renewable energy
  std::vector<StorageSummary> storages;
  double max_cost_sharing_error = 0.0;
  double mean_cost_sharing_error = 0.0;
  double max_settlement_imbalance = 0.0;  // relative
  int feasible_start_periods = 0;
};

// Recomputes every aggregate from the period rows.
void Summarize(const NetworkCase& c, SimulationReport& report);

class Simulator {
 public:
  // Throws Error(kData) for invalid cases and Error(kUsage) for configs that do
  // not match the case.
  Simulator(NetworkCase c, ScenarioConfig config);

  int period() const { return t_; }
  int horizon() const { return horizon_; }
  const std::vector<StorageState>& states() const { return states_; }
  const std::vector<PolicyParams>& params() const { return params_; }
  double kappa() const { return kappa_; }
  const NetworkCase& network() const { return case_; }

  // Bids, clears, allocates, settles and advances one period. Errors carry the
  // period number in the message.
  PeriodRecord Step();

 private:
  NetworkCase case_;
  ScenarioConfig config_;
  double kappa_ = 0.0;
  double epsilon_ = 0.0;
  double delta_ = 0.0;
  int horizon_ = 0;
  int t_ = 0;
  std::vector<PolicyParams> params_;
  std::vector<StorageState> states_;
  std::vector<double> gamma_prev_;
  std::vector<std::vector<double>> replay_power_;
  std::vector<double> cef_energy_;
  std::vector<double> cef_intensity_;
};

SimulationReport RunHorizon(const NetworkCase& c, const ScenarioConfig& config);

// Price-taker evaluation of a storage strategy on a fixed price path.
struct ReplayResult {
  std::vector<double> power;
  std::vector<double> energy;      // after each period
  std::vector<double> cumulative;  // $
  double revenue_rate = 0.0;       // $/h
  int clipped = 0;                 // periods where the energy bounds cut power
};

ReplayResult ReplayStrategy(const StorageUnit& u, std::span<const double> gamma,
                            StorageStrategy strategy, double tau,
                            double v_multiplier = 1.0);

}  // namespace carbomarket
