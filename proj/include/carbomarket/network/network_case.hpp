#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "carbomarket/network/curve.hpp"

namespace carbomarket {

struct Bus {
  int id = 0;
  double loss_sensitivity = 0.0;  // L_i
  // Direction-dependent coefficients; when both are present the clearing may
  // iterate on the flow direction.
  std::optional<double> loss_injecting;
  std::optional<double> loss_consuming;

  bool has_directional_loss() const {
    return loss_injecting.has_value() && loss_consuming.has_value();
  }
};

struct Branch {
  int from = 0;  // bus index (not id)
  int to = 0;
  double reactance = 0.0;
  double capacity = std::numeric_limits<double>::infinity();  // MW
  std::vector<double> ptdf_row;  // explicit override, one entry per bus

  bool limited() const { return std::isfinite(capacity); }
};

struct Generator {
  std::string name;
  int bus = 0;  // bus index
  PiecewiseLinearCurve fuel_curve;      // $/h vs MW
  PiecewiseLinearCurve emission_curve;  // kgCO2/h vs MW
  double unit_emission = 0.0;           // kgCO2/kWh
  double p_min = 0.0;
  double p_max = 0.0;
  bool is_renewable = false;
};

struct StorageUnit {
  std::string name;
  int bus = 0;  // bus index
  double p_max = 0.0;  // MW
  double eta_c = 1.0;
  double eta_d = 1.0;
  double e_min = 0.0;  // MWh
  double e_max = 0.0;
  double e_init = 0.0;
  double gamma_lo = 0.0;  // $/kWh
  double gamma_hi = 0.0;
  int n_segments = 50;
};

struct Violation {
  std::string field;
  std::string rule;
};

class NetworkCase {
 public:
  std::string name;
  std::vector<Bus> buses;
  std::vector<Branch> branches;
  std::vector<Generator> generators;
  std::vector<StorageUnit> storages;
  double loss_offset = 0.0;  // L_0, MW
  int slack_bus = 0;         // bus index
  bool iterate_loss_direction = false;

  // Rows are periods. Loads: one column per bus (MW). Renewables: one column
  // per generator; only renewable columns are read (available MW).
  Eigen::MatrixXd load_series;
  Eigen::MatrixXd renewable_series;

  double tau = 1.0;       // h
  double kappa = 0.05;    // $/kgCO2
  double epsilon = 1e-4;  // $/kgCO2
  double delta = 0.002;

  int bus_count() const { return static_cast<int>(buses.size()); }
  int branch_count() const { return static_cast<int>(branches.size()); }
  int horizon() const { return static_cast<int>(load_series.rows()); }

  // Index of the bus with the given id, or -1.
  int BusIndex(int id) const;
  Eigen::VectorXd Demand(int period) const;
  double GeneratorPMax(int g, int period) const;
  double GeneratorPMin(int g, int period) const;

  // Branch x bus shift factors; explicit rows take precedence.
  const Eigen::MatrixXd& ptdf() const;
  // Recomputes the cached PTDF after topology edits.
  void RefreshPtdf();

 private:
  void BuildPtdf() const;

  mutable Eigen::MatrixXd ptdf_;
  mutable bool ptdf_ready_ = false;
};

// Empty iff every type invariant holds.
std::vector<Violation> ValidateCase(const NetworkCase& c);

// Throws Error(kData, "E_CASE_INVALID") listing every violation.
void RequireValidCase(const NetworkCase& c);

// Converts a generator with linear fuel cost ($/kWh) and unit emission
// (kgCO2/kWh) into MW-based curves.
Generator LinearGenerator(std::string name, int bus, double fuel_per_kwh,
                          double unit_emission, double p_min, double p_max);
Generator RenewableGenerator(std::string name, int bus, double p_max);

}  // namespace carbomarket
