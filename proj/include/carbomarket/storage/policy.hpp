#pragma once

#include <span>

#include "carbomarket/network/curve.hpp"
#include "carbomarket/network/network_case.hpp"

namespace carbomarket {

// Queue offset E_s (MWh) and penalty weight V_s (MWh per $/kWh).
struct PolicyParams {
  double e_offset = 0.0;
  double v = 0.0;
};

// Slack of each feasibility condition on (E_s, V_s); all >= 0 when valid.
struct ParamSlack {
  double v_positive = 0.0;
  double v_upper = 0.0;
  double e_lower = 0.0;
  double e_upper = 0.0;

  double Min() const;
};

// Largest admissible V_s and the matching E_s. Throws Error(kData,
// "E_ASSUMPTION") unless 0 <= gamma_lo < gamma_hi eta_c eta_d and
// e_min < e_max.
PolicyParams ChooseParameters(const StorageUnit& u);

// V_s = multiple * the chosen value, E_s at the middle of its admissible
// range for that V_s.
PolicyParams ScaledParameters(const StorageUnit& u, double multiple);

ParamSlack ParameterSlack(const StorageUnit& u, const PolicyParams& params);

struct StorageState {
  double e = 0.0;         // MWh
  double q = 0.0;         // e - E_s, MWh
  double psi_prev = 0.0;  // $/kWh, last period's emission price at the bus
};

StorageState InitialState(const StorageUnit& u, const PolicyParams& params);

// Net output (MW, > 0 discharges) minimising the exact drift-plus-penalty for
// combined price gamma ($/kWh). Defined for any real q and gamma.
double OptimalPower(double q, double gamma, const PolicyParams& params,
                    const StorageUnit& u, double tau);

// The five-branch piecewise-linear form; equals OptimalPower for gamma >= 0.
double OptimalPowerClosedForm(double q, double gamma, const PolicyParams& params,
                              const StorageUnit& u, double tau);

// Exact drift + V * (-revenue), in MWh^2. Throws Error(kUsage,
// "E_SIMULTANEOUS") when both powers are positive.
double DriftPlusPenalty(double q, double gamma, double p_charge,
                        double p_discharge, const PolicyParams& params,
                        const StorageUnit& u, double tau);

struct PowerBounds {
  double lo = 0.0;
  double hi = 0.0;
};

// OptimalPower at gamma_lo and gamma_hi, with 0 always inside the range.
PowerBounds BidBounds(double q, const PolicyParams& params, const StorageUnit& u,
                      double tau);

// Unlinearised bid cost ($/h) at net output p.
double BidCost(double p, double q, double psi_prev, const PolicyParams& params,
               const StorageUnit& u, double tau);

// Piecewise-linear bid ($/h vs MW) on the bid bounds: u.n_segments uniform
// points with 0 inserted when it is not already one. Throws Error(kUsage,
// "E_SEGMENTS") for fewer than two points.
PiecewiseLinearCurve BidCurve(double q, double psi_prev, const PolicyParams& params,
                              const StorageUnit& u, double tau);

// Applies net output p for one period. Throws Error(kNumeric,
// "E_SOC_VIOLATION") if the stored energy leaves [e_min, e_max] by more than
// 1e-7 MWh.
StorageState UpdateState(const StorageState& state, double p, double tau,
                         const StorageUnit& u, const PolicyParams& params);

// Energy change (MWh) caused by net output p.
double EnergyChange(double p, double tau, const StorageUnit& u);

// $ earned at combined price gamma ($/kWh) for net output p over tau hours.
double Revenue(double gamma, double p, double tau);

}  // namespace carbomarket
