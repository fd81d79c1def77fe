#include "carbomarket/storage/policy.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "carbomarket/common/error.hpp"
#include "carbomarket/common/units.hpp"

namespace carbomarket {

double ParamSlack::Min() const {
  return std::min({v_positive, v_upper, e_lower, e_upper});
}

PolicyParams ChooseParameters(const StorageUnit& u) {
  const double spread = u.gamma_hi * u.eta_c * u.eta_d - u.gamma_lo;
  if (!(u.gamma_lo >= 0.0) || !(spread > 0.0)) {
    ThrowData("E_ASSUMPTION", "storage " + u.name +
                                  ": need 0 <= gamma_lo < gamma_hi*eta_c*eta_d");
  }
  if (!(u.e_max > u.e_min)) {
    ThrowData("E_ASSUMPTION", "storage " + u.name + ": need e_min < e_max");
  }
  PolicyParams p;
  p.e_offset = (u.gamma_hi * u.eta_c * u.eta_d * u.e_max - u.gamma_lo * u.e_min) / spread;
  p.v = u.eta_c * (u.e_max - u.e_min) / spread;
  return p;
}

PolicyParams ScaledParameters(const StorageUnit& u, double multiple) {
  PolicyParams p = ChooseParameters(u);
  p.v *= multiple;
  const double lo = u.e_min + p.v * u.gamma_hi * u.eta_d;
  const double hi = u.e_max + p.v * u.gamma_lo / u.eta_c;
  p.e_offset = 0.5 * (lo + hi);
  return p;
}

ParamSlack ParameterSlack(const StorageUnit& u, const PolicyParams& p) {
  const double spread = u.gamma_hi * u.eta_c * u.eta_d - u.gamma_lo;
  ParamSlack s;
  s.v_positive = p.v;
  s.v_upper = u.eta_c * (u.e_max - u.e_min) / spread - p.v;
  s.e_lower = p.e_offset - (u.e_min + p.v * u.gamma_hi * u.eta_d);
  s.e_upper = u.e_max + p.v * u.gamma_lo / u.eta_c - p.e_offset;
  return s;
}

StorageState InitialState(const StorageUnit& u, const PolicyParams& params) {
  return {u.e_init, u.e_init - params.e_offset, 0.0};
}

double OptimalPower(double q, double gamma, const PolicyParams& params,
                    const StorageUnit& u, double tau) {
  const double vg = params.v * gamma;
  // Each branch is a one-dimensional convex quadratic; clamp its vertex.
  const double pc = std::clamp(-(q * u.eta_c + vg) / (tau * u.eta_c * u.eta_c), 0.0, u.p_max);
  const double pd = std::clamp((q / u.eta_d + vg) * u.eta_d * u.eta_d / tau, 0.0, u.p_max);
  const double charge = DriftPlusPenalty(q, gamma, pc, 0.0, params, u, tau);
  const double discharge = DriftPlusPenalty(q, gamma, 0.0, pd, params, u, tau);
  if (charge < discharge) return -pc;
  if (discharge < charge) return pd;
  return pc == 0.0 ? pd : (pd == 0.0 ? -pc : 0.0);
}

double OptimalPowerClosedForm(double q, double gamma, const PolicyParams& params,
                              const StorageUnit& u, double tau) {
  const double vg = params.v * gamma;
  const double ec = u.eta_c;
  const double ed = u.eta_d;
  if (q <= -vg / ec - u.p_max * tau * ec) return -u.p_max;
  if (q <= -vg / ec) return (q * ec + vg) / (tau * ec * ec);
  if (q <= -vg * ed) return 0.0;
  if (q <= -vg * ed + u.p_max * tau / ed) return (q / ed + vg) / (tau / (ed * ed));
  return u.p_max;
}

double DriftPlusPenalty(double q, double gamma, double p_charge, double p_discharge,
                        const PolicyParams& params, const StorageUnit& u, double tau) {
  if (p_charge > 0.0 && p_discharge > 0.0) {
    throw Error(ErrorKind::kUsage, "E_SIMULTANEOUS",
                "charging and discharging in the same period");
  }
  const double de = p_charge * tau * u.eta_c - p_discharge * tau / u.eta_d;
  return de * de / 2.0 + de * q - params.v * gamma * (p_discharge - p_charge) * tau;
}

PowerBounds BidBounds(double q, const PolicyParams& params, const StorageUnit& u,
                      double tau) {
  // Outside the queue range the chosen parameters keep q in, the policy
  // at gamma_lo can discharge (or at gamma_hi charge); the bounds keep 0.
  return {std::min(0.0, OptimalPower(q, u.gamma_lo, params, u, tau)),
          std::max(0.0, OptimalPower(q, u.gamma_hi, params, u, tau))};
}

double BidCost(double p, double q, double psi_prev, const PolicyParams& params,
               const StorageUnit& u, double tau) {
  double f;
  if (p <= 0.0) {
    f = p * u.eta_c * (p * tau * u.eta_c - 2.0 * q) / (2.0 * params.v);
  } else {
    f = p * (p * tau - 2.0 * q * u.eta_d) / (2.0 * params.v * u.eta_d * u.eta_d);
  }
  return (f - psi_prev * p) * kKwhPerMwh;
}

PiecewiseLinearCurve BidCurve(double q, double psi_prev, const PolicyParams& params,
                              const StorageUnit& u, double tau) {
  if (u.n_segments < 2) {
    throw Error(ErrorKind::kUsage, "E_SEGMENTS",
                "storage " + u.name + " needs at least two bid points");
  }
  const PowerBounds b = BidBounds(q, params, u, tau);
  if (!(b.hi > b.lo)) {
    return PiecewiseLinearCurve::Linear(0.0, BidCost(b.lo, q, psi_prev, params, u, tau),
                                        b.lo, b.hi);
  }
  std::vector<double> grid;
  const int n = u.n_segments;
  for (int k = 0; k < n; ++k) {
    grid.push_back(k == n - 1 ? b.hi : b.lo + (b.hi - b.lo) * k / (n - 1));
  }
  if (b.lo < 0.0 && b.hi > 0.0) grid.push_back(0.0);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  std::vector<CurvePoint> pts;
  for (double p : grid) pts.push_back({p, BidCost(p, q, psi_prev, params, u, tau)});
  return CurveFromPoints(pts);
}

double EnergyChange(double p, double tau, const StorageUnit& u) {
  return p < 0.0 ? -p * tau * u.eta_c : -p * tau / u.eta_d;
}

StorageState UpdateState(const StorageState& state, double p, double tau,
                         const StorageUnit& u, const PolicyParams& params) {
  StorageState next = state;
  next.e = state.e + EnergyChange(p, tau, u);
  const double tol = 1e-7;
  if (next.e < u.e_min - tol || next.e > u.e_max + tol) {
    ThrowNumeric("E_SOC_VIOLATION",
                 "storage " + u.name + " energy " + std::to_string(next.e) +
                     " MWh outside [" + std::to_string(u.e_min) + ", " +
                     std::to_string(u.e_max) + "]");
  }
  next.e = std::clamp(next.e, u.e_min, u.e_max);
  next.q = next.e - params.e_offset;
  return next;
}

double Revenue(double gamma, double p, double tau) {
  return gamma * p * tau * kKwhPerMwh;
}

}  // namespace carbomarket
