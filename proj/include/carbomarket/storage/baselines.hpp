#pragma once

#include <span>
#include <utility>
#include <vector>

#include "carbomarket/storage/policy.hpp"

namespace carbomarket {

struct OfflineSchedule {
  double revenue = 0.0;        // $ over the horizon
  std::vector<double> power;   // net MW per period
  std::vector<double> energy;  // MWh at the start of each period, plus the end
  // Periods where the relaxation charges and discharges together (only
  // possible at non-positive prices).
  std::vector<int> simultaneous;

  bool complementary() const { return simultaneous.empty(); }
};

// Revenue-maximising schedule with perfect foresight of gamma ($/kWh),
// starting from u.e_init and keeping e within [e_min, e_max]. Solves the LP
// relaxation exactly by dynamic programming over concave value functions.
OfflineSchedule OfflineOptimal(std::span<const double> gamma, const StorageUnit& u,
                               double tau);

// Parameters of the linear-surrogate Lyapunov policy. Throws Error(kData,
// "E_ASSUMPTION") when the range is too narrow for them to exist.
PolicyParams B1Parameters(const StorageUnit& u, double tau);

// Bang-bang minimiser of the linear surrogate: -p_max, 0 or p_max.
double B1Power(double q, double gamma, const PolicyParams& params,
               const StorageUnit& u, double tau);

// Threshold rule at maximum feasible power.
double B2Power(double gamma, double e, const StorageUnit& u, double tau,
               double lo_threshold = 0.02, double hi_threshold = 0.05);

// Largest |p| in the direction of p that keeps e within bounds.
double ClipToEnergy(double p, double e, const StorageUnit& u, double tau);

// (min, max) of the first `window` prices; the minimum is floored at 0.
std::pair<double, double> EstimatePriceRange(std::span<const double> gamma,
                                             int window = 168);

}  // namespace carbomarket
