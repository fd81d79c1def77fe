#pragma once

#include "carbomarket/allocation/aumann_shapley.hpp"
#include "carbomarket/allocation/compact_form.hpp"

namespace carbomarket {

struct AxiomReport {
  double additivity_gap = 0.0;   // $, per-generator split vs combined
  double scale_gap = 0.0;        // relative, MW -> kW rescaling
  double consistency_gap = 0.0;  // $, split consumers vs merged
  int generators_checked = 0;

  bool Passed(double additivity_tol = 1e-8, double scale_tol = 1e-8,
              double consistency_tol = 1e-8) const {
    return additivity_gap <= additivity_tol && scale_gap <= scale_tol &&
           consistency_gap <= consistency_tol;
  }
};

// Same system with every power quantity multiplied by `factor` (e.g. 1000 for
// MW -> kW); cost and emission curves are re-expressed so dollar and kg
// amounts are unchanged.
NetworkCase RescalePower(const NetworkCase& c, double factor);
BidSet RescaleBids(const BidSet& bids, double factor);

// Clears the period, allocates, and checks additivity, scale invariance and
// consistency. Intended for small cases.
AxiomReport VerifyAxioms(const NetworkCase& c, const BidSet& bids,
                         const CompactFormOptions& form_options,
                         const SweepOptions& sweep);

}  // namespace carbomarket
