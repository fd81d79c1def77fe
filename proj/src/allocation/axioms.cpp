#include "carbomarket/allocation/axioms.hpp"

#include <algorithm>
#include <cmath>

namespace carbomarket {
namespace {

// p' = factor * p, value unchanged: slope / factor, domain * factor.
PiecewiseLinearCurve RescaleCurve(const PiecewiseLinearCurve& cv, double factor) {
  std::vector<Segment> segs = cv.segments();
  for (Segment& s : segs) s.slope /= factor;
  return PiecewiseLinearCurve::FromSegments(std::move(segs), cv.lo() * factor,
                                            cv.hi() * factor);
}

struct Allocation {
  AllocationResult result;
  CompactAllocationForm form;
};

Allocation Run(const NetworkCase& c, const BidSet& bids,
               const CompactFormOptions& fo, const SweepOptions& so) {
  ClearingOptions co;
  co.epsilon = fo.epsilon;
  co.simplex = so.simplex;
  const ClearingResult cr = ClearMarket(c, bids, co);
  CompactAllocationForm form = BuildCompactForm(c, bids, cr, fo);
  AllocationResult res = AllocateEmissions(form, so);
  return {std::move(res), std::move(form)};
}

}  // namespace

NetworkCase RescalePower(const NetworkCase& c, double factor) {
  NetworkCase out = c;
  for (Branch& br : out.branches) br.capacity *= factor;
  for (Generator& g : out.generators) {
    g.fuel_curve = RescaleCurve(g.fuel_curve, factor);
    g.emission_curve = RescaleCurve(g.emission_curve, factor);
    g.p_min *= factor;
    g.p_max *= factor;
    g.unit_emission /= factor;
  }
  for (StorageUnit& s : out.storages) {
    s.p_max *= factor;
    s.e_min *= factor;
    s.e_max *= factor;
    s.e_init *= factor;
  }
  out.loss_offset *= factor;
  out.load_series *= factor;
  out.renewable_series *= factor;
  out.RefreshPtdf();
  return out;
}

BidSet RescaleBids(const BidSet& bids, double factor) {
  BidSet out = bids;
  auto fix = [factor](AgentBid& b) {
    b.cost = RescaleCurve(b.cost, factor);
    b.p_min *= factor;
    b.p_max *= factor;
  };
  for (AgentBid& b : out.generators) fix(b);
  for (AgentBid& b : out.storages) fix(b);
  out.demand *= factor;
  return out;
}

AxiomReport VerifyAxioms(const NetworkCase& c, const BidSet& bids,
                         const CompactFormOptions& form_options,
                         const SweepOptions& sweep) {
  AxiomReport report;
  const Allocation base = Run(c, bids, form_options, sweep);
  const AllocationResult& whole = base.result;

  // Additivity: allocate each generator's emission cost on its own.
  Eigen::VectorXd load_sum = Eigen::VectorXd::Zero(whole.load_cost.size());
  Eigen::VectorXd storage_sum = Eigen::VectorXd::Zero(whole.storage_cost.size());
  const double w = form_options.kappa * form_options.tau / 2.0;
  for (std::size_t g = 0; g < c.generators.size(); ++g) {
    const int col = base.form.lp.sigma_var[g];
    if (col < 0) continue;
    CompactAllocationForm part = base.form;
    part.k.setZero();
    part.k[col] = w;
    part.k_constant = w * base.form.lp.sigma_offset[g];
    const AllocationResult r = AllocateEmissions(part, sweep);
    load_sum += r.load_cost;
    storage_sum += r.storage_cost;
    ++report.generators_checked;
  }
  report.additivity_gap =
      std::max((load_sum - whole.load_cost).lpNorm<Eigen::Infinity>(),
               storage_sum.size() > 0
                   ? (storage_sum - whole.storage_cost).lpNorm<Eigen::Infinity>()
                   : 0.0);

  // Scale invariance: the same system expressed in kW.
  const double factor = 1000.0;
  const Allocation scaled =
      Run(RescalePower(c, factor), RescaleBids(bids, factor), form_options, sweep);
  const double scale = std::max(1.0, whole.load_cost.lpNorm<Eigen::Infinity>());
  double gap = (scaled.result.load_cost - whole.load_cost).lpNorm<Eigen::Infinity>();
  if (whole.storage_cost.size() > 0) {
    gap = std::max(gap, (scaled.result.storage_cost - whole.storage_cost)
                            .lpNorm<Eigen::Infinity>());
  }
  report.scale_gap = gap / scale;

  // Consistency: two consumers sharing a bus face the bus price, so splitting
  // a load and summing the parts reproduces the merged allocation.
  double cgap = 0.0;
  for (int i = 0; i < whole.psi.size(); ++i) {
    const double d = base.form.demand_star[i];
    const double unit = base.form.tau * 1000.0;
    const double parts = whole.psi[i] * (0.3 * d) * unit + whole.psi[i] * (0.7 * d) * unit;
    cgap = std::max(cgap, std::abs(parts - whole.load_cost[i]));
  }
  report.consistency_gap = cgap;
  return report;
}

}  // namespace carbomarket
