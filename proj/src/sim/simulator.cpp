#include "carbomarket/sim/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "carbomarket/allocation/compact_form.hpp"
#include "carbomarket/cef/cef.hpp"
#include "carbomarket/common/error.hpp"
#include "carbomarket/common/units.hpp"
#include "carbomarket/storage/baselines.hpp"

namespace carbomarket {

std::string_view StrategyName(StorageStrategy s) {
  switch (s) {
    case StorageStrategy::kProposed:
      return "proposed";
    case StorageStrategy::kB1:
      return "B1";
    case StorageStrategy::kB2:
      return "B2";
    case StorageStrategy::kB3Replay:
      return "B3-replay";
  }
  return "unknown";
}

StorageStrategy ParseStrategy(std::string_view name) {
  for (auto s : {StorageStrategy::kProposed, StorageStrategy::kB1, StorageStrategy::kB2,
                 StorageStrategy::kB3Replay}) {
    if (name == StrategyName(s)) return s;
  }
  throw Error(ErrorKind::kUsage, "E_STRATEGY",
              "unknown storage strategy '" + std::string(name) +
                  "' (proposed, B1, B2, B3-replay)");
}

ScenarioConfig ProposedScenario() { return {}; }

ScenarioConfig A1Scenario() {
  ScenarioConfig s;
  s.name = "A1";
  s.enable_allocation = false;
  return s;
}

ScenarioConfig A2Scenario() {
  ScenarioConfig s;
  s.name = "A2";
  s.enable_storage = false;
  return s;
}

ScenarioConfig A3Scenario() {
  ScenarioConfig s;
  s.name = "A3";
  s.enable_storage = false;
  s.enable_allocation = false;
  return s;
}

std::vector<ScenarioConfig> ScenarioMatrix() {
  return {ProposedScenario(), A1Scenario(), A2Scenario(), A3Scenario()};
}

ScenarioConfig ScenarioByName(std::string_view name) {
  for (const ScenarioConfig& s : ScenarioMatrix()) {
    if (s.name == name) return s;
  }
  throw Error(ErrorKind::kUsage, "E_SCENARIO",
              "unknown scenario '" + std::string(name) + "' (Proposed, A1, A2, A3)");
}

double Settlement::imbalance() const {
  return payments() - revenues() - congestion_rent - loss_surplus - emission_charges;
}

double Settlement::relative_imbalance() const {
  const double scale = std::max({std::abs(load_energy), std::abs(generator), 1.0});
  return std::abs(imbalance()) / scale;
}

Settlement Settle(const NetworkCase& c, const ClearingResult& r,
                  const Eigen::VectorXd& psi, double tau) {
  const double k = tau * kKwhPerMwh;
  auto psi_at = [&](int bus) { return psi.size() > 0 ? psi[bus] : 0.0; };
  Settlement s;
  for (int i = 0; i < c.bus_count(); ++i) {
    s.load_energy += r.lmp[i] * r.demand[i] * tau;
    s.load_emission += psi_at(i) * r.demand[i] * k;
  }
  for (int g = 0; g < r.generator_count; ++g) {
    s.generator += r.lmp[c.generators[g].bus] * r.dispatch[g] * tau;
  }
  for (std::size_t j = 0; j < c.storages.size(); ++j) {
    const int bus = c.storages[j].bus;
    const double p = r.storage_dispatch(static_cast<int>(j));
    s.storage_energy += r.lmp[bus] * p * tau;
    s.storage_emission += psi_at(bus) * p * k;
  }
  s.congestion_rent = CongestionRent(c, r) * tau;
  s.loss_surplus = -r.lambda_bar * c.loss_offset * tau;
  s.emission_charges = s.load_emission - s.storage_emission;
  if (s.relative_imbalance() > 1e-6) {
    ThrowNumeric("E_SETTLEMENT", "settlement does not balance: residual " +
                                     std::to_string(s.imbalance()) + " $");
  }
  return s;
}

std::vector<AgentBid> PlantBids(const NetworkCase& c, int period, double kappa,
                                bool enable_allocation) {
  std::vector<AgentBid> out;
  out.reserve(c.generators.size());
  for (int g = 0; g < static_cast<int>(c.generators.size()); ++g) {
    const Generator& gen = c.generators[g];
    AgentBid b;
    b.p_min = c.GeneratorPMin(g, period);
    b.p_max = c.GeneratorPMax(g, period);
    b.cost = enable_allocation && kappa != 0.0
                 ? gen.fuel_curve.Plus(gen.emission_curve, kappa / 2.0)
                 : gen.fuel_curve;
    out.push_back(std::move(b));
  }
  return out;
}

double FitRevenueRate(std::span<const double> cumulative, double tau) {
  const std::size_t n = cumulative.size();
  if (n < 2) {
    throw Error(ErrorKind::kUsage, "E_FIT_POINTS", "a revenue rate needs two points");
  }
  double hbar = 0.0;
  double cbar = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    hbar += (k + 1) * tau;
    cbar += cumulative[k];
  }
  hbar /= n;
  cbar /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double dh = (k + 1) * tau - hbar;
    sxy += dh * (cumulative[k] - cbar);
    sxx += dh * dh;
  }
  return sxy / sxx;
}

namespace {

PolicyParams ProposedParams(const StorageUnit& u, double multiple) {
  return multiple == 1.0 ? ChooseParameters(u) : ScaledParameters(u, multiple);
}

AgentBid FixedBid(double p) {
  return {PiecewiseLinearCurve::Linear(0.0, 0.0, p, p), p, p};
}

double Rate(const std::vector<double>& cumulative, double tau) {
  if (cumulative.empty()) return 0.0;
  if (cumulative.size() == 1) return cumulative[0] / tau;
  return FitRevenueRate(cumulative, tau);
}

}  // namespace

Simulator::Simulator(NetworkCase c, ScenarioConfig config)
    : case_(std::move(c)), config_(std::move(config)) {
  RequireValidCase(case_);
  kappa_ = config_.kappa_override.value_or(case_.kappa);
  epsilon_ = config_.epsilon.value_or(case_.epsilon);
  delta_ = config_.delta.value_or(case_.delta);
  horizon_ = config_.horizon < 0 ? case_.horizon() : config_.horizon;
  if (horizon_ > case_.horizon()) {
    throw Error(ErrorKind::kUsage, "E_HORIZON",
                "horizon " + std::to_string(horizon_) + " exceeds the " +
                    std::to_string(case_.horizon()) + " periods in the series");
  }
  if (!config_.enable_storage) case_.storages.clear();
  const std::size_t ns = case_.storages.size();
  if (!config_.enable_storage) {
    config_.strategy.clear();
    config_.v_multiplier.clear();
  }
  if (config_.strategy.empty()) config_.strategy.assign(ns, StorageStrategy::kProposed);
  if (config_.v_multiplier.empty()) config_.v_multiplier.assign(ns, 1.0);
  if (config_.strategy.size() != ns || config_.v_multiplier.size() != ns) {
    throw Error(ErrorKind::kUsage, "E_STRATEGY",
                "per-storage settings must list " + std::to_string(ns) + " entries");
  }
  replay_power_.resize(ns);
  for (std::size_t s = 0; s < ns; ++s) {
    const StorageUnit& u = case_.storages[s];
    const PolicyParams p = config_.strategy[s] == StorageStrategy::kB1
                               ? B1Parameters(u, case_.tau)
                               : ProposedParams(u, config_.v_multiplier[s]);
    params_.push_back(p);
    states_.push_back(InitialState(u, p));
    gamma_prev_.push_back(0.5 * (u.gamma_lo + u.gamma_hi));
    cef_energy_.push_back(u.e_init);
    cef_intensity_.push_back(0.0);
    if (config_.strategy[s] == StorageStrategy::kB3Replay) {
      if (s >= config_.replay_prices.size() ||
          static_cast<int>(config_.replay_prices[s].size()) < horizon_) {
        throw Error(ErrorKind::kUsage, "E_REPLAY_PRICES",
                    "storage " + u.name + " replays B3 but has no recorded price path "
                                          "covering the horizon");
      }
      const std::span<const double> g(config_.replay_prices[s].data(), horizon_);
      replay_power_[s] = OfflineOptimal(g, u, case_.tau).power;
    }
  }
}

PeriodRecord Simulator::Step() {
  if (t_ >= horizon_) {
    throw Error(ErrorKind::kUsage, "E_HORIZON", "simulation already finished");
  }
  const int t = t_;
  const double tau = case_.tau;
  const int ng = static_cast<int>(case_.generators.size());
  const int ns = static_cast<int>(case_.storages.size());
  PeriodRecord rec;
  rec.period = t;
  try {
    BidSet bids;
    bids.generators = PlantBids(case_, t, kappa_, config_.enable_allocation);
    bids.demand = case_.Demand(t);
    std::vector<std::pair<double, double>> bounds(ns);
    for (int s = 0; s < ns; ++s) {
      const StorageUnit& u = case_.storages[s];
      const StorageState& st = states_[s];
      double p = 0.0;
      switch (config_.strategy[s]) {
        case StorageStrategy::kProposed: {
          const PowerBounds b = BidBounds(st.q, params_[s], u, tau);
          bids.storages.push_back(
              {BidCurve(st.q, st.psi_prev, params_[s], u, tau), b.lo, b.hi});
          bounds[s] = {b.lo, b.hi};
          continue;
        }
        case StorageStrategy::kB1:
          p = ClipToEnergy(B1Power(st.q, gamma_prev_[s], params_[s], u, tau), st.e, u, tau);
          break;
        case StorageStrategy::kB2:
          p = B2Power(gamma_prev_[s], st.e, u, tau);
          break;
        case StorageStrategy::kB3Replay:
          p = ClipToEnergy(replay_power_[s][t], st.e, u, tau);
          break;
      }
      bids.storages.push_back(FixedBid(p));
      bounds[s] = {p, p};
    }

    ClearingOptions co;
    co.epsilon = epsilon_;
    const ClearingResult r = case_.iterate_loss_direction
                                 ? ClearWithLossIteration(case_, bids, co)
                                 : ClearMarket(case_, bids, co);

    Eigen::VectorXd psi = Eigen::VectorXd::Zero(case_.bus_count());
    std::vector<double> storage_cost(ns, 0.0);
    if (config_.enable_allocation) {
      CompactFormOptions fo;
      fo.epsilon = epsilon_;
      fo.kappa = kappa_;
      fo.tau = tau;
      const CompactAllocationForm form = BuildCompactForm(case_, bids, r, fo);
      SweepOptions so;
      so.delta = delta_;
      AllocationResult a = AllocateEmissions(form, so);
      psi = a.psi;
      for (int s = 0; s < ns; ++s) storage_cost[s] = a.storage_cost[s];
      rec.cost_sharing_error = a.cost_sharing_error;
      rec.sweep_iterations = a.iterations;
      rec.feasible_start = a.start.used;
      rec.breakpoints = std::move(a.breakpoints);
    }

    rec.settlement = Settle(case_, r, psi, tau);
    rec.fuel_cost = r.fuel_cost;
    rec.bid_cost = r.total_cost;
    rec.emission = r.total_emission;
    rec.lambda_bar = r.lambda_bar;
    rec.lmp = r.lmp;
    rec.psi = psi;
    rec.demand = r.demand;
    rec.dispatch = r.dispatch.head(ng);
    for (int g = 0; g < ng; ++g) {
      if (!case_.generators[g].is_renewable) continue;
      rec.renewable_available += case_.GeneratorPMax(g, t);
      rec.renewable_dispatched += r.dispatch[g];
    }

    CefResult cef;
    if (config_.compute_cef) {
      const Eigen::VectorXd intensity =
          Eigen::Map<const Eigen::VectorXd>(cef_intensity_.data(), ns);
      cef = CefSolve(FlowGraphFromClearing(case_, r, intensity));
      rec.cef_psi = CefEmissionPrices(cef.rho, kappa_);
    }

    for (int s = 0; s < ns; ++s) {
      const StorageUnit& u = case_.storages[s];
      StorageRecord sr;
      sr.power = r.storage_dispatch(s);
      // Undo the rounding left by the p - p_min shift so an idle unit is idle.
      if (std::abs(sr.power) < 1e-9) sr.power = 0.0;
      sr.gamma = r.lmp[u.bus] / kKwhPerMwh + psi[u.bus];
      sr.revenue = Revenue(sr.gamma, sr.power, tau);
      sr.allocated = storage_cost[s];
      sr.emission = kappa_ != 0.0 ? storage_cost[s] / kappa_ : 0.0;
      sr.bid_lo = bounds[s].first;
      sr.bid_hi = bounds[s].second;
      states_[s] = UpdateState(states_[s], sr.power, tau, u, params_[s]);
      states_[s].psi_prev = psi[u.bus];
      gamma_prev_[s] = sr.gamma;
      sr.energy = states_[s].e;
      if (config_.compute_cef) {
        const CefStorageStep step =
            CefStorageUpdate({cef_energy_[s], cef_intensity_[s]}, sr.power,
                             cef.rho[u.bus], tau, u.eta_c, u.eta_d);
        cef_energy_[s] = step.state.stored_energy;
        cef_intensity_[s] = step.state.stored_intensity;
        sr.cef_emission = step.attributed;
      }
      rec.storages.push_back(sr);
    }
  } catch (const Error& e) {
    throw Error(e.kind(), e.code(), "period " + std::to_string(t) + ": " + e.what());
  }
  ++t_;
  return rec;
}

void Summarize(const NetworkCase& c, SimulationReport& report) {
  const auto& rows = report.periods;
  const double n = static_cast<double>(rows.size());
  report.avg_fuel_cost = 0.0;
  report.avg_emission = 0.0;
  report.max_cost_sharing_error = 0.0;
  report.mean_cost_sharing_error = 0.0;
  report.max_settlement_imbalance = 0.0;
  report.feasible_start_periods = 0;
  std::vector<Eigen::VectorXd> avail, used;
  for (const PeriodRecord& p : rows) {
    report.avg_fuel_cost += p.fuel_cost;
    report.avg_emission += p.emission;
    report.max_cost_sharing_error = std::max(report.max_cost_sharing_error, p.cost_sharing_error);
    report.mean_cost_sharing_error += p.cost_sharing_error;
    report.max_settlement_imbalance =
        std::max(report.max_settlement_imbalance, p.settlement.relative_imbalance());
    report.feasible_start_periods += p.feasible_start ? 1 : 0;
    avail.push_back(Eigen::VectorXd::Constant(1, p.renewable_available));
    used.push_back(Eigen::VectorXd::Constant(1, p.renewable_dispatched));
  }
  if (n > 0) {
    report.avg_fuel_cost /= n;
    report.avg_emission /= n;
    report.mean_cost_sharing_error /= n;
  }
  report.curtailment = RenewableCurtailment(avail, used).fraction;

  report.storages.clear();
  const std::size_t ns = rows.empty() ? 0 : rows.front().storages.size();
  for (std::size_t s = 0; s < ns; ++s) {
    StorageSummary sum;
    sum.name = s < c.storages.size() ? c.storages[s].name : std::to_string(s);
    std::vector<double> rev, em, cef;
    double r = 0.0, e = 0.0, ce = 0.0;
    for (const PeriodRecord& p : rows) {
      r += p.storages[s].revenue;
      e += p.storages[s].emission;
      ce += p.storages[s].cef_emission;
      rev.push_back(r);
      em.push_back(e);
      cef.push_back(ce);
    }
    sum.total_revenue = r;
    sum.revenue_rate = Rate(rev, c.tau);
    sum.emission_rate = Rate(em, c.tau);
    sum.cef_emission_rate = Rate(cef, c.tau);
    report.storages.push_back(sum);
  }
}

SimulationReport RunHorizon(const NetworkCase& c, const ScenarioConfig& config) {
  Simulator sim(c, config);
  SimulationReport report;
  report.config = config;
  report.config.horizon = sim.horizon();
  report.periods.reserve(sim.horizon());
  try {
    while (sim.period() < sim.horizon()) report.periods.push_back(sim.Step());
    report.completed = true;
  } catch (const Error& e) {
    report.error_code = e.code();
    report.error_kind = e.kind();
    report.error_message = e.what();
    report.failed_period = sim.period();
  }
  Summarize(sim.network(), report);
  return report;
}

ReplayResult ReplayStrategy(const StorageUnit& u, std::span<const double> gamma,
                            StorageStrategy strategy, double tau, double v_multiplier) {
  ReplayResult out;
  const int n = static_cast<int>(gamma.size());
  std::vector<double> planned;
  PolicyParams params;
  if (strategy == StorageStrategy::kB3Replay) {
    planned = OfflineOptimal(gamma, u, tau).power;
  } else if (strategy == StorageStrategy::kB1) {
    params = B1Parameters(u, tau);
  } else {
    params = ProposedParams(u, v_multiplier);
  }
  double e = u.e_init;
  double cum = 0.0;
  for (int t = 0; t < n; ++t) {
    const double q = e - params.e_offset;
    double p = 0.0;
    switch (strategy) {
      case StorageStrategy::kProposed:
        p = OptimalPower(q, gamma[t], params, u, tau);
        break;
      case StorageStrategy::kB1:
        p = B1Power(q, gamma[t], params, u, tau);
        break;
      case StorageStrategy::kB2:
        p = B2Power(gamma[t], e, u, tau);
        break;
      case StorageStrategy::kB3Replay:
        p = planned[t];
        break;
    }
    const double clipped = ClipToEnergy(p, e, u, tau);
    if (std::abs(clipped - p) > 1e-9) ++out.clipped;
    p = clipped;
    e = std::clamp(e + EnergyChange(p, tau, u), u.e_min, u.e_max);
    cum += Revenue(gamma[t], p, tau);
    out.power.push_back(p);
    out.energy.push_back(e);
    out.cumulative.push_back(cum);
  }
  out.revenue_rate = Rate(out.cumulative, tau);
  return out;
}

}  // namespace carbomarket
