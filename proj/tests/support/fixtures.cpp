#include "support/fixtures.hpp"

#include <algorithm>

#include "carbomarket/common/error.hpp"
#include "carbomarket/market/clearing.hpp"

namespace cmtest {

cm::NetworkCase SingleBusCase(std::vector<cm::Generator> gens, double demand,
                              int periods) {
  cm::NetworkCase c;
  c.name = "single";
  c.buses = {{1}};
  c.generators = std::move(gens);
  c.load_series = Eigen::MatrixXd::Constant(periods, 1, demand);
  c.renewable_series = Eigen::MatrixXd::Zero(periods, c.generators.size());
  return c;
}

cm::NetworkCase ThreeBusCase(double load, double limit) {
  cm::NetworkCase c;
  c.name = "three";
  c.buses = {{1}, {2}, {3}};
  c.branches = {{0, 1, 0.1, 1e9, {}}, {1, 2, 0.1, 1e9, {}}, {0, 2, 0.1, limit, {}}};
  c.branches[0].capacity = std::numeric_limits<double>::infinity();
  c.branches[1].capacity = std::numeric_limits<double>::infinity();
  c.generators.push_back(cm::LinearGenerator("cheap", 0, 0.020, 0.9, 0, 200));
  c.generators.push_back(cm::LinearGenerator("dear", 1, 0.050, 0.3, 0, 200));
  c.load_series = Eigen::MatrixXd::Zero(1, 3);
  c.load_series(0, 2) = load;
  c.renewable_series = Eigen::MatrixXd::Zero(1, 2);
  return c;
}

cm::BidSet FuelBids(const cm::NetworkCase& c, int period, double emission_weight) {
  cm::BidSet bids;
  for (int g = 0; g < static_cast<int>(c.generators.size()); ++g) {
    const auto& gen = c.generators[g];
    cm::AgentBid b;
    b.p_min = c.GeneratorPMin(g, period);
    b.p_max = c.GeneratorPMax(g, period);
    b.cost = gen.fuel_curve.Plus(gen.emission_curve, emission_weight);
    bids.generators.push_back(b);
  }
  bids.storages.resize(c.storages.size());
  bids.demand = c.Demand(period);
  return bids;
}

cm::NetworkCase RandomCase(std::mt19937& rng, const RandomCaseOptions& opt) {
  std::uniform_int_distribution<int> nbus(opt.min_buses, opt.max_buses);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    cm::NetworkCase c;
    c.name = "random";
    const int nb = nbus(rng);
    for (int i = 0; i < nb; ++i) c.buses.push_back({i + 1});
    // Random spanning tree plus a few chords.
    for (int i = 1; i < nb; ++i) {
      std::uniform_int_distribution<int> parent(0, i - 1);
      c.branches.push_back({parent(rng), i, 0.05 + 0.3 * u(rng), 0, {}});
    }
    const int chords = std::uniform_int_distribution<int>(0, nb / 2)(rng);
    for (int k = 0; k < chords; ++k) {
      const int a = std::uniform_int_distribution<int>(0, nb - 1)(rng);
      const int b = std::uniform_int_distribution<int>(0, nb - 1)(rng);
      if (a != b) c.branches.push_back({a, b, 0.05 + 0.3 * u(rng), 0, {}});
    }
    const int ng = std::uniform_int_distribution<int>(2, 5)(rng);
    double capacity = 0.0;
    double min_out = 0.0;
    for (int g = 0; g < ng; ++g) {
      const int bus = std::uniform_int_distribution<int>(0, nb - 1)(rng);
      const double pmax = 30.0 + 70.0 * u(rng);
      const double pmin = opt.allow_pmin && u(rng) < 0.3 ? 0.2 * pmax * u(rng) : 0.0;
      const double fuel = 0.02 + 0.04 * u(rng);
      const double psi = 0.1 + 0.9 * u(rng);
      cm::Generator gen = cm::LinearGenerator("g" + std::to_string(g), bus, fuel,
                                              psi, pmin, pmax);
      if (opt.piecewise && u(rng) < 0.5) {
        // Convex two-piece fuel and emission curves.
        const double knee = pmin + (pmax - pmin) * (0.3 + 0.4 * u(rng));
        const double s1 = fuel * 1000;
        const double s2 = s1 * (1.1 + 0.5 * u(rng));
        const std::vector<cm::CurvePoint> fp{
            {pmin, s1 * pmin}, {knee, s1 * knee}, {pmax, s1 * knee + s2 * (pmax - knee)}};
        gen.fuel_curve = cm::CurveFromPoints(fp);
        const double e1 = psi * 1000;
        const double e2 = e1 * (1.05 + 0.4 * u(rng));
        const std::vector<cm::CurvePoint> ep{
            {pmin, e1 * pmin}, {knee, e1 * knee}, {pmax, e1 * knee + e2 * (pmax - knee)}};
        gen.emission_curve = cm::CurveFromPoints(ep);
      }
      capacity += pmax;
      min_out += pmin;
      c.generators.push_back(std::move(gen));
    }
    c.load_series = Eigen::MatrixXd::Zero(1, nb);
    const double total = min_out + (capacity - min_out) * (0.3 + 0.5 * u(rng));
    Eigen::VectorXd w(nb);
    for (int i = 0; i < nb; ++i) w[i] = u(rng) < 0.7 ? u(rng) : 0.0;
    if (w.sum() <= 0) w[nb - 1] = 1.0;
    c.load_series.row(0) = (total * w / w.sum()).transpose();
    // Capacities: generous on most lines, a couple tight enough to bind.
    Eigen::VectorXd inj = -c.load_series.row(0).transpose();
    for (const auto& g : c.generators) inj[g.bus] += g.p_max * total / capacity;
    const Eigen::VectorXd flow = c.ptdf() * inj;
    for (int l = 0; l < c.branch_count(); ++l) {
      const double base = std::abs(flow[l]) + 5.0;
      c.branches[l].capacity = u(rng) < 0.25 ? base * (0.6 + 0.3 * u(rng)) : base * 3.0;
    }
    c.renewable_series = Eigen::MatrixXd::Zero(1, ng);
    try {
      cm::ClearingOptions co;
      cm::ClearMarket(c, FuelBids(c, 0, 0.025), co);
      return c;
    } catch (const cm::Error&) {
      continue;
    }
  }
  throw std::runtime_error("could not draw a feasible random case");
}

}  // namespace cmtest
