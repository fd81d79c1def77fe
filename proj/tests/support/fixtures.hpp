#pragma once

#include <random>
#include <vector>

#include "carbomarket/market/clearing_lp.hpp"
#include "carbomarket/network/network_case.hpp"

namespace cmtest {

namespace cm = carbomarket;

// One bus, the given generators, constant demand over `periods`.
cm::NetworkCase SingleBusCase(std::vector<cm::Generator> gens, double demand,
                              int periods = 1);

// Triangle 0-1-2 with equal reactances; bus 0 is the slack. A cheap generator
// at bus 0, an expensive one at bus 1, load at bus 2. Line 0-2 is limited to
// `limit` MW, so with load 120 MW it binds.
cm::NetworkCase ThreeBusCase(double load = 120.0, double limit = 50.0);

// Generator bids f = fuel + weight * emission, bounds from the case.
cm::BidSet FuelBids(const cm::NetworkCase& c, int period, double emission_weight = 0.0);

struct RandomCaseOptions {
  int min_buses = 3;
  int max_buses = 10;
  bool allow_pmin = true;
  bool piecewise = true;
};

// Connected random network with 2..5 thermal generators; feasibility of the
// first period is verified by a clearing solve (retrying with new draws).
cm::NetworkCase RandomCase(std::mt19937& rng, const RandomCaseOptions& opt = {});

}  // namespace cmtest
