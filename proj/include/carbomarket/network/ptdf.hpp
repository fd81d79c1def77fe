#pragma once

#include <vector>

#include <Eigen/Dense>

#include "carbomarket/network/network_case.hpp"

namespace carbomarket {

// DC shift factors from reactances: T(l, i) is the flow on l (positive
// from -> to) per MW injected at bus i and withdrawn at the slack bus.
// Throws Error(kData) for disconnected graphs ("E_DISCONNECTED") and
// non-positive reactances ("E_REACTANCE").
Eigen::MatrixXd ComputePtdf(int bus_count, const std::vector<Branch>& branches,
                            int slack_bus);

}  // namespace carbomarket
