#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "carbomarket/network/network_case.hpp"

namespace carbomarket::io {

struct SynthOptions {
  int periods = 672;
  // Per-bus base loads are scaled by a daily shape between these multiples.
  double load_trough = 0.75;
  double load_peak = 1.25;
  double load_noise = 0.03;  // relative, per period
  double cloudiness = 0.25;  // day-to-day PV attenuation spread
  double wind_mean = 0.45;   // capacity factor
  double wind_persistence = 0.92;
  double wind_spread = 0.12;
};

// Replaces the load and renewable series with `options.periods` hourly rows
// scaled from `base_load` (MW per bus) and the plant capacities.
// Plants whose name starts with "pv" follow a solar shape, other renewables a
// wind process. All draws come from one mt19937_64 seeded with `seed`.
void SynthesizeSeries(NetworkCase& c, const Eigen::VectorXd& base_load, std::uint64_t seed,
                      const SynthOptions& options = {});

}  // namespace carbomarket::io
