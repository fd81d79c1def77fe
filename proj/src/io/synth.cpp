#include "carbomarket/io/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "carbomarket/common/error.hpp"

namespace carbomarket::io {

namespace {

// 0 at 04:00, 1 at 16:00.
double DailyShape(double hour) {
  return 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * (hour - 4.0) / 24.0);
}

double Solar(double hour) {
  if (hour <= 6.0 || hour >= 18.0) return 0.0;
  return std::sin(std::numbers::pi * (hour - 6.0) / 12.0);
}

}  // namespace

void SynthesizeSeries(NetworkCase& c, const Eigen::VectorXd& base_load, std::uint64_t seed,
                      const SynthOptions& o) {
  if (o.periods <= 0) {
    throw Error(ErrorKind::kUsage, "E_PERIODS", "synthesis needs a positive period count");
  }
  if (base_load.size() != c.bus_count()) {
    ThrowData("E_DIMENSION", "base load needs one entry per bus");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int ng = static_cast<int>(c.generators.size());
  c.load_series = Eigen::MatrixXd::Zero(o.periods, c.bus_count());
  c.renewable_series = Eigen::MatrixXd::Zero(o.periods, ng);

  std::vector<double> wind(ng, o.wind_mean);
  double cloud = 1.0;
  for (int t = 0; t < o.periods; ++t) {
    const double hours = t * c.tau;
    const double hour = std::fmod(hours, 24.0);
    const int day = static_cast<int>(hours / 24.0);
    if (t == 0 || std::fmod(hours, 24.0) < c.tau) {
      cloud = std::clamp(1.0 - o.cloudiness * std::abs(normal(rng)), 0.1, 1.0);
    }
    const double weekday = (day % 7 >= 5) ? 0.92 : 1.0;
    const double level =
        weekday * (o.load_trough + (o.load_peak - o.load_trough) * DailyShape(hour));
    const double common = 1.0 + o.load_noise * normal(rng);
    for (int i = 0; i < c.bus_count(); ++i) {
      const double local = 1.0 + 0.5 * o.load_noise * normal(rng);
      c.load_series(t, i) = std::max(0.0, base_load[i] * level * common * local);
    }
    for (int g = 0; g < ng; ++g) {
      const Generator& gen = c.generators[g];
      if (!gen.is_renewable) continue;
      double cf = 0.0;
      if (gen.name.rfind("pv", 0) == 0) {
        cf = Solar(hour) * cloud * (1.0 + 0.05 * normal(rng));
      } else {
        const double phi = o.wind_persistence;
        wind[g] = o.wind_mean + phi * (wind[g] - o.wind_mean) +
                  o.wind_spread * std::sqrt(1.0 - phi * phi) * normal(rng);
        wind[g] = std::clamp(wind[g], 0.0, 1.0);
        cf = wind[g];
      }
      c.renewable_series(t, g) = std::clamp(cf, 0.0, 1.0) * gen.p_max;
    }
  }
}

}  // namespace carbomarket::io
