#include "carbomarket/network/network_case.hpp"

#include <algorithm>
#include <sstream>

#include "carbomarket/common/error.hpp"
#include "carbomarket/common/units.hpp"
#include "carbomarket/network/ptdf.hpp"

namespace carbomarket {

int NetworkCase::BusIndex(int id) const {
  for (int i = 0; i < bus_count(); ++i) {
    if (buses[i].id == id) return i;
  }
  return -1;
}

Eigen::VectorXd NetworkCase::Demand(int period) const {
  if (period < 0 || period >= horizon()) {
    ThrowData("E_PERIOD", "period " + std::to_string(period) +
                              " outside horizon of " + std::to_string(horizon()));
  }
  return load_series.row(period).transpose();
}

double NetworkCase::GeneratorPMax(int g, int period) const {
  const Generator& gen = generators[g];
  if (gen.is_renewable && renewable_series.rows() > period &&
      renewable_series.cols() > g) {
    return std::max(renewable_series(period, g), gen.p_min);
  }
  return gen.p_max;
}

double NetworkCase::GeneratorPMin(int g, int period) const {
  return std::min(generators[g].p_min, GeneratorPMax(g, period));
}

const Eigen::MatrixXd& NetworkCase::ptdf() const {
  if (!ptdf_ready_) BuildPtdf();
  return ptdf_;
}

void NetworkCase::RefreshPtdf() { BuildPtdf(); }

void NetworkCase::BuildPtdf() const {
  const int n = bus_count();
  ptdf_ = Eigen::MatrixXd::Zero(branch_count(), n);
  std::vector<Branch> physical;
  std::vector<int> rows;
  for (int l = 0; l < branch_count(); ++l) {
    const Branch& br = branches[l];
    if (static_cast<int>(br.ptdf_row.size()) == n) {
      ptdf_.row(l) = Eigen::Map<const Eigen::RowVectorXd>(br.ptdf_row.data(), n);
    } else {
      physical.push_back(br);
      rows.push_back(l);
    }
  }
  if (!physical.empty()) {
    const Eigen::MatrixXd t = ComputePtdf(n, physical, slack_bus);
    for (std::size_t k = 0; k < rows.size(); ++k) ptdf_.row(rows[k]) = t.row(k);
  }
  ptdf_ready_ = true;
}

std::vector<Violation> ValidateCase(const NetworkCase& c) {
  std::vector<Violation> out;
  auto add = [&out](std::string field, std::string rule) {
    out.push_back({std::move(field), std::move(rule)});
  };
  const int nb = c.bus_count();
  if (nb == 0) add("buses", "at least one bus is required");
  if (c.slack_bus < 0 || c.slack_bus >= nb) add("slack_bus", "must reference an existing bus");
  for (int i = 0; i < nb; ++i) {
    for (int k = i + 1; k < nb; ++k) {
      if (c.buses[i].id == c.buses[k].id) {
        add("buses[" + std::to_string(k) + "].id", "bus ids must be unique");
      }
    }
  }

  for (int l = 0; l < c.branch_count(); ++l) {
    const Branch& br = c.branches[l];
    const std::string f = "branches[" + std::to_string(l) + "]";
    if (br.from < 0 || br.from >= nb || br.to < 0 || br.to >= nb) {
      add(f, "branch must reference existing buses");
    } else if (br.from == br.to) {
      add(f, "branch endpoints must differ");
    }
    const bool explicit_row = static_cast<int>(br.ptdf_row.size()) == nb;
    if (!br.ptdf_row.empty() && !explicit_row) {
      add(f + ".ptdf", "explicit PTDF row must have one entry per bus");
    }
    if (!explicit_row && !(br.reactance > 0.0)) {
      add(f + ".reactance", "reactance must be positive unless a PTDF row is given");
    }
    if (!(br.capacity > 0.0)) add(f + ".capacity", "capacity must be positive");
  }

  for (std::size_t g = 0; g < c.generators.size(); ++g) {
    const Generator& gen = c.generators[g];
    const std::string f = "generators[" + std::to_string(g) + "]";
    if (gen.bus < 0 || gen.bus >= nb) add(f + ".bus", "must reference an existing bus");
    if (!(gen.p_min <= gen.p_max)) add(f, "p_min must not exceed p_max");
    if (gen.p_min < 0.0) add(f + ".p_min", "generator output must be nonnegative");
    const auto covers = [&](const PiecewiseLinearCurve& cv) {
      return cv.lo() <= gen.p_min + 1e-12 && cv.hi() >= gen.p_max - 1e-12;
    };
    if (!covers(gen.fuel_curve)) add(f + ".fuel", "curve domain must cover [p_min, p_max]");
    if (!covers(gen.emission_curve)) {
      add(f + ".emission", "curve domain must cover [p_min, p_max]");
    }
    const double lo = std::max(gen.p_min, gen.emission_curve.lo());
    const double hi = std::min(gen.p_max, gen.emission_curve.hi());
    if (lo <= hi) {
      bool negative = gen.emission_curve.Value(lo) < -1e-12 ||
                      gen.emission_curve.Value(hi) < -1e-12;
      for (double x : gen.emission_curve.Breakpoints()) {
        if (x > lo && x < hi && gen.emission_curve.Value(x) < -1e-12) negative = true;
      }
      if (negative) add(f + ".emission", "emission curve must be nonnegative on [p_min, p_max]");
    }
    if (gen.unit_emission < 0.0) add(f + ".unit_emission", "must be nonnegative");
    if (gen.is_renewable) {
      bool zero = gen.unit_emission == 0.0;
      for (const Segment& s : gen.emission_curve.segments()) {
        zero = zero && s.slope == 0.0 && s.intercept == 0.0;
      }
      if (!zero) add(f + ".emission", "renewable plants must have zero emission");
    }
  }

  for (std::size_t s = 0; s < c.storages.size(); ++s) {
    const StorageUnit& u = c.storages[s];
    const std::string f = "storages[" + std::to_string(s) + "]";
    if (u.bus < 0 || u.bus >= nb) add(f + ".bus", "must reference an existing bus");
    if (!(u.p_max > 0.0)) add(f + ".p_max", "must be positive");
    if (!(u.eta_c > 0.0 && u.eta_c <= 1.0)) add(f + ".eta_c", "must lie in (0, 1]");
    if (!(u.eta_d > 0.0 && u.eta_d <= 1.0)) add(f + ".eta_d", "must lie in (0, 1]");
    if (!(u.e_min < u.e_max)) add(f + ".e_min", "e_min must be below e_max");
    if (!(u.e_min <= u.e_init && u.e_init <= u.e_max)) {
      add(f + ".e_init", "initial energy must lie in [e_min, e_max]");
    }
    if (!(u.gamma_lo >= 0.0)) add(f + ".gamma_lo", "must be nonnegative");
    if (!(u.gamma_lo < u.gamma_hi * u.eta_c * u.eta_d)) {
      add(f + ".gamma_lo",
          "profitability assumption gamma_lo < gamma_hi*eta_c*eta_d is violated");
    }
    if (u.n_segments < 2) add(f + ".n_segments", "must be at least 2");
  }

  if (c.load_series.cols() != nb) {
    add("series.load", "needs one column per bus");
  }
  const bool any_renewable =
      std::any_of(c.generators.begin(), c.generators.end(),
                  [](const Generator& g) { return g.is_renewable; });
  if (any_renewable) {
    if (c.renewable_series.rows() != c.load_series.rows()) {
      add("series.renewable", "must share the load series horizon");
    } else if (c.renewable_series.cols() != static_cast<int>(c.generators.size())) {
      add("series.renewable", "needs one column per generator");
    }
  }
  if (!c.load_series.allFinite()) add("series.load", "values must be finite");
  if (!c.renewable_series.allFinite()) add("series.renewable", "values must be finite");
  if (!(c.tau > 0.0)) add("market.tau", "must be positive");
  if (!(c.kappa >= 0.0)) add("market.kappa", "must be nonnegative");
  if (!(c.epsilon > 0.0)) add("market.epsilon", "must be positive");
  if (!(c.delta > 0.0 && c.delta <= 1.0)) add("market.delta", "must lie in (0, 1]");
  return out;
}

void RequireValidCase(const NetworkCase& c) {
  const auto violations = ValidateCase(c);
  if (violations.empty()) return;
  std::ostringstream msg;
  msg << violations.size() << " violation(s):";
  for (const Violation& v : violations) msg << " " << v.field << ": " << v.rule << ";";
  ThrowData("E_CASE_INVALID", msg.str());
}

Generator LinearGenerator(std::string name, int bus, double fuel_per_kwh,
                          double unit_emission, double p_min, double p_max) {
  Generator g;
  g.name = std::move(name);
  g.bus = bus;
  g.fuel_curve =
      PiecewiseLinearCurve::Linear(fuel_per_kwh * kKwhPerMwh, 0.0, p_min, p_max);
  g.emission_curve =
      PiecewiseLinearCurve::Linear(unit_emission * kKwhPerMwh, 0.0, p_min, p_max);
  g.unit_emission = unit_emission;
  g.p_min = p_min;
  g.p_max = p_max;
  return g;
}

Generator RenewableGenerator(std::string name, int bus, double p_max) {
  Generator g = LinearGenerator(std::move(name), bus, 0.0, 0.0, 0.0, p_max);
  g.is_renewable = true;
  return g;
}

}  // namespace carbomarket
