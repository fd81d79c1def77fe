#include "carbomarket/cef/cef.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "carbomarket/common/error.hpp"
#include "carbomarket/common/units.hpp"

namespace carbomarket {

double FlowGraph::ConservationError() const {
  Eigen::VectorXd net = generation - demand;
  for (const FlowEdge& e : edges) {
    net[e.from] -= e.p;
    net[e.to] += e.p;
  }
  return net.size() > 0 ? net.cwiseAbs().maxCoeff() : 0.0;
}

CefResult CefSolve(const FlowGraph& graph) {
  const int nb = graph.bus_count;
  const double err = graph.ConservationError();
  if (err > 1e-6) {
    ThrowData("E_CONSERVATION",
              "flow graph does not conserve power (mismatch " + std::to_string(err) +
                  " MW)");
  }
  // rho_i T_i - sum_{k->i} p_ki rho_k = r_i^G / 1000, T_i = p_i + inflow_i
  Eigen::VectorXd throughput = graph.generation;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(nb, nb);
  for (const FlowEdge& e : graph.edges) {
    throughput[e.to] += e.p;
    m(e.to, e.from) -= e.p;
  }
  CefResult out;
  Eigen::VectorXd rhs = graph.emission / kKwhPerMwh;
  for (int i = 0; i < nb; ++i) {
    if (throughput[i] <= 1e-12) {
      m.row(i).setZero();
      m(i, i) = 1.0;
      rhs[i] = 0.0;
      out.idle_buses.push_back(i);
    } else {
      m(i, i) += throughput[i];
    }
  }
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  if (!lu.isInvertible()) {
    ThrowNumeric("E_CEF_SINGULAR", "carbon flow intensity system is singular");
  }
  out.rho = lu.solve(rhs);
  if (!out.rho.allFinite()) {
    ThrowNumeric("E_CEF_SINGULAR", "carbon flow intensities are not finite");
  }
  out.load_emission =
      (out.rho.array() * graph.demand.array()).matrix() * kKwhPerMwh;
  return out;
}

FlowGraph FlowGraphFromClearing(const NetworkCase& c, const ClearingResult& r,
                                const Eigen::VectorXd& storage_intensity) {
  const int nb = c.bus_count();
  FlowGraph g;
  g.bus_count = nb;
  g.generation = Eigen::VectorXd::Zero(nb);
  g.emission = Eigen::VectorXd::Zero(nb);
  g.demand = r.demand;
  for (int k = 0; k < static_cast<int>(c.generators.size()); ++k) {
    g.generation[c.generators[k].bus] += r.dispatch[k];
    g.emission[c.generators[k].bus] += r.emission[k];
  }
  for (int s = 0; s < static_cast<int>(c.storages.size()); ++s) {
    const double p = r.storage_dispatch(s);
    const int bus = c.storages[s].bus;
    if (p > 0.0) {
      g.generation[bus] += p;
      g.emission[bus] += p * storage_intensity[s] * kKwhPerMwh;
    } else {
      g.demand[bus] -= p;
    }
  }
  for (int l = 0; l < c.branch_count(); ++l) {
    const double f = r.flows[l];
    const Branch& br = c.branches[l];
    if (f > 0.0) {
      g.edges.push_back({br.from, br.to, f});
    } else if (f < 0.0) {
      g.edges.push_back({br.to, br.from, -f});
    }
  }

  // What the network actually delivers to each bus.
  Eigen::VectorXd delivered = g.generation;
  for (const FlowEdge& e : g.edges) {
    delivered[e.from] -= e.p;
    delivered[e.to] += e.p;
  }
  // Flows come from the lossless PTDF model, so whatever the loss terms
  // leave unbalanced shows up at the bus that absorbs it; that bus's demand
  // takes it. Intensities depend only on throughput and are unaffected.
  for (int i = 0; i < nb; ++i) {
    if (delivered[i] >= 0.0) {
      g.demand[i] = delivered[i];
    } else {
      g.demand[i] = 0.0;
      g.generation[i] -= delivered[i];
    }
  }
  return g;
}

Eigen::VectorXd CefEmissionPrices(const Eigen::VectorXd& rho, double kappa) {
  return rho * (kappa / 2.0);
}

CefStorageStep CefStorageUpdate(const CefStorageState& state, double power,
                                double inflow_intensity, double tau, double eta_c,
                                double eta_d) {
  CefStorageStep out;
  out.state = state;
  const double grid_energy = std::abs(power) * tau;  // MWh
  if (power < 0.0) {
    const double mass = state.stored_intensity * state.stored_energy +
                        inflow_intensity * grid_energy;
    out.state.stored_energy = state.stored_energy + eta_c * grid_energy;
    out.state.stored_intensity =
        out.state.stored_energy > 0.0 ? mass / out.state.stored_energy : 0.0;
    out.attributed = inflow_intensity * grid_energy * kKwhPerMwh;
  } else if (power > 0.0) {
    const double drawn = grid_energy / eta_d;
    if (drawn > state.stored_energy + 1e-9) {
      ThrowData("E_CEF_EMPTY", "discharge of " + std::to_string(drawn) +
                                   " MWh exceeds stored " +
                                   std::to_string(state.stored_energy) + " MWh");
    }
    out.state.stored_energy = std::max(0.0, state.stored_energy - drawn);
    out.attributed = -state.stored_intensity * grid_energy * kKwhPerMwh;
  }
  return out;
}

}  // namespace carbomarket
