#include "carbomarket/market/clearing_lp.hpp"

#include <string>

#include "carbomarket/common/error.hpp"

namespace carbomarket {

Eigen::VectorXd StaticLoss(const NetworkCase& c) {
  Eigen::VectorXd loss(c.bus_count());
  for (int i = 0; i < c.bus_count(); ++i) loss[i] = c.buses[i].loss_sensitivity;
  return loss;
}

ClearingLp AssembleClearingLp(const NetworkCase& c, const BidSet& bids,
                              const ClearingLpOptions& options) {
  const int nb = c.bus_count();
  const int ng = static_cast<int>(c.generators.size());
  if (static_cast<int>(bids.generators.size()) != ng ||
      bids.storages.size() != c.storages.size() || bids.demand.size() != nb) {
    ThrowData("E_DIMENSION",
              "bid set has " + std::to_string(bids.generators.size()) +
                  " generators, " + std::to_string(bids.storages.size()) +
                  " storages and " + std::to_string(bids.demand.size()) +
                  " demands for a case with " + std::to_string(ng) + ", " +
                  std::to_string(c.storages.size()) + " and " + std::to_string(nb));
  }
  const Eigen::VectorXd loss =
      options.loss.size() == nb ? options.loss : StaticLoss(c);
  const Eigen::MatrixXd& t = c.ptdf();
  const int na = bids.agent_count();

  lp::LpBuilder b;
  std::vector<int> agent_bus(na);
  std::vector<int> p_var(na), f_var(na), sigma_var(na, -1);
  std::vector<double> p_off(na), f_off(na), sigma_off(na, 0.0);

  // Rows that depend on demand are collected with their G rows; all other rows
  // have a zero G row.
  std::vector<std::pair<int, Eigen::RowVectorXd>> g_rows;

  for (int a = 0; a < na; ++a) {
    const AgentBid& bid = bids.agent(a);
    if (!(bid.p_min <= bid.p_max)) {
      ThrowData("E_BID_BOUNDS", "agent " + std::to_string(a) + " has p_min " +
                                    std::to_string(bid.p_min) + " > p_max " +
                                    std::to_string(bid.p_max));
    }
    agent_bus[a] = a < ng ? c.generators[a].bus : c.storages[a - ng].bus;
    p_off[a] = bid.p_min;
    p_var[a] = b.AddVariable(0.0);
    // p' <= p_max - p_min
    const int ub = b.AddRow(bid.p_max - bid.p_min);
    b.Set(ub, p_var[a], 1.0);
    b.AddSlack(ub, 1.0);

    const PiecewiseLinearCurve cost = bid.cost.WithDomain(bid.p_min, bid.p_max);
    f_off[a] = cost.MinValue();
    f_var[a] = b.AddVariable(1.0);
    for (const Segment& s : cost.segments()) {
      // f' - alpha p' - surplus = alpha p_min + beta - f_min
      const int r = b.AddRow(s.slope * bid.p_min + s.intercept - f_off[a]);
      b.Set(r, f_var[a], 1.0);
      b.Set(r, p_var[a], -s.slope);
      b.AddSlack(r, -1.0);
    }

    if (a < ng && !c.generators[a].is_renewable) {
      const PiecewiseLinearCurve em =
          c.generators[a].emission_curve.WithDomain(bid.p_min, bid.p_max);
      sigma_off[a] = em.MinValue();
      sigma_var[a] = b.AddVariable(options.epsilon);
      for (const Segment& s : em.segments()) {
        const int r = b.AddRow(s.slope * bid.p_min + s.intercept - sigma_off[a]);
        b.Set(r, sigma_var[a], 1.0);
        b.Set(r, p_var[a], -s.slope);
        b.AddSlack(r, -1.0);
      }
    }
  }

  // Power balance: sum (1-L) p = sum (1-L) D + L0.
  const int bal = b.AddRow(0.0);
  double bal_h = c.loss_offset;
  for (int a = 0; a < na; ++a) {
    const double w = 1.0 - loss[agent_bus[a]];
    b.Set(bal, p_var[a], w);
    bal_h -= w * p_off[a];
  }
  b.SetRhs(bal, bal_h);
  g_rows.emplace_back(bal, (Eigen::VectorXd::Ones(nb) - loss).transpose());

  std::vector<int> upper(c.branch_count(), -1), lower(c.branch_count(), -1);
  for (int l = 0; l < c.branch_count(); ++l) {
    const Branch& br = c.branches[l];
    if (!br.limited()) continue;
    double shift = 0.0;
    for (int a = 0; a < na; ++a) shift += t(l, agent_bus[a]) * p_off[a];
    // sum T p' + s = F + T D - T p_min
    upper[l] = b.AddRow(br.capacity - shift);
    // sum T p' - s = -F + T D - T p_min
    lower[l] = b.AddRow(-br.capacity - shift);
    for (int a = 0; a < na; ++a) {
      const double coef = t(l, agent_bus[a]);
      b.Set(upper[l], p_var[a], coef);
      b.Set(lower[l], p_var[a], coef);
    }
    b.AddSlack(upper[l], 1.0);
    b.AddSlack(lower[l], -1.0);
    g_rows.emplace_back(upper[l], t.row(l));
    g_rows.emplace_back(lower[l], t.row(l));
  }

  const Eigen::VectorXd h = b.Rhs();
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(b.row_count(), nb);
  for (const auto& [row, coeffs] : g_rows) g.row(row) = coeffs;
  const Eigen::VectorXd rhs = g * bids.demand + h;

  return ClearingLp{lp::LpProblem(b.Cost(), b.BuildMatrix(), rhs),
                    std::move(g),
                    h,
                    std::move(agent_bus),
                    std::move(p_var),
                    std::move(p_off),
                    std::move(f_var),
                    std::move(f_off),
                    std::move(sigma_var),
                    std::move(sigma_off),
                    bal,
                    std::move(upper),
                    std::move(lower)};
}

}  // namespace carbomarket
