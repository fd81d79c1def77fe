#include "support/dc_flow_oracle.hpp"

namespace cmtest {

Eigen::VectorXd DcFlows(int bus_count, const std::vector<carbomarket::Branch>& branches,
                        int slack_bus, const Eigen::VectorXd& injection) {
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(bus_count, bus_count);
  for (const auto& br : branches) {
    const double y = 1.0 / br.reactance;
    b(br.from, br.from) += y;
    b(br.to, br.to) += y;
    b(br.from, br.to) -= y;
    b(br.to, br.from) -= y;
  }
  Eigen::VectorXd rhs = injection;
  // Balanced injections make one equation redundant; swap the slack's row
  // for theta_slack = 0.
  b.row(slack_bus).setZero();
  b(slack_bus, slack_bus) = 1.0;
  rhs[slack_bus] = 0.0;
  const Eigen::VectorXd theta = b.fullPivLu().solve(rhs);
  Eigen::VectorXd flows(branches.size());
  for (std::size_t l = 0; l < branches.size(); ++l) {
    flows[l] = (theta[branches[l].from] - theta[branches[l].to]) / branches[l].reactance;
  }
  return flows;
}

}  // namespace cmtest
