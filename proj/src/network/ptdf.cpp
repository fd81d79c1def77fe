#include "carbomarket/network/ptdf.hpp"

#include <queue>
#include <string>

#include "carbomarket/common/error.hpp"

namespace carbomarket {

Eigen::MatrixXd ComputePtdf(int bus_count, const std::vector<Branch>& branches,
                            int slack_bus) {
  if (slack_bus < 0 || slack_bus >= bus_count) {
    ThrowData("E_SLACK_BUS", "slack bus index " + std::to_string(slack_bus) +
                                 " is out of range");
  }
  std::vector<std::vector<int>> adjacency(bus_count);
  Eigen::MatrixXd bbus = Eigen::MatrixXd::Zero(bus_count, bus_count);
  for (std::size_t l = 0; l < branches.size(); ++l) {
    const Branch& br = branches[l];
    if (!(br.reactance > 0.0) || !std::isfinite(br.reactance)) {
      ThrowData("E_REACTANCE", "branch " + std::to_string(l) +
                                   " has non-positive reactance " +
                                   std::to_string(br.reactance));
    }
    const double b = 1.0 / br.reactance;
    bbus(br.from, br.from) += b;
    bbus(br.to, br.to) += b;
    bbus(br.from, br.to) -= b;
    bbus(br.to, br.from) -= b;
    adjacency[br.from].push_back(br.to);
    adjacency[br.to].push_back(br.from);
  }

  std::vector<bool> seen(bus_count, false);
  std::queue<int> frontier;
  frontier.push(slack_bus);
  seen[slack_bus] = true;
  int reached = 1;
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop();
    for (int v : adjacency[u]) {
      if (!seen[v]) {
        seen[v] = true;
        ++reached;
        frontier.push(v);
      }
    }
  }
  if (reached != bus_count) {
    ThrowData("E_DISCONNECTED", "network is disconnected: " +
                                    std::to_string(bus_count - reached) +
                                    " buses unreachable from the slack bus");
  }

  // Reduced susceptance matrix without the slack row/column.
  std::vector<int> keep;
  for (int i = 0; i < bus_count; ++i) {
    if (i != slack_bus) keep.push_back(i);
  }
  const int n = static_cast<int>(keep.size());
  Eigen::MatrixXd reduced(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) reduced(a, b) = bbus(keep[a], keep[b]);
  }
  Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(bus_count, bus_count);
  if (n > 0) {
    const Eigen::MatrixXd inv = reduced.ldlt().solve(Eigen::MatrixXd::Identity(n, n));
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) theta(keep[a], keep[b]) = inv(a, b);
    }
  }
  Eigen::MatrixXd t(branches.size(), bus_count);
  for (std::size_t l = 0; l < branches.size(); ++l) {
    const Branch& br = branches[l];
    t.row(l) = (theta.row(br.from) - theta.row(br.to)) / br.reactance;
  }
  return t;
}

}  // namespace carbomarket
