#include "carbomarket/io/report_io.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>

#include <json.hpp>

#include "carbomarket/common/error.hpp"
#include "carbomarket/common/units.hpp"

#ifndef CARBOMARKET_VERSION
#define CARBOMARKET_VERSION "0.0.0"
#endif

namespace carbomarket::io {

namespace fs = std::filesystem;

const std::vector<std::string> kPeriodColumns = {
    "period",          "kind",
    "agent",           "bus",
    "power_mw",        "lmp_usd_per_mwh",
    "psi_usd_per_kwh", "soc_mwh",
    "revenue_usd",     "emission_charge_usd",
    "emission_kg",     "fuel_cost_usd_per_h",
    "emission_kg_per_h", "renewable_available_mw",
    "renewable_dispatched_mw", "cost_sharing_error",
    "settlement_residual", "feasible_start",
    "cef_psi_usd_per_kwh", "cef_emission_kg",
};

const std::vector<std::string> kTraceColumns = {
    "period", "interval", "y_start", "y_end", "basis_id", "bus", "gradient_usd_per_mw",
};

std::string LibraryVersion() { return CARBOMARKET_VERSION; }

namespace {

using Row = std::map<std::string, std::string>;

std::vector<std::string> Flatten(const Row& r) {
  std::vector<std::string> out;
  out.reserve(kPeriodColumns.size());
  for (const auto& col : kPeriodColumns) {
    auto it = r.find(col);
    out.push_back(it == r.end() ? "" : it->second);
  }
  return out;
}

std::string F(double v) { return FormatNumber(v); }

}  // namespace

CsvTable PeriodsTable(const NetworkCase& c, const SimulationReport& report) {
  CsvTable t;
  t.header = kPeriodColumns;
  const double tau = c.tau;
  for (const PeriodRecord& p : report.periods) {
    const std::string period = std::to_string(p.period);
    const bool cef = p.cef_psi.size() == c.bus_count();
    Row sys{{"period", period},
            {"kind", "system"},
            {"agent", "system"},
            {"power_mw", F(p.demand.sum())},
            {"lmp_usd_per_mwh", F(p.lambda_bar)},
            {"fuel_cost_usd_per_h", F(p.fuel_cost)},
            {"emission_kg_per_h", F(p.emission)},
            {"renewable_available_mw", F(p.renewable_available)},
            {"renewable_dispatched_mw", F(p.renewable_dispatched)},
            {"cost_sharing_error", F(p.cost_sharing_error)},
            {"settlement_residual", F(p.settlement.relative_imbalance())},
            {"feasible_start", p.feasible_start ? "1" : "0"}};
    t.rows.push_back(Flatten(sys));
    for (int i = 0; i < c.bus_count(); ++i) {
      if (p.demand[i] == 0.0) continue;
      Row r{{"period", period},
            {"kind", "load"},
            {"agent", "load_" + std::to_string(c.buses[i].id)},
            {"bus", std::to_string(c.buses[i].id)},
            {"power_mw", F(p.demand[i])},
            {"lmp_usd_per_mwh", F(p.lmp[i])},
            {"psi_usd_per_kwh", F(p.psi[i])},
            {"revenue_usd", F(-p.lmp[i] * p.demand[i] * tau)},
            {"emission_charge_usd", F(p.psi[i] * p.demand[i] * tau * kKwhPerMwh)}};
      if (cef) r["cef_psi_usd_per_kwh"] = F(p.cef_psi[i]);
      t.rows.push_back(Flatten(r));
    }
    for (std::size_t g = 0; g < c.generators.size(); ++g) {
      const int bus = c.generators[g].bus;
      Row r{{"period", period},
            {"kind", c.generators[g].is_renewable ? "renewable" : "generator"},
            {"agent", c.generators[g].name},
            {"bus", std::to_string(c.buses[bus].id)},
            {"power_mw", F(p.dispatch[g])},
            {"lmp_usd_per_mwh", F(p.lmp[bus])},
            {"revenue_usd", F(p.lmp[bus] * p.dispatch[g] * tau)}};
      t.rows.push_back(Flatten(r));
    }
    for (std::size_t s = 0; s < p.storages.size(); ++s) {
      const StorageUnit& u = c.storages[s];
      const StorageRecord& sr = p.storages[s];
      Row r{{"period", period},
            {"kind", "storage"},
            {"agent", u.name},
            {"bus", std::to_string(c.buses[u.bus].id)},
            {"power_mw", F(sr.power)},
            {"lmp_usd_per_mwh", F(p.lmp[u.bus])},
            {"psi_usd_per_kwh", F(p.psi[u.bus])},
            {"soc_mwh", F(sr.energy)},
            {"revenue_usd", F(sr.revenue)},
            {"emission_charge_usd", F(sr.allocated)},
            {"emission_kg", F(sr.emission)}};
      if (cef) {
        r["cef_psi_usd_per_kwh"] = F(p.cef_psi[u.bus]);
        r["cef_emission_kg"] = F(sr.cef_emission);
      }
      t.rows.push_back(Flatten(r));
    }
  }
  return t;
}

CsvTable TraceTable(const SimulationReport& report) {
  CsvTable t;
  t.header = kTraceColumns;
  for (const PeriodRecord& p : report.periods) {
    for (std::size_t k = 0; k < p.breakpoints.size(); ++k) {
      const Breakpoint& b = p.breakpoints[k];
      for (int i = 0; i < b.gradient.size(); ++i) {
        t.rows.push_back({std::to_string(p.period), std::to_string(k), F(b.y_start),
                          F(b.y_end), std::to_string(b.basis_id), std::to_string(i),
                          F(b.gradient[i])});
      }
    }
  }
  return t;
}

CsvTable SummaryTable(const NetworkCase& c, const std::vector<SimulationReport>& reports) {
  CsvTable t;
  t.header = {"scenario",
              "periods",
              "completed",
              "failed_period",
              "error_code",
              "avg_fuel_cost_usd_per_h",
              "avg_emission_kg_per_h",
              "curtailment_fraction",
              "max_cost_sharing_error",
              "mean_cost_sharing_error",
              "max_settlement_residual",
              "feasible_start_periods"};
  for (const StorageUnit& u : c.storages) {
    t.header.push_back("revenue_rate_usd_per_h_" + u.name);
    t.header.push_back("emission_rate_kg_per_h_" + u.name);
    t.header.push_back("cef_emission_rate_kg_per_h_" + u.name);
  }
  for (const SimulationReport& r : reports) {
    std::vector<std::string> row{r.config.name,
                                 std::to_string(r.periods.size()),
                                 r.completed ? "1" : "0",
                                 std::to_string(r.failed_period),
                                 r.error_code,
                                 F(r.avg_fuel_cost),
                                 F(r.avg_emission),
                                 F(r.curtailment),
                                 F(r.max_cost_sharing_error),
                                 F(r.mean_cost_sharing_error),
                                 F(r.max_settlement_imbalance),
                                 std::to_string(r.feasible_start_periods)};
    for (std::size_t s = 0; s < c.storages.size(); ++s) {
      if (s < r.storages.size()) {
        row.push_back(F(r.storages[s].revenue_rate));
        row.push_back(F(r.storages[s].emission_rate));
        row.push_back(F(r.storages[s].cef_emission_rate));
      } else {
        row.insert(row.end(), {"", "", ""});
      }
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

void WriteReportBundle(const std::string& dir, const NetworkCase& c,
                       const SimulationReport& report, const BundleMeta& meta) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) ThrowData("E_IO", "cannot create " + dir + ": " + ec.message());
  const fs::path d(dir);
  WriteCsv((d / "periods.csv").string(), PeriodsTable(c, report));
  WriteCsv((d / "summary.csv").string(), SummaryTable(c, {report}));
  WriteCsv((d / "trace.csv").string(), TraceTable(report));

  nlohmann::ordered_json m;
  m["version"] = LibraryVersion();
  m["case"] = c.name;
  m["case_path"] = meta.case_path;
  m["command"] = meta.command;
  m["seed"] = meta.seed;
  const ScenarioConfig& sc = report.config;
  nlohmann::ordered_json cfg;
  cfg["name"] = sc.name;
  cfg["enable_storage"] = sc.enable_storage;
  cfg["enable_allocation"] = sc.enable_allocation;
  cfg["kappa"] = sc.kappa_override.value_or(c.kappa);
  cfg["epsilon"] = sc.epsilon.value_or(c.epsilon);
  cfg["delta"] = sc.delta.value_or(c.delta);
  cfg["tau"] = c.tau;
  cfg["horizon"] = sc.horizon;
  cfg["seed"] = sc.seed;
  std::vector<std::string> strategies;
  for (StorageStrategy s : sc.strategy) strategies.emplace_back(StrategyName(s));
  cfg["strategy"] = strategies;
  cfg["v_multiplier"] = sc.v_multiplier;
  cfg["compute_cef"] = sc.compute_cef;
  m["config"] = cfg;
  m["completed"] = report.completed;
  if (!report.completed) {
    m["error"] = {{"code", report.error_code},
                  {"message", report.error_message},
                  {"period", report.failed_period}};
  }
  std::ofstream out(d / "meta.json", std::ios::binary);
  if (!out) ThrowData("E_IO", "cannot write meta.json in " + dir);
  out << m.dump(2) << '\n';
}

PeriodAggregates AggregatePeriods(const CsvTable& t, double tau) {
  PeriodAggregates a;
  const int kind = t.Column("kind");
  const int agent = t.Column("agent");
  const int fuel = t.Column("fuel_cost_usd_per_h");
  const int em = t.Column("emission_kg_per_h");
  const int avail = t.Column("renewable_available_mw");
  const int disp = t.Column("renewable_dispatched_mw");
  const int cse = t.Column("cost_sharing_error");
  const int rev = t.Column("revenue_usd");
  const int ekg = t.Column("emission_kg");
  if (std::min({kind, agent, fuel, em, avail, disp, cse, rev, ekg}) < 0) {
    ThrowData("E_CSV", "periods table lacks required columns");
  }
  double total_avail = 0.0;
  double total_lost = 0.0;
  std::vector<std::vector<double>> rev_cum, em_cum;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::string& k = t.rows[r][kind];
    if (k == "system") {
      ++a.periods;
      a.avg_fuel_cost += t.Number(r, fuel);
      a.avg_emission += t.Number(r, em);
      const double av = t.Number(r, avail);
      total_avail += av;
      total_lost += av - t.Number(r, disp);
      a.max_cost_sharing_error = std::max(a.max_cost_sharing_error, t.Number(r, cse));
    } else if (k == "storage") {
      const std::string& name = t.rows[r][agent];
      auto it = std::find(a.storage_names.begin(), a.storage_names.end(), name);
      std::size_t s = it - a.storage_names.begin();
      if (it == a.storage_names.end()) {
        a.storage_names.push_back(name);
        rev_cum.emplace_back();
        em_cum.emplace_back();
      }
      const double prev_r = rev_cum[s].empty() ? 0.0 : rev_cum[s].back();
      const double prev_e = em_cum[s].empty() ? 0.0 : em_cum[s].back();
      rev_cum[s].push_back(prev_r + t.Number(r, rev));
      em_cum[s].push_back(prev_e + t.Number(r, ekg));
    }
  }
  if (a.periods > 0) {
    a.avg_fuel_cost /= a.periods;
    a.avg_emission /= a.periods;
  }
  a.curtailment = total_avail > 0.0 ? std::clamp(total_lost / total_avail, 0.0, 1.0) : 0.0;
  auto rate = [&](const std::vector<double>& v) {
    return v.size() >= 2 ? FitRevenueRate(v, tau) : (v.empty() ? 0.0 : v[0] / tau);
  };
  for (std::size_t s = 0; s < a.storage_names.size(); ++s) {
    a.revenue_rate.push_back(rate(rev_cum[s]));
    a.emission_rate.push_back(rate(em_cum[s]));
  }
  return a;
}

}  // namespace carbomarket::io
