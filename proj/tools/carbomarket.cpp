// Command-line front end: clear, allocate, simulate, compare, cef, synthesize.

#include <cstdio>
#include <filesystem>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "carbomarket/cef/cef.hpp"
#include "carbomarket/common/error.hpp"
#include "carbomarket/io/case_io.hpp"
#include "carbomarket/io/csv.hpp"
#include "carbomarket/io/report_io.hpp"
#include "carbomarket/io/synth.hpp"
#include "carbomarket/sim/simulator.hpp"

namespace cm = carbomarket;
namespace io = carbomarket::io;

namespace {

struct Common {
  std::string case_path;
  std::string scenario;
  std::optional<double> delta;
  std::optional<double> epsilon;
  std::optional<double> kappa;
  std::optional<std::uint64_t> seed;
  int horizon = -1;
};

struct Loaded {
  io::CaseFile file;
  cm::ScenarioConfig config;
};

Loaded Prepare(const Common& o) {
  Loaded l{io::ReadCaseFile(o.case_path), {}};
  l.config = cm::ScenarioByName(o.scenario.empty() ? l.file.defaults.scenario : o.scenario);
  l.config.delta = o.delta;
  l.config.epsilon = o.epsilon;
  l.config.kappa_override = o.kappa;
  l.config.seed = o.seed.value_or(l.file.defaults.seed);
  l.config.horizon = o.horizon >= 0 ? o.horizon : l.file.defaults.horizon;
  return l;
}

void AddCommon(CLI::App* app, Common& o, bool scenario = true) {
  app->add_option("--case", o.case_path, "case file (JSON)")->required();
  if (scenario) app->add_option("--scenario", o.scenario, "Proposed, A1, A2 or A3");
  app->add_option("--delta", o.delta, "sweep step of the allocation");
  app->add_option("--epsilon", o.epsilon, "emission tie-break weight, $/kgCO2");
  app->add_option("--kappa", o.kappa, "carbon price, $/kgCO2");
  app->add_option("--seed", o.seed, "random seed recorded with the run");
}

std::string N(double v) { return io::FormatNumber(v); }

// Runs the scenario up to and including `period` and returns that record.
cm::PeriodRecord RunTo(const Loaded& l, int period, cm::ScenarioConfig config) {
  if (period < 0 || period >= l.file.network.horizon()) {
    throw cm::Error(cm::ErrorKind::kUsage, "E_PERIOD",
                    "period " + std::to_string(period) + " outside the series (0.." +
                        std::to_string(l.file.network.horizon() - 1) + ")");
  }
  config.horizon = period + 1;
  cm::Simulator sim(l.file.network, config);
  cm::PeriodRecord rec;
  while (sim.period() <= period) rec = sim.Step();
  return rec;
}

int Clear(const Common& o, int period) {
  const Loaded l = Prepare(o);
  const cm::NetworkCase& c = l.file.network;
  const cm::PeriodRecord r = RunTo(l, period, l.config);
  std::printf("period %d  lambda_bar %s $/MWh  fuel %s $/h  emission %s kgCO2/h\n", r.period,
              N(r.lambda_bar).c_str(), N(r.fuel_cost).c_str(), N(r.emission).c_str());
  std::printf("agent,bus,power_mw\n");
  for (std::size_t g = 0; g < c.generators.size(); ++g) {
    std::printf("%s,%d,%s\n", c.generators[g].name.c_str(), c.buses[c.generators[g].bus].id,
                N(r.dispatch[g]).c_str());
  }
  for (std::size_t s = 0; s < r.storages.size(); ++s) {
    std::printf("%s,%d,%s\n", c.storages[s].name.c_str(), c.buses[c.storages[s].bus].id,
                N(r.storages[s].power).c_str());
  }
  std::printf("bus,demand_mw,lmp_usd_per_mwh\n");
  for (int i = 0; i < c.bus_count(); ++i) {
    std::printf("%d,%s,%s\n", c.buses[i].id, N(r.demand[i]).c_str(), N(r.lmp[i]).c_str());
  }
  return 0;
}

int Allocate(const Common& o, int period) {
  Loaded l = Prepare(o);
  l.config.enable_allocation = true;
  const cm::NetworkCase& c = l.file.network;
  const cm::PeriodRecord r = RunTo(l, period, l.config);
  std::printf("period %d  intervals %d  cost_sharing_error %s%s\n", r.period,
              r.sweep_iterations, N(r.cost_sharing_error).c_str(),
              r.feasible_start ? "  feasible_start" : "");
  std::printf("bus,psi_usd_per_kwh\n");
  for (int i = 0; i < c.bus_count(); ++i) {
    std::printf("%d,%s\n", c.buses[i].id, N(r.psi[i]).c_str());
  }
  std::printf("interval,y_start,y_end,basis_id\n");
  for (std::size_t k = 0; k < r.breakpoints.size(); ++k) {
    const auto& b = r.breakpoints[k];
    std::printf("%zu,%s,%s,%llu\n", k, N(b.y_start).c_str(), N(b.y_end).c_str(),
                static_cast<unsigned long long>(b.basis_id));
  }
  return 0;
}

// Recorded combined prices ($/kWh): one column per storage name.
std::vector<std::vector<double>> ReadReplayPrices(const std::string& path,
                                                  const cm::NetworkCase& c) {
  const io::CsvTable t = io::ReadCsv(path);
  std::vector<std::vector<double>> out;
  for (const cm::StorageUnit& u : c.storages) {
    const int col = t.Column(u.name);
    std::vector<double> g;
    if (col >= 0) {
      for (std::size_t r = 0; r < t.rows.size(); ++r) g.push_back(t.Number(r, col));
    }
    out.push_back(std::move(g));
  }
  return out;
}

int Simulate(const Common& o, const std::string& out, const std::vector<std::string>& strategy,
             const std::vector<double>& v_multiplier, bool cef,
             const std::string& replay_prices) {
  Loaded l = Prepare(o);
  const cm::NetworkCase& c = l.file.network;
  for (const std::string& s : strategy) l.config.strategy.push_back(cm::ParseStrategy(s));
  if (!replay_prices.empty()) l.config.replay_prices = ReadReplayPrices(replay_prices, c);
  l.config.v_multiplier = v_multiplier;
  l.config.compute_cef = cef;
  const cm::SimulationReport rep = cm::RunHorizon(c, l.config);
  std::printf("%s: %zu periods, avg fuel cost %s $/h, avg emission %s kgCO2/h, curtailment %s\n",
              rep.config.name.c_str(), rep.periods.size(), N(rep.avg_fuel_cost).c_str(),
              N(rep.avg_emission).c_str(), N(rep.curtailment).c_str());
  for (const auto& s : rep.storages) {
    std::printf("  %s revenue rate %s $/h, emission rate %s kgCO2/h\n", s.name.c_str(),
                N(s.revenue_rate).c_str(), N(s.emission_rate).c_str());
  }
  if (!out.empty()) {
    io::BundleMeta meta{o.case_path, l.config.seed, "simulate"};
    cm::NetworkCase shown = c;
    if (!l.config.enable_storage) shown.storages.clear();
    io::WriteReportBundle(out, shown, rep, meta);
    std::printf("wrote %s\n", out.c_str());
  }
  if (!rep.completed) {
    throw cm::Error(rep.error_kind, rep.error_code, rep.error_message);
  }
  return 0;
}

int Compare(const Common& o, const std::string& out) {
  const Loaded base = Prepare(o);
  const cm::NetworkCase& c = base.file.network;
  std::vector<std::future<cm::SimulationReport>> jobs;
  for (cm::ScenarioConfig sc : cm::ScenarioMatrix()) {
    sc.delta = base.config.delta;
    sc.epsilon = base.config.epsilon;
    sc.kappa_override = base.config.kappa_override;
    sc.seed = base.config.seed;
    sc.horizon = base.config.horizon;
    jobs.push_back(std::async(std::launch::async, [&c, sc] { return cm::RunHorizon(c, sc); }));
  }
  std::vector<cm::SimulationReport> reports;
  for (auto& j : jobs) reports.push_back(j.get());

  std::printf("%-9s %16s %20s %14s\n", "scenario", "cost ($/h)", "emission (kgCO2/h)",
              "curtailment");
  for (const auto& r : reports) {
    std::printf("%-9s %16.2f %20.2f %13.2f%%%s\n", r.config.name.c_str(), r.avg_fuel_cost,
                r.avg_emission, 100.0 * r.curtailment, r.completed ? "" : "  (incomplete)");
  }

  // Storage strategies evaluated on the proposed run's price path.
  const cm::SimulationReport& prop = reports.front();
  io::CsvTable baselines;
  baselines.header = {"storage", "in_market", "proposed", "B1", "B2", "B3"};
  if (!prop.storages.empty()) {
    std::printf("\nrevenue rate ($/h) on the proposed price path\n");
    std::printf("%-10s %10s %10s %10s %10s %10s\n", "storage", "in-market", "proposed", "B1",
                "B2", "B3");
  }
  for (std::size_t s = 0; s < prop.storages.size(); ++s) {
    std::vector<double> gamma;
    for (const auto& p : prop.periods) gamma.push_back(p.storages[s].gamma);
    std::vector<std::string> row{c.storages[s].name, N(prop.storages[s].revenue_rate)};
    std::printf("%-10s %10.3f", c.storages[s].name.c_str(), prop.storages[s].revenue_rate);
    for (auto st : {cm::StorageStrategy::kProposed, cm::StorageStrategy::kB1,
                    cm::StorageStrategy::kB2,
                    cm::StorageStrategy::kB3Replay}) {
      double rate = std::numeric_limits<double>::quiet_NaN();
      try {
        rate = cm::ReplayStrategy(c.storages[s], gamma, st, c.tau).revenue_rate;
      } catch (const cm::Error& e) {
        std::fprintf(stderr, "note: %s for %s: %s\n", std::string(cm::StrategyName(st)).c_str(),
                     c.storages[s].name.c_str(), e.what());
      }
      row.push_back(N(rate));
      std::printf(" %10.3f", rate);
    }
    std::printf("\n");
    baselines.rows.push_back(row);
  }
  if (!out.empty()) {
    std::filesystem::create_directories(out);
    io::WriteCsv((std::filesystem::path(out) / "summary.csv").string(),
                 io::SummaryTable(c, reports));
    io::WriteCsv((std::filesystem::path(out) / "baselines.csv").string(), baselines);
    std::printf("wrote %s\n", out.c_str());
  }
  for (const auto& r : reports) {
    if (!r.completed) throw cm::Error(r.error_kind, r.error_code, r.config.name + ": " + r.error_message);
  }
  return 0;
}

int Cef(const Common& o, int period) {
  Loaded l = Prepare(o);
  l.config.compute_cef = true;
  const cm::NetworkCase& c = l.file.network;
  const cm::PeriodRecord r = RunTo(l, period, l.config);
  const double kappa = l.config.kappa_override.value_or(c.kappa);
  std::printf("bus,rho_kg_per_kwh,cef_psi_usd_per_kwh,as_psi_usd_per_kwh\n");
  for (int i = 0; i < c.bus_count(); ++i) {
    const double psi = r.cef_psi[i];
    std::printf("%d,%s,%s,%s\n", c.buses[i].id, N(kappa > 0 ? 2 * psi / kappa : 0.0).c_str(),
                N(psi).c_str(), N(r.psi[i]).c_str());
  }
  return 0;
}

int Synthesize(const std::string& case_path, std::uint64_t seed, int periods) {
  io::CaseFile f = io::ReadCaseFile(case_path);
  if (f.base_load.size() == 0 || f.base_load.isZero()) {
    cm::ThrowData("E_SCHEMA", case_path + ": buses carry no base_load to scale");
  }
  io::SynthOptions opt;
  opt.periods = periods;
  io::SynthesizeSeries(f.network, f.base_load, seed, opt);
  std::string ren = f.renewables_path;
  if (ren.empty()) ren = f.loads_path + ".renewables.csv";
  io::WriteSeries(f.network, f.loads_path, ren);
  std::printf("wrote %d periods to %s and %s (seed %llu)\n", periods, f.loads_path.c_str(),
              ren.c_str(), static_cast<unsigned long long>(seed));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Electricity market clearing with carbon emission allocation and storage"};
  app.require_subcommand(1);

  Common o;
  int period = 0;
  std::string out;
  std::vector<std::string> strategy;
  std::vector<double> v_multiplier;
  bool cef = false;
  std::string replay_prices;
  std::uint64_t synth_seed = 1;
  int synth_periods = 672;

  auto* clear = app.add_subcommand("clear", "clear one period and print dispatch and LMPs");
  AddCommon(clear, o);
  clear->add_option("--period", period, "period index")->default_val(0);

  auto* allocate = app.add_subcommand("allocate", "print emission prices for one period");
  AddCommon(allocate, o);
  allocate->add_option("--period", period, "period index")->default_val(0);

  auto* simulate = app.add_subcommand("simulate", "run the horizon and write a report bundle");
  AddCommon(simulate, o);
  simulate->add_option("--out", out, "output directory");
  simulate->add_option("--horizon", o.horizon, "number of periods");
  simulate->add_option("--strategy", strategy, "per-storage: proposed, B1, B2 or B3-replay")->delimiter(',');
  simulate->add_option("--v-multiplier", v_multiplier, "per-storage multiple of V_s")->delimiter(',');
  simulate->add_flag("--cef", cef, "also compute carbon emission flow prices");
  simulate->add_option("--replay-prices", replay_prices,
                       "CSV of recorded $/kWh prices, one column per storage (B3-replay)");

  auto* compare = app.add_subcommand("compare", "run Proposed, A1, A2 and A3");
  AddCommon(compare, o, false);
  compare->add_option("--out", out, "output directory for summary.csv and baselines.csv");
  compare->add_option("--horizon", o.horizon, "number of periods");

  auto* cefcmd = app.add_subcommand("cef", "carbon emission flow prices for one period");
  AddCommon(cefcmd, o);
  cefcmd->add_option("--period", period, "period index")->default_val(0);

  auto* synth = app.add_subcommand("synthesize", "regenerate the case's series sidecars");
  synth->add_option("--case", o.case_path, "case file (JSON)")->required();
  synth->add_option("--seed", synth_seed, "random seed")->default_val(1);
  synth->add_option("--periods", synth_periods, "number of periods")->default_val(672);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error E_USAGE: " << e.what() << "\n";
    return static_cast<int>(cm::ErrorKind::kUsage);
  }

  try {
    if (*clear) return Clear(o, period);
    if (*allocate) return Allocate(o, period);
    if (*simulate) return Simulate(o, out, strategy, v_multiplier, cef, replay_prices);
    if (*compare) return Compare(o, out);
    if (*cefcmd) return Cef(o, period);
    if (*synth) return Synthesize(o.case_path, synth_seed, synth_periods);
  } catch (const cm::Error& e) {
    std::cerr << "error " << e.code() << ": " << e.what() << "\n";
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error E_INTERNAL: " << e.what() << "\n";
    return static_cast<int>(cm::ErrorKind::kNumeric);
  }
  return 0;
}
