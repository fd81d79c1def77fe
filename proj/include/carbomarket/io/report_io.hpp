#pragma once

#include <string>
#include <vector>

#include "carbomarket/io/csv.hpp"
#include "carbomarket/network/network_case.hpp"
#include "carbomarket/sim/simulator.hpp"

namespace carbomarket::io {

extern const std::vector<std::string> kPeriodColumns;
extern const std::vector<std::string> kTraceColumns;

CsvTable PeriodsTable(const NetworkCase& c, const SimulationReport& report);
CsvTable TraceTable(const SimulationReport& report);
// One row per report; storage columns follow the case's storage names.
CsvTable SummaryTable(const NetworkCase& c, const std::vector<SimulationReport>& reports);

struct BundleMeta {
  std::string case_path;
  std::uint64_t seed = 0;
  std::string command;
};

// Writes periods.csv, summary.csv, trace.csv and meta.json into `dir`
// (created if needed).
void WriteReportBundle(const std::string& dir, const NetworkCase& c,
                       const SimulationReport& report, const BundleMeta& meta);

// The summary metrics recomputed from a periods table alone.
struct PeriodAggregates {
  int periods = 0;
  double avg_fuel_cost = 0.0;
  double avg_emission = 0.0;
  double curtailment = 0.0;
  double max_cost_sharing_error = 0.0;
  std::vector<std::string> storage_names;
  std::vector<double> revenue_rate;
  std::vector<double> emission_rate;
};
PeriodAggregates AggregatePeriods(const CsvTable& periods, double tau);

std::string LibraryVersion();

}  // namespace carbomarket::io
