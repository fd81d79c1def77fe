#pragma once

#include <cstdint>
#include <string>

#include "carbomarket/network/network_case.hpp"

namespace carbomarket::io {

// Optional defaults carried by a case file's "scenario" block.
struct ScenarioDefaults {
  std::string scenario = "Proposed";
  int horizon = -1;
  std::uint64_t seed = 0;
};

struct CaseFile {
  NetworkCase network;
  ScenarioDefaults defaults;
  Eigen::VectorXd base_load;  // MW per bus, for series synthesis; zeros if absent
  std::string loads_path;     // resolved sidecar paths
  std::string renewables_path;
};

// Reads a JSON case file and its sidecar series. Errors:
//   E_IO      file missing or unreadable (kData)
//   E_PARSE   malformed JSON, message carries line:column (kData)
//   E_SCHEMA  missing/mistyped fields or violated invariants, every problem
//             listed with its field path (kData)
CaseFile ReadCaseFile(const std::string& path);
NetworkCase LoadCase(const std::string& path);

// `base_dir` resolves relative series paths; `source` names the text in errors.
CaseFile ParseCaseText(const std::string& text, const std::string& base_dir,
                       const std::string& source);

// Writes `path` plus <stem>.loads.csv and <stem>.renewables.csv beside it.
// Curves are stored as exact segments so ReadCaseFile reproduces the case.
void SaveCase(const NetworkCase& c, const std::string& path,
              const ScenarioDefaults& defaults = {},
              const Eigen::VectorXd& base_load = {});

// Writes the two series sidecars.
void WriteSeries(const NetworkCase& c, const std::string& loads_path,
                 const std::string& renewables_path);

}  // namespace carbomarket::io
