#include "carbomarket/io/case_io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "carbomarket/common/error.hpp"
#include "carbomarket/common/units.hpp"
#include "carbomarket/io/csv.hpp"

namespace carbomarket::io {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Collects every schema problem with its field path before giving up.
class Schema {
 public:
  void Fail(const std::string& path, const std::string& rule) {
    errors_.push_back(path + ": " + rule);
  }
  bool ok() const { return errors_.empty(); }

  [[noreturn]] void Throw(const std::string& source) const {
    std::ostringstream msg;
    msg << source << ": " << errors_.size() << " schema error(s):";
    for (const auto& e : errors_) msg << " " << e << ";";
    ThrowData("E_SCHEMA", msg.str());
  }

  const json* Get(const json& obj, const std::string& path, const char* key,
                  bool required) {
    auto it = obj.find(key);
    if (it == obj.end() || (it->is_null() && required)) {
      if (required) Fail(Join(path, key), "required field is missing");
      return nullptr;
    }
    return &*it;
  }

  double Number(const json& obj, const std::string& path, const char* key,
                std::optional<double> fallback = std::nullopt) {
    const json* v = Get(obj, path, key, !fallback.has_value());
    if (!v) return fallback.value_or(std::numeric_limits<double>::quiet_NaN());
    if (!v->is_number()) {
      Fail(Join(path, key), "expected a number");
      return std::numeric_limits<double>::quiet_NaN();
    }
    return v->get<double>();
  }

  int Integer(const json& obj, const std::string& path, const char* key,
              std::optional<int> fallback = std::nullopt) {
    const json* v = Get(obj, path, key, !fallback.has_value());
    if (!v) return fallback.value_or(0);
    if (!v->is_number_integer()) {
      Fail(Join(path, key), "expected an integer");
      return 0;
    }
    return v->get<int>();
  }

  std::string String(const json& obj, const std::string& path, const char* key,
                     std::optional<std::string> fallback = std::nullopt) {
    const json* v = Get(obj, path, key, !fallback.has_value());
    if (!v) return fallback.value_or("");
    if (!v->is_string()) {
      Fail(Join(path, key), "expected a string");
      return "";
    }
    return v->get<std::string>();
  }

  bool Flag(const json& obj, const std::string& path, const char* key, bool fallback) {
    const json* v = Get(obj, path, key, false);
    if (!v) return fallback;
    if (!v->is_boolean()) {
      Fail(Join(path, key), "expected true or false");
      return fallback;
    }
    return v->get<bool>();
  }

  const json* Array(const json& obj, const std::string& path, const char* key,
                    bool required) {
    const json* v = Get(obj, path, key, required);
    if (v && !v->is_array()) {
      Fail(Join(path, key), "expected an array");
      return nullptr;
    }
    return v;
  }

  const json* Object(const json& obj, const std::string& path, const char* key,
                     bool required) {
    const json* v = Get(obj, path, key, required);
    if (v && !v->is_object()) {
      Fail(Join(path, key), "expected an object");
      return nullptr;
    }
    return v;
  }

  static std::string Join(const std::string& path, const char* key) {
    return path.empty() ? key : path + "." + key;
  }

 private:
  std::vector<std::string> errors_;
};

std::string Index(const char* list, std::size_t k) {
  return std::string(list) + "[" + std::to_string(k) + "]";
}

bool ValidName(const std::string& s) {
  if (s.empty()) return false;
  for (char ch : s) {
    const bool ok = std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' ||
                    ch == '-' || ch == '.';
    if (!ok) return false;
  }
  return true;
}

std::optional<PiecewiseLinearCurve> ReadSegments(const json& v, const std::string& path,
                                                 Schema& s) {
  if (!v.is_object()) {
    s.Fail(path, "expected an object with lo, hi and segments");
    return std::nullopt;
  }
  const double lo = s.Number(v, path, "lo");
  const double hi = s.Number(v, path, "hi");
  const json* segs = s.Array(v, path, "segments", true);
  if (!segs) return std::nullopt;
  std::vector<Segment> out;
  for (std::size_t k = 0; k < segs->size(); ++k) {
    const json& e = (*segs)[k];
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
      s.Fail(path + ".segments[" + std::to_string(k) + "]", "expected [slope, intercept]");
      return std::nullopt;
    }
    out.push_back({e[0].get<double>(), e[1].get<double>()});
  }
  if (out.empty() || !(lo <= hi)) {
    s.Fail(path, "needs at least one segment and lo <= hi");
    return std::nullopt;
  }
  return PiecewiseLinearCurve::FromSegments(out, lo, hi);
}

std::optional<PiecewiseLinearCurve> ReadPoints(const json& v, const std::string& path,
                                               Schema& s) {
  if (!v.is_array()) {
    s.Fail(path, "expected an array of [MW, value] pairs");
    return std::nullopt;
  }
  std::vector<CurvePoint> pts;
  for (std::size_t k = 0; k < v.size(); ++k) {
    const json& e = v[k];
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
      s.Fail(path + "[" + std::to_string(k) + "]", "expected [MW, value]");
      return std::nullopt;
    }
    pts.push_back({e[0].get<double>(), e[1].get<double>()});
  }
  try {
    return CurveFromPoints(pts);
  } catch (const Error& e) {
    s.Fail(path, e.what());
    return std::nullopt;
  }
}

int BusRef(const NetworkCase& c, const json& obj, const std::string& path, const char* key,
           Schema& s) {
  const int id = s.Integer(obj, path, key);
  const int idx = c.BusIndex(id);
  if (idx < 0 && s.ok()) s.Fail(Schema::Join(path, key), "unknown bus id " + std::to_string(id));
  return idx;
}

std::pair<int, int> LineColumn(const std::string& text, std::size_t byte) {
  int line = 1;
  int col = 1;
  const std::size_t end = std::min(byte == 0 ? 0 : byte - 1, text.size());
  for (std::size_t k = 0; k < end; ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

void ReadUnits(const json& root, Schema& s) {
  const json* u = s.Object(root, "", "units", true);
  if (!u) return;
  const std::pair<const char*, const char*> expected[] = {
      {"power", "MW"}, {"energy", "MWh"}, {"price", "$/kWh"}, {"emission", "kgCO2/kWh"}};
  for (const auto& [key, unit] : expected) {
    const std::string got = s.String(*u, "units", key);
    if (s.ok() && got != unit) {
      s.Fail(std::string("units.") + key, std::string("must be \"") + unit + "\", got \"" + got + "\"");
    }
  }
}

void ReadSeries(const json& root, const std::string& base_dir, CaseFile& out, Schema& s) {
  NetworkCase& c = out.network;
  const json* series = s.Object(root, "", "series", true);
  if (!series || !s.ok()) return;
  const std::string loads = s.String(*series, "series", "loads");
  const std::string ren = s.String(*series, "series", "renewables", "");
  if (!s.ok()) return;
  auto resolve = [&](const std::string& p) {
    return fs::path(p).is_absolute() ? p : (fs::path(base_dir) / p).string();
  };

  out.loads_path = resolve(loads);
  const CsvTable lt = ReadCsv(out.loads_path);
  const int periods = static_cast<int>(lt.rows.size());
  c.load_series = Eigen::MatrixXd::Zero(periods, c.bus_count());
  for (std::size_t k = 0; k < lt.header.size(); ++k) {
    const std::string& h = lt.header[k];
    if (h == "period") continue;
    int bus = -1;
    if (h.rfind("bus_", 0) == 0) {
      try {
        bus = c.BusIndex(std::stoi(h.substr(4)));
      } catch (const std::exception&) {
        bus = -1;
      }
    }
    if (bus < 0) {
      s.Fail("series.loads." + h, "column must be bus_<id> of an existing bus");
      continue;
    }
    for (int t = 0; t < periods; ++t) {
      c.load_series(t, bus) = ParseNumber(lt.rows[t][k], out.loads_path + " row " +
                                                             std::to_string(t + 1));
    }
  }

  c.renewable_series = Eigen::MatrixXd::Zero(periods, c.generators.size());
  bool any_renewable = false;
  for (const Generator& g : c.generators) any_renewable = any_renewable || g.is_renewable;
  if (ren.empty()) {
    if (any_renewable) s.Fail("series.renewables", "required when renewable plants exist");
    return;
  }
  out.renewables_path = resolve(ren);
  const CsvTable rt = ReadCsv(out.renewables_path);
  if (static_cast<int>(rt.rows.size()) != periods) {
    s.Fail("series.renewables", "has " + std::to_string(rt.rows.size()) +
                                    " rows but the load series has " + std::to_string(periods));
    return;
  }
  std::vector<bool> seen(c.generators.size(), false);
  for (std::size_t k = 0; k < rt.header.size(); ++k) {
    const std::string& h = rt.header[k];
    if (h == "period") continue;
    int g = -1;
    if (h.rfind("plant_", 0) == 0) {
      for (std::size_t j = 0; j < c.generators.size(); ++j) {
        if (c.generators[j].name == h.substr(6)) g = static_cast<int>(j);
      }
    }
    if (g < 0 || !c.generators[g].is_renewable) {
      s.Fail("series.renewables." + h, "column must be plant_<name> of a renewable plant");
      continue;
    }
    seen[g] = true;
    for (int t = 0; t < periods; ++t) {
      const double v = ParseNumber(rt.rows[t][k], out.renewables_path + " row " +
                                                      std::to_string(t + 1));
      if (v < 0.0 || v > c.generators[g].p_max) {
        s.Fail("series.renewables." + h + "[" + std::to_string(t) + "]",
               "availability must lie in [0, p_max]");
        break;
      }
      c.renewable_series(t, g) = v;
    }
  }
  for (std::size_t g = 0; g < c.generators.size(); ++g) {
    if (c.generators[g].is_renewable && !seen[g]) {
      s.Fail("series.renewables", "missing column plant_" + c.generators[g].name);
    }
  }
}

}  // namespace

CaseFile ParseCaseText(const std::string& text, const std::string& base_dir,
                       const std::string& source) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = LineColumn(text, e.byte);
    std::string what = e.what();
    const auto pos = what.find("parse error");
    if (pos != std::string::npos) what = what.substr(pos);
    ThrowData("E_PARSE", source + ":" + std::to_string(line) + ":" + std::to_string(col) +
                             ": " + what);
  }
  Schema s;
  if (!root.is_object()) {
    s.Fail("(root)", "expected a JSON object");
    s.Throw(source);
  }

  CaseFile out;
  NetworkCase& c = out.network;
  c.name = s.String(root, "", "name", fs::path(source).stem().string());
  ReadUnits(root, s);

  // Buses first: everything else refers to them by id.
  const json* buses = s.Array(root, "", "buses", true);
  std::vector<double> base;
  if (buses) {
    for (std::size_t k = 0; k < buses->size(); ++k) {
      const json& b = (*buses)[k];
      const std::string p = Index("buses", k);
      if (!b.is_object()) {
        s.Fail(p, "expected an object");
        continue;
      }
      Bus bus;
      bus.id = s.Integer(b, p, "id");
      bus.loss_sensitivity = s.Number(b, p, "loss", 0.0);
      if (b.contains("loss_injecting")) bus.loss_injecting = s.Number(b, p, "loss_injecting");
      if (b.contains("loss_consuming")) bus.loss_consuming = s.Number(b, p, "loss_consuming");
      base.push_back(s.Number(b, p, "base_load", 0.0));
      c.buses.push_back(bus);
    }
  }
  if (!s.ok()) s.Throw(source);
  out.base_load = Eigen::Map<Eigen::VectorXd>(base.data(), static_cast<Eigen::Index>(base.size()));

  const json* branches = s.Array(root, "", "branches", false);
  if (branches) {
    for (std::size_t k = 0; k < branches->size(); ++k) {
      const json& b = (*branches)[k];
      const std::string p = Index("branches", k);
      Branch br;
      br.from = BusRef(c, b, p, "from", s);
      br.to = BusRef(c, b, p, "to", s);
      br.reactance = s.Number(b, p, "x", 0.0);
      const json* cap = s.Get(b, p, "capacity", false);
      if (cap && !cap->is_null()) br.capacity = s.Number(b, p, "capacity");
      if (const json* row = s.Array(b, p, "ptdf", false)) {
        for (const json& v : *row) {
          if (!v.is_number()) {
            s.Fail(p + ".ptdf", "expected numbers");
            break;
          }
          br.ptdf_row.push_back(v.get<double>());
        }
      }
      c.branches.push_back(br);
    }
  }

  const json* gens = s.Array(root, "", "generators", true);
  if (gens) {
    for (std::size_t k = 0; k < gens->size(); ++k) {
      const json& g = (*gens)[k];
      const std::string p = Index("generators", k);
      const std::string name = s.String(g, p, "name");
      if (s.ok() && !ValidName(name)) {
        s.Fail(p + ".name", "use letters, digits, '_', '-' or '.'");
      }
      for (const Generator& other : c.generators) {
        if (other.name == name) s.Fail(p + ".name", "plant names must be unique");
      }
      const int bus = BusRef(c, g, p, "bus", s);
      const bool renewable = s.Flag(g, p, "renewable", false);
      const double p_max = s.Number(g, p, "p_max");
      const double p_min = s.Number(g, p, "p_min", 0.0);
      const double fuel = s.Number(g, p, "fuel", 0.0);
      const double psi = s.Number(g, p, "unit_emission", 0.0);
      Generator gen;
      gen.name = name;
      gen.bus = bus;
      gen.p_min = p_min;
      gen.p_max = p_max;
      // Bad bounds were already reported; only a well-formed domain gets curves.
      if (std::isfinite(p_min) && std::isfinite(p_max)) {
        try {
          gen = LinearGenerator(name, bus, fuel, psi, p_min, p_max);
        } catch (const Error& e) {
          s.Fail(p, e.what());
        }
      }
      gen.is_renewable = renewable;
      if (const json* v = s.Get(g, p, "fuel_points", false)) {
        if (auto curve = ReadPoints(*v, p + ".fuel_points", s)) gen.fuel_curve = *curve;
      }
      if (const json* v = s.Get(g, p, "emission_points", false)) {
        if (auto curve = ReadPoints(*v, p + ".emission_points", s)) gen.emission_curve = *curve;
      }
      if (const json* v = s.Get(g, p, "fuel_curve", false)) {
        if (auto curve = ReadSegments(*v, p + ".fuel_curve", s)) gen.fuel_curve = *curve;
      }
      if (const json* v = s.Get(g, p, "emission_curve", false)) {
        if (auto curve = ReadSegments(*v, p + ".emission_curve", s)) gen.emission_curve = *curve;
      }
      c.generators.push_back(gen);
    }
  }

  if (const json* stores = s.Array(root, "", "storages", false)) {
    for (std::size_t k = 0; k < stores->size(); ++k) {
      const json& u = (*stores)[k];
      const std::string p = Index("storages", k);
      StorageUnit st;
      st.name = s.String(u, p, "name");
      if (s.ok() && !ValidName(st.name)) {
        s.Fail(p + ".name", "use letters, digits, '_', '-' or '.'");
      }
      st.bus = BusRef(c, u, p, "bus", s);
      st.p_max = s.Number(u, p, "p_max");
      st.eta_c = s.Number(u, p, "eta_c");
      st.eta_d = s.Number(u, p, "eta_d");
      st.e_min = s.Number(u, p, "e_min");
      st.e_max = s.Number(u, p, "e_max");
      st.e_init = s.Number(u, p, "e_init");
      st.gamma_lo = s.Number(u, p, "gamma_lo");
      st.gamma_hi = s.Number(u, p, "gamma_hi");
      st.n_segments = s.Integer(u, p, "segments", 50);
      c.storages.push_back(st);
    }
  }

  if (const json* m = s.Object(root, "", "market", true)) {
    c.tau = s.Number(*m, "market", "tau", 1.0);
    c.kappa = s.Number(*m, "market", "kappa");
    c.epsilon = s.Number(*m, "market", "epsilon", 1e-4);
    c.delta = s.Number(*m, "market", "delta", 0.002);
    c.loss_offset = s.Number(*m, "market", "loss_offset", 0.0);
    c.iterate_loss_direction = s.Flag(*m, "market", "iterate_loss_direction", false);
    if (m->contains("slack_bus")) {
      c.slack_bus = BusRef(c, *m, "market", "slack_bus", s);
    }
  }
  if (const json* d = s.Object(root, "", "scenario", false)) {
    out.defaults.scenario = s.String(*d, "scenario", "name", "Proposed");
    out.defaults.horizon = s.Integer(*d, "scenario", "horizon", -1);
    const json* seed = s.Get(*d, "scenario", "seed", false);
    if (seed) {
      if (seed->is_number_unsigned() || (seed->is_number_integer() && seed->get<long long>() >= 0)) {
        out.defaults.seed = seed->get<std::uint64_t>();
      } else {
        s.Fail("scenario.seed", "expected a nonnegative integer");
      }
    }
  }
  if (!s.ok()) s.Throw(source);

  ReadSeries(root, base_dir, out, s);
  if (!s.ok()) s.Throw(source);

  for (const Violation& v : ValidateCase(c)) s.Fail(v.field, v.rule);
  if (!s.ok()) s.Throw(source);
  c.RefreshPtdf();
  return out;
}

CaseFile ReadCaseFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) ThrowData("E_IO", "cannot open case file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  const fs::path p(path);
  return ParseCaseText(ss.str(), p.has_parent_path() ? p.parent_path().string() : ".", path);
}

NetworkCase LoadCase(const std::string& path) { return ReadCaseFile(path).network; }

namespace {

ordered_json CurveJson(const PiecewiseLinearCurve& curve) {
  ordered_json segs = ordered_json::array();
  for (const Segment& s : curve.segments()) segs.push_back({s.slope, s.intercept});
  ordered_json out;
  out["lo"] = curve.lo();
  out["hi"] = curve.hi();
  out["segments"] = segs;
  return out;
}

}  // namespace

void WriteSeries(const NetworkCase& c, const std::string& loads_path,
                 const std::string& renewables_path) {
  CsvTable lt;
  lt.header.push_back("period");
  for (const Bus& b : c.buses) lt.header.push_back("bus_" + std::to_string(b.id));
  for (int t = 0; t < c.load_series.rows(); ++t) {
    std::vector<std::string> row{std::to_string(t)};
    for (int i = 0; i < c.bus_count(); ++i) row.push_back(FormatNumber(c.load_series(t, i)));
    lt.rows.push_back(std::move(row));
  }
  WriteCsv(loads_path, lt);

  CsvTable rt;
  rt.header.push_back("period");
  std::vector<int> cols;
  for (std::size_t g = 0; g < c.generators.size(); ++g) {
    if (!c.generators[g].is_renewable) continue;
    rt.header.push_back("plant_" + c.generators[g].name);
    cols.push_back(static_cast<int>(g));
  }
  for (int t = 0; t < c.load_series.rows(); ++t) {
    std::vector<std::string> row{std::to_string(t)};
    for (int g : cols) {
      const double v = c.renewable_series.rows() > t ? c.renewable_series(t, g) : 0.0;
      row.push_back(FormatNumber(v));
    }
    rt.rows.push_back(std::move(row));
  }
  WriteCsv(renewables_path, rt);
}

void SaveCase(const NetworkCase& c, const std::string& path,
              const ScenarioDefaults& defaults, const Eigen::VectorXd& base_load) {
  const fs::path p(path);
  const std::string stem = p.stem().string();
  const fs::path dir = p.has_parent_path() ? p.parent_path() : fs::path(".");
  const std::string loads = stem + ".loads.csv";
  const std::string ren = stem + ".renewables.csv";

  ordered_json root;
  root["name"] = c.name;
  root["units"] = {{"power", "MW"}, {"energy", "MWh"}, {"price", "$/kWh"},
                   {"emission", "kgCO2/kWh"}};
  ordered_json market;
  market["tau"] = c.tau;
  market["kappa"] = c.kappa;
  market["epsilon"] = c.epsilon;
  market["delta"] = c.delta;
  market["loss_offset"] = c.loss_offset;
  market["iterate_loss_direction"] = c.iterate_loss_direction;
  market["slack_bus"] = c.buses.at(c.slack_bus).id;
  root["market"] = market;

  ordered_json buses = ordered_json::array();
  for (int i = 0; i < c.bus_count(); ++i) {
    const Bus& b = c.buses[i];
    ordered_json j;
    j["id"] = b.id;
    j["loss"] = b.loss_sensitivity;
    if (b.loss_injecting) j["loss_injecting"] = *b.loss_injecting;
    if (b.loss_consuming) j["loss_consuming"] = *b.loss_consuming;
    if (base_load.size() == c.bus_count() && base_load[i] != 0.0) j["base_load"] = base_load[i];
    buses.push_back(j);
  }
  root["buses"] = buses;

  ordered_json branches = ordered_json::array();
  for (const Branch& br : c.branches) {
    ordered_json j;
    j["from"] = c.buses[br.from].id;
    j["to"] = c.buses[br.to].id;
    j["x"] = br.reactance;
    j["capacity"] = br.limited() ? ordered_json(br.capacity) : ordered_json(nullptr);
    if (!br.ptdf_row.empty()) j["ptdf"] = br.ptdf_row;
    branches.push_back(j);
  }
  root["branches"] = branches;

  ordered_json gens = ordered_json::array();
  for (const Generator& g : c.generators) {
    ordered_json j;
    j["name"] = g.name;
    j["bus"] = c.buses[g.bus].id;
    if (g.is_renewable) j["renewable"] = true;
    j["p_min"] = g.p_min;
    j["p_max"] = g.p_max;
    j["unit_emission"] = g.unit_emission;
    j["fuel_curve"] = CurveJson(g.fuel_curve);
    j["emission_curve"] = CurveJson(g.emission_curve);
    gens.push_back(j);
  }
  root["generators"] = gens;

  ordered_json stores = ordered_json::array();
  for (const StorageUnit& u : c.storages) {
    ordered_json j;
    j["name"] = u.name;
    j["bus"] = c.buses[u.bus].id;
    j["p_max"] = u.p_max;
    j["eta_c"] = u.eta_c;
    j["eta_d"] = u.eta_d;
    j["e_min"] = u.e_min;
    j["e_max"] = u.e_max;
    j["e_init"] = u.e_init;
    j["gamma_lo"] = u.gamma_lo;
    j["gamma_hi"] = u.gamma_hi;
    j["segments"] = u.n_segments;
    stores.push_back(j);
  }
  root["storages"] = stores;
  root["series"] = {{"loads", loads}, {"renewables", ren}};
  root["scenario"] = {{"name", defaults.scenario},
                      {"horizon", defaults.horizon},
                      {"seed", defaults.seed}};

  if (!dir.empty()) fs::create_directories(dir);
  std::ofstream out(path, std::ios::binary);
  if (!out) ThrowData("E_IO", "cannot write " + path);
  out << root.dump(2) << '\n';
  WriteSeries(c, (dir / loads).string(), (dir / ren).string());
}

}  // namespace carbomarket::io
