#pragma once

// Experiment descriptions (flat INI files), their evaluation, and the CSV /
// JSON artifacts the CLI writes. configs/ holds a ready-made description for
// each standard study.

#include <boost/math/special_functions/gamma.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <boost/version.hpp>
#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"  // vendored nlohmann/json

#include "hybridnet/coverage.hpp"
#include "hybridnet/error.hpp"
#include "hybridnet/interference.hpp"
#include "hybridnet/model.hpp"
#include "hybridnet/montecarlo.hpp"
#include "hybridnet/signal.hpp"

namespace hybridnet::experiment {

inline constexpr const char* kVersion = "1.0.0";

/// Output could not be written (or the config could not be read).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Kind {
  SignalCdf,
  InterferenceCdf,
  CoverageCurve,
  MeanPowers,
  ThroughputVsLambdaI,
  ThroughputVsZeta,
  ThroughputVsCost,
  OptimalZetaSweep,
};

struct KindInfo {
  Kind kind;
  const char* name;
  const char* what;
  const char* sweep;  // default sweep variable; "" = no sweep
};

inline const std::vector<KindInfo>& kinds() {
  static const std::vector<KindInfo> k{
      {Kind::SignalCdf, "signal_cdf", "cdf of the signal power given (l0, d0): matched Gamma vs simulation", ""},
      {Kind::InterferenceCdf, "interference_cdf", "cdf of the interference power given (l0, d0): inverse Laplace vs simulation", ""},
      {Kind::CoverageCurve, "coverage_curve", "coverage probability vs SINR threshold", "threshold_dB"},
      {Kind::MeanPowers, "mean_powers", "unconditional mean signal and interference power", "lambda_I"},
      {Kind::ThroughputVsLambdaI, "throughput_vs_lambdaI", "spatial throughput vs IRS density", "lambda_I"},
      {Kind::ThroughputVsZeta, "throughput_vs_zeta", "spatial throughput vs IRS/BS density ratio at fixed cost", "zeta"},
      {Kind::ThroughputVsCost, "throughput_vs_cost", "spatial throughput vs total cost at fixed density ratio", "C"},
      {Kind::OptimalZetaSweep, "optimal_zeta_sweep", "optimal density ratio and throughput vs a swept parameter", "C"},
  };
  return k;
}

inline const KindInfo& kind_info(Kind k) {
  for (const auto& i : kinds())
    if (i.kind == k) return i;
  throw ConfigError("unknown experiment kind");
}

// --- keys ------------------------------------------------------------------------

struct KeyDoc {
  const char* section;
  const char* key;
  const char* fallback;
  const char* doc;
};

/// Scenario keys, accepted in [params], in every [cases] entry and as the
/// sweep variable. Densities and costs accept a `lambda0` suffix (`10*lambda0`).
inline const std::vector<KeyDoc>& scenario_keys() {
  static const std::vector<KeyDoc> k{
      {"params", "lambda_B", "10*lambda0", "BS density (m^-2); ignored when C is set"},
      {"params", "lambda_I", "0", "IRS density (m^-2); ignored when C or Q is set"},
      {"params", "Q", "-", "IRS elements per m^2; sets lambda_I = Q / N"},
      {"params", "p", "0.5", "loading factor"},
      {"params", "N", "2000", "elements per IRS"},
      {"params", "H_B", "20", "BS height above the UE (m)"},
      {"params", "H_I", "1", "IRS height above the UE (m)"},
      {"params", "alpha", "3", "path-loss exponent (> 2)"},
      {"params", "f_c", "2e9", "carrier frequency (Hz)"},
      {"params", "D1", "25", "IRS association radius (m)"},
      {"params", "D2", "50", "IRS interference radius (m)"},
      {"params", "W_dB", "-147", "noise over transmit power (dB)"},
      {"params", "R_bar", "1", "target rate (bps/Hz)"},
      {"params", "threshold_dB", "-", "SINR threshold (dB); sets R_bar = log2(1 + threshold)"},
      {"params", "l0", "50", "serving distance for the cdf kinds (m)"},
      {"params", "d0", "inf", "nearest-IRS distance for the cdf kinds (m)"},
      {"params", "C", "-", "total cost per m^2 in units of c0; sets lambda_B and lambda_I from zeta"},
      {"params", "zeta", "0", "IRS/BS density ratio (with C)"},
      {"params", "K_N", "5", "BS/IRS cost ratio"},
      {"params", "c0", "1", "cost of one BS"},
      {"params", "k_tilde", "8", "shape above which the signal is replaced by its mean"},
      {"params", "M", "1.5", "shape interpolation priority factor"},
  };
  return k;
}

inline const std::vector<KeyDoc>& section_keys() {
  static const std::vector<KeyDoc> k{
      {"experiment", "kind", "(required)", "one of the kinds listed above"},
      {"experiment", "name", "<file stem>", "stem of the output files"},
      {"experiment", "seed", "1", "master seed of the simulation"},
      {"experiment", "out", "out", "output directory"},
      {"experiment", "threads", "1", "worker threads (results do not depend on it)"},
      {"experiment", "cdf_points", "61", "grid points of the cdf kinds"},
      {"experiment", "zeta_grid", "0:10:0.25", "density-ratio grid of optimal_zeta_sweep (list or from:to:step)"},
      {"cases", "<label>", "-", "one curve per entry: space-separated key=value scenario overrides"},
      {"sweep", "variable", "<per kind>", "scenario key swept along the x axis"},
      {"sweep", "grid", "<per kind>", "comma-separated values, or from:to:step"},
      {"sweep", "unit", "1", "multiplier of the grid values; `lambda0` for densities and costs"},
      {"mc", "enabled", "false", "add a simulated series next to the analytic one"},
      {"mc", "scale", "desk", "smoke | desk | paper simulation budget"},
      {"mc", "n_topologies", "<scale>", "topologies per coverage estimate"},
      {"mc", "n_fading", "<scale>", "fading draws per topology"},
      {"mc", "disk_radius", "<scale>", "simulation disk radius (m)"},
      {"mc", "draws", "<scale>", "conditioned draws of the cdf kinds"},
  };
  return k;
}

// --- value parsing ---------------------------------------------------------------

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

/// Number with an optional `lambda0` factor: "5e-5", "10*lambda0", "10lambda0", "lambda0".
inline double parse_number(const std::string& raw, const std::string& where) {
  std::string s = trim(raw);
  double scale = 1.0;
  const std::string suffix = "lambda0";
  if (s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0) {
    scale = kLambda0;
    s = trim(s.substr(0, s.size() - suffix.size()));
    if (!s.empty() && s.back() == '*') s = trim(s.substr(0, s.size() - 1));
    if (s.empty()) return scale;
  }
  if (s == "inf") return std::numeric_limits<double>::infinity();
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing characters");
    return v * scale;
  } catch (const std::exception&) {
    throw ConfigError(where + ": '" + raw + "' is not a number");
  }
}

inline std::vector<double> parse_grid(const std::string& raw, const std::string& where) {
  std::vector<double> g;
  const std::string s = trim(raw);
  if (s.find(':') != std::string::npos) {
    std::vector<double> f;
    std::stringstream ss(s);
    for (std::string part; std::getline(ss, part, ':');) f.push_back(parse_number(part, where));
    if (f.size() != 3 || !(f[2] > 0.0) || !(f[1] >= f[0]))
      throw ConfigError(where + ": range must be from:to:step with step > 0 and to >= from");
    const long n = std::lround(std::floor((f[1] - f[0]) / f[2] + 1e-9));
    for (long i = 0; i <= n; ++i) g.push_back(f[0] + i * f[2]);
  } else {
    std::stringstream ss(s);
    for (std::string part; std::getline(ss, part, ',');) g.push_back(parse_number(part, where));
  }
  if (g.empty()) throw ConfigError(where + ": grid is empty");
  for (std::size_t i = 1; i < g.size(); ++i)
    if (!(g[i] > g[i - 1])) throw ConfigError(where + ": grid must be strictly ascending");
  return g;
}

inline bool parse_bool(const std::string& raw, const std::string& where) {
  const std::string s = trim(raw);
  if (s == "true" || s == "on" || s == "yes" || s == "1") return true;
  if (s == "false" || s == "off" || s == "no" || s == "0") return false;
  throw ConfigError(where + ": expected true or false, got '" + raw + "'");
}

inline int parse_int(const std::string& raw, const std::string& where, int min) {
  const double v = parse_number(raw, where);
  if (v != std::floor(v) || v < min || v > 1e9)
    throw ConfigError(where + ": expected an integer >= " + std::to_string(min));
  return static_cast<int>(v);
}

// --- scenarios -------------------------------------------------------------------

using Overrides = std::vector<std::pair<std::string, std::string>>;

/// Everything one analytic evaluation needs.
struct Scenario {
  SystemParams params;
  NonOutageConfig non_outage;
  CostModel cost;
  double l0 = 50.0;
  double d0 = std::numeric_limits<double>::infinity();
  std::optional<double> C;
  double zeta = 0.0;
};

inline bool is_scenario_key(const std::string& k) {
  for (const auto& d : scenario_keys())
    if (k == d.key) return true;
  return false;
}

/// Applies overrides in order; derived quantities (Q, C, threshold) are
/// resolved once all of them are known.
inline Scenario resolve_scenario(const Overrides& kv) {
  NetworkConfig net;
  Scenario s;
  std::optional<double> Q, threshold_db;
  for (const auto& [key, raw] : kv) {
    const std::string where = "key '" + key + "'";
    if (!is_scenario_key(key)) throw ConfigError("unknown scenario " + where + " (see list-experiments)");
    const double v = parse_number(raw, where);
    if (key == "lambda_B") net.lambda_B = v;
    else if (key == "lambda_I") net.lambda_I = v;
    else if (key == "Q") Q = v;
    else if (key == "p") net.p = v;
    else if (key == "N") net.N = parse_int(raw, where, 1);
    else if (key == "H_B") net.H_B = v;
    else if (key == "H_I") net.H_I = v;
    else if (key == "alpha") net.alpha = v;
    else if (key == "f_c") net.f_c = v;
    else if (key == "D1") net.D1 = v;
    else if (key == "D2") net.D2 = v;
    else if (key == "W_dB") net.W_dB = v;
    else if (key == "R_bar") net.R_bar = v;
    else if (key == "threshold_dB") threshold_db = v;
    else if (key == "l0") s.l0 = v;
    else if (key == "d0") s.d0 = v;
    else if (key == "C") s.C = v;
    else if (key == "zeta") s.zeta = v;
    else if (key == "K_N") s.cost.K_N = v;
    else if (key == "c0") s.cost.c0 = v;
    else if (key == "k_tilde") s.non_outage.k_tilde = v;
    else if (key == "M") s.non_outage.M = v;
  }
  if (threshold_db) net.R_bar = std::log2(1.0 + db_to_linear(*threshold_db));
  if (Q) {
    if (!(*Q >= 0.0)) throw ConfigError("Q must be >= 0");
    net.lambda_I = *Q / net.N;
  }
  if (s.C) {
    try {
      const Densities d = cost_to_density(*s.C, s.zeta, s.cost);
      net.lambda_B = d.lambda_B;
      net.lambda_I = d.lambda_I;
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
  }
  if (!(s.l0 >= 0.0)) throw ConfigError("l0 must be >= 0");
  if (!(s.d0 >= 0.0)) throw ConfigError("d0 must be >= 0");
  s.params = SystemParams(net);
  s.non_outage.validate();
  return s;
}

// --- experiment description ------------------------------------------------------

enum class McScale { Smoke, Desk, Paper };

inline McScale parse_mc_scale(const std::string& s) {
  if (s == "smoke") return McScale::Smoke;
  if (s == "desk") return McScale::Desk;
  if (s == "paper") return McScale::Paper;
  throw ConfigError("mc scale must be smoke, desk or paper (got '" + s + "')");
}

inline const char* mc_scale_name(McScale s) {
  switch (s) {
    case McScale::Smoke: return "smoke";
    case McScale::Desk: return "desk";
    case McScale::Paper: return "paper";
  }
  return "?";
}

struct McSettings {
  bool enabled = false;
  McScale scale = McScale::Desk;
  std::optional<int> n_topologies, n_fading, draws;
  std::optional<double> disk_radius;

  // Budget after applying the scale and explicit overrides.
  double radius() const {
    return disk_radius.value_or(scale == McScale::Smoke ? 2000.0 : scale == McScale::Desk ? 5000.0 : 20000.0);
  }
  int topologies() const {
    return n_topologies.value_or(scale == McScale::Smoke ? 100 : scale == McScale::Desk ? 500 : 2000);
  }
  int fading() const { return n_fading.value_or(scale == McScale::Smoke ? 20 : scale == McScale::Desk ? 200 : 1000); }
  int conditioned_draws() const {
    return draws.value_or(scale == McScale::Smoke ? 2000 : scale == McScale::Desk ? 10000 : 100000);
  }
};

struct Case {
  std::string label;  // "" for the single implicit case
  Overrides overrides;
};

struct ExperimentSpec {
  std::string name;
  Kind kind = Kind::CoverageCurve;
  Overrides params;
  std::vector<Case> cases;
  std::string sweep_variable;  // "" for the cdf kinds
  std::vector<double> sweep_grid;
  std::string sweep_unit = "1";
  std::vector<double> zeta_grid = default_zeta_grid();
  McSettings mc;
  std::uint64_t seed = 1;
  std::string out = "out";
  int threads = 1;
  int cdf_points = 61;

  bool has_sweep() const { return !sweep_variable.empty(); }
  double sweep_scale() const { return sweep_unit == "lambda0" ? kLambda0 : 1.0; }

  /// Scenario of one (case, grid point); point is ignored without a sweep.
  Scenario scenario(std::size_t c, std::size_t point) const {
    Overrides kv = params;
    kv.insert(kv.end(), cases[c].overrides.begin(), cases[c].overrides.end());
    if (has_sweep()) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", sweep_grid[point] * sweep_scale());
      kv.emplace_back(sweep_variable, buf);
    }
    return resolve_scenario(kv);
  }
};

inline std::vector<double> default_grid(Kind k) {
  switch (k) {
    case Kind::CoverageCurve: return parse_grid("-10:20:1", "default grid");
    case Kind::MeanPowers:
    case Kind::ThroughputVsLambdaI: return {0.0, 1.0, 2.0, 5.0, 10.0, 20.0};
    case Kind::ThroughputVsZeta: return default_zeta_grid();
    case Kind::ThroughputVsCost:
    case Kind::OptimalZetaSweep: return {10.0, 20.0, 40.0, 80.0, 160.0};
    default: return {};
  }
}

inline const char* default_unit(Kind k) {
  switch (k) {
    case Kind::MeanPowers:
    case Kind::ThroughputVsLambdaI:
    case Kind::ThroughputVsCost:
    case Kind::OptimalZetaSweep: return "lambda0";
    default: return "1";
  }
}

inline Overrides parse_overrides(const std::string& raw, const std::string& where) {
  Overrides kv;
  std::stringstream ss(raw);
  for (std::string tok; ss >> tok;) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == tok.size())
      throw ConfigError(where + ": expected key=value, got '" + tok + "'");
    kv.emplace_back(tok.substr(0, eq), tok.substr(eq + 1));
  }
  if (kv.empty()) throw ConfigError(where + ": no overrides given");
  return kv;
}

/// Builds and validates a spec from a parsed INI tree. Every (case, point)
/// scenario is resolved once here, so bad parameters fail before any work.
inline ExperimentSpec spec_from_tree(const boost::property_tree::ptree& tree, const std::string& default_name) {
  namespace pt = boost::property_tree;
  ExperimentSpec s;
  s.name = default_name;
  auto known = [](const std::string& section, const std::string& key) {
    for (const auto& d : section_keys())
      if (section == d.section && key == d.key) return true;
    return false;
  };

  bool have_kind = false;
  std::optional<std::string> grid_raw;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw ConfigError("key '" + section + "' must live inside a [section]");
    for (const auto& [key, node] : body) {
      const std::string v = node.data();
      const std::string where = "[" + section + "] " + key;
      if (section == "experiment") {
        if (!known(section, key)) throw ConfigError("unknown key " + where + " (see list-experiments)");
        if (key == "kind") {
          bool found = false;
          for (const auto& k : kinds())
            if (v == k.name) {
              s.kind = k.kind;
              found = true;
            }
          if (!found) throw ConfigError(where + ": unknown kind '" + v + "' (see list-experiments)");
          have_kind = true;
        } else if (key == "name") {
          if (v.empty() || v.find_first_of("/\\ ") != std::string::npos)
            throw ConfigError(where + ": must be a non-empty file stem");
          s.name = v;
        } else if (key == "seed") {
          try {
            // stoull wraps negative input silently
            if (v.empty() || !std::isdigit(static_cast<unsigned char>(v[0]))) throw std::invalid_argument("");
            std::size_t used = 0;
            s.seed = std::stoull(v, &used);
            if (used != v.size()) throw std::invalid_argument("");
          } catch (const std::exception&) {
            throw ConfigError(where + ": expected an unsigned 64-bit integer");
          }
        } else if (key == "out") {
          s.out = v;
        } else if (key == "threads") {
          s.threads = parse_int(v, where, 1);
        } else if (key == "cdf_points") {
          s.cdf_points = parse_int(v, where, 5);
        } else if (key == "zeta_grid") {
          s.zeta_grid = parse_grid(v, where);
          if (s.zeta_grid.front() < 0.0) throw ConfigError(where + ": zeta must be >= 0");
        }
      } else if (section == "params") {
        if (!is_scenario_key(key)) throw ConfigError("unknown key " + where + " (see list-experiments)");
        s.params.emplace_back(key, v);
      } else if (section == "cases") {
        if (key.find_first_of("/\\ ") != std::string::npos) throw ConfigError(where + ": labels must be file-name safe");
        s.cases.push_back({key, parse_overrides(v, where)});
      } else if (section == "sweep") {
        if (!known(section, key)) throw ConfigError("unknown key " + where + " (see list-experiments)");
        if (key == "variable") s.sweep_variable = v;
        else if (key == "grid") grid_raw = v;
        else if (key == "unit") {
          if (v != "1" && v != "lambda0") throw ConfigError(where + ": unit must be 1 or lambda0");
          s.sweep_unit = v;
        }
      } else if (section == "mc") {
        if (!known(section, key)) throw ConfigError("unknown key " + where + " (see list-experiments)");
        if (key == "enabled") s.mc.enabled = parse_bool(v, where);
        else if (key == "scale") s.mc.scale = parse_mc_scale(v);
        else if (key == "n_topologies") s.mc.n_topologies = parse_int(v, where, 100);
        else if (key == "n_fading") s.mc.n_fading = parse_int(v, where, 1);
        else if (key == "draws") s.mc.draws = parse_int(v, where, 10);
        else if (key == "disk_radius") s.mc.disk_radius = parse_number(v, where);
      } else {
        throw ConfigError("unknown section [" + section + "]; sections are experiment, params, cases, sweep, mc");
      }
    }
  }
  if (!have_kind) throw ConfigError("[experiment] kind is required (see list-experiments)");

  const KindInfo& info = kind_info(s.kind);
  const bool sweep_given = !s.sweep_variable.empty() || grid_raw.has_value();
  if (info.sweep[0] == '\0') {
    if (sweep_given) throw ConfigError(std::string("kind ") + info.name + " takes no [sweep] section");
  } else {
    const bool custom_variable = !s.sweep_variable.empty() && s.sweep_variable != info.sweep;
    if (s.sweep_variable.empty()) s.sweep_variable = info.sweep;
    if (!is_scenario_key(s.sweep_variable))
      throw ConfigError("[sweep] variable: '" + s.sweep_variable + "' is not a scenario key");
    if (s.kind == Kind::ThroughputVsZeta && s.sweep_variable != "zeta")
      throw ConfigError("throughput_vs_zeta sweeps zeta; set C in [params] or per case");
    if (s.kind == Kind::OptimalZetaSweep && s.sweep_variable == "zeta")
      throw ConfigError("optimal_zeta_sweep optimizes over zeta; sweep another variable");
    if (grid_raw) {
      s.sweep_grid = parse_grid(*grid_raw, "[sweep] grid");
    } else {
      if (custom_variable) throw ConfigError("[sweep] grid is required when the variable is not the kind's default");
      s.sweep_grid = default_grid(s.kind);
      if (!tree.get_child_optional("sweep") || !tree.get_child("sweep").get_optional<std::string>("unit"))
        s.sweep_unit = default_unit(s.kind);
    }
  }
  if (s.cases.empty()) s.cases.push_back({"", {}});

  // Resolve everything once; this is where parameter errors surface.
  const std::size_t points = s.has_sweep() ? s.sweep_grid.size() : 1;
  for (std::size_t c = 0; c < s.cases.size(); ++c) {
    for (std::size_t i = 0; i < points; ++i) {
      Scenario sc;
      try {
        sc = s.scenario(c, i);
      } catch (const ConfigError& e) {
        std::string ctx = s.cases[c].label.empty() ? "" : "case '" + s.cases[c].label + "': ";
        throw ConfigError(ctx + e.what());
      }
      const bool cdf_kind = s.kind == Kind::SignalCdf || s.kind == Kind::InterferenceCdf;
      if (cdf_kind && !std::isfinite(sc.d0) && s.kind == Kind::SignalCdf && sc.params.lambda_I() > 0.0)
        throw ConfigError("signal_cdf needs d0 (in [params] or per case)");
      if ((s.kind == Kind::ThroughputVsZeta || s.kind == Kind::OptimalZetaSweep || s.kind == Kind::ThroughputVsCost) &&
          !sc.C)
        throw ConfigError(std::string(info.name) + " needs a cost budget C (in [params], per case, or swept)");
    }
  }
  if (s.mc.enabled && s.mc.radius() <= 0.0) throw ConfigError("[mc] disk_radius must be > 0");
  return s;
}

inline ExperimentSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config '" + path + "'");
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(path + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  try {
    return spec_from_tree(tree, std::filesystem::path(path).stem().string());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

// --- evaluation ------------------------------------------------------------------

/// Seed of the simulation at (case, point): splitmix64 of the master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::size_t c, std::size_t point) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ull * (1 + (static_cast<std::uint64_t>(c) << 32) + point);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

struct Table {
  std::string file;
  std::vector<std::string> header;  // '#' lines, without the prefix
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

inline std::string fmt(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

struct RunResult {
  std::vector<Table> tables;
  nlohmann::ordered_json summary = nlohmann::ordered_json::object();
};

struct RunOptions {
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<McScale> mc_scale;
  std::optional<int> threads;
  std::string config_path;
};

namespace detail {

inline std::string file_stem(const ExperimentSpec& s, std::size_t c) {
  return s.cases[c].label.empty() ? s.name : s.name + "_" + s.cases[c].label;
}

inline std::string describe_case(const ExperimentSpec& s, std::size_t c) {
  std::string d = "case " + (s.cases[c].label.empty() ? std::string("default") : s.cases[c].label) + ":";
  for (const auto& [k, v] : s.params) d += " " + k + "=" + v;
  for (const auto& [k, v] : s.cases[c].overrides) d += " " + k + "=" + v;
  return d;
}

/// Re-throws numerical failures with the experiment context in front.
template <class Fn>
auto in_context(const std::string& where, Fn&& fn) {
  try {
    return fn();
  } catch (const QuadratureError& e) {
    throw QuadratureError(where + ": " + e.what(), e.estimate(), e.error_bound());
  } catch (const NumericalError& e) {
    throw NumericalError(where + ": " + e.what());
  } catch (const DomainError& e) {
    throw NumericalError(where + ": " + e.what());
  }
}

inline McConfig mc_config(const ExperimentSpec& s, std::uint64_t seed) {
  McConfig m;
  m.disk_radius = s.mc.radius();
  m.n_topologies = s.mc.topologies();
  m.n_fading = s.mc.fading();
  m.seed = seed;
  m.threads = s.threads;
  return m;
}

inline std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
  return g;
}

inline double empirical_cdf(const std::vector<double>& sorted, double x) {
  return static_cast<double>(std::lower_bound(sorted.begin(), sorted.end(), x) - sorted.begin()) / sorted.size();
}

inline double ks_sorted(const std::vector<double>& sorted, const std::function<double(double)>& F) {
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = F(sorted[i]);
    d = std::max({d, std::abs((i + 1) / n - f), std::abs(f - i / n)});
  }
  return d;
}

/// x with F(x) = q for a nondecreasing cdf, by bisection on a log scale.
inline double cdf_quantile(const std::function<double(double)>& F, double q, double lo, double hi) {
  while (F(lo) > q) lo /= 4.0;
  while (F(hi) < q) hi *= 4.0;
  for (int it = 0; it < 80; ++it) {
    const double mid = std::sqrt(lo * hi);
    (F(mid) < q ? lo : hi) = mid;
  }
  return std::sqrt(lo * hi);
}

inline void run_cdf(const ExperimentSpec& s, RunResult& out) {
  const bool signal = s.kind == Kind::SignalCdf;
  for (std::size_t c = 0; c < s.cases.size(); ++c) {
    const Scenario sc = s.scenario(c, 0);
    const SystemParams& p = sc.params;
    const std::string where = std::string(signal ? "signal" : "interference") + " cdf, " + describe_case(s, c);
    std::function<double(double)> F;
    std::vector<double> xs;
    nlohmann::ordered_json sum;
    if (signal) {
      const GammaSpec g = in_context(where, [&] { return signal_gamma_spec(sc.l0, sc.d0, p); });
      F = [g](double x) { return g.cdf(x); };
      const double lo = boost::math::gamma_p_inv(g.k, 1e-3) * g.theta, hi = boost::math::gamma_p_inv(g.k, 0.999) * g.theta;
      xs = log_grid(lo, hi, s.cdf_points);
      const double med = boost::math::gamma_p_inv(g.k, 0.5) * g.theta;
      const double dens = boost::math::gamma_p_derivative(g.k, med / g.theta) / g.theta;
      sum["k"] = g.k;
      sum["theta"] = g.theta;
      sum["regime"] = g.regime == Regime::Beamformed ? "beamformed" : g.regime == Regime::ScatteredOnly ? "scattered" : "no_irs";
      sum["median"] = med;
      sum["slope_at_median_per_dB"] = dens * med * std::log(10.0) / 10.0;
    } else {
      const LaplaceContext ctx = make_laplace_context(sc.l0, sc.d0, p);
      const double EI = mean_interference(sc.l0, sc.d0, p);
      F = [ctx](double x) { return interference_cdf(x, ctx); };
      xs = log_grid(0.05 * EI, 20.0 * EI, s.cdf_points);
      sum["mean"] = EI;
      sum["median"] = in_context(where, [&] { return cdf_quantile(F, 0.5, 0.2 * EI, 5.0 * EI); });
    }
    Table t;
    t.file = file_stem(s, c) + ".csv";
    t.header.push_back(describe_case(s, c));
    t.header.push_back(std::string("x: ") + (signal ? "signal" : "interference") +
                       " power relative to the transmit power (linear); x_dB = 10 log10 x");
    t.columns = {"source", "x", "x_dB", "cdf"};
    for (double x : xs) {
      const double v = in_context(where, [&] { return F(x); });
      t.rows.push_back({"analytic", fmt(x), fmt(linear_to_db(x)), fmt(v)});
    }
    if (s.mc.enabled) {
      const auto draws = sample_conditioned_powers(p, sc.l0, sc.d0, s.mc.conditioned_draws(), derive_seed(s.seed, c, 0),
                                                   s.mc.radius(), SimOptions{false, signal}, s.threads);
      std::vector<double> v;
      for (const auto& d : draws) v.push_back(signal ? d.S : d.I);
      std::sort(v.begin(), v.end());
      for (double x : xs) t.rows.push_back({"mc", fmt(x), fmt(linear_to_db(x)), fmt(empirical_cdf(v, x))});
      sum["mc_draws"] = v.size();
      sum["mc_median"] = v[v.size() / 2];
      sum["ks"] = in_context(where, [&] { return ks_sorted(v, F); });
      t.header.push_back("ks distance analytic vs mc: " + fmt(sum["ks"].get<double>()));
    }
    out.summary["cases"][s.cases[c].label.empty() ? "default" : s.cases[c].label] = sum;
    out.tables.push_back(std::move(t));
  }
}

inline void run_coverage_sweep(const ExperimentSpec& s, RunResult& out) {
  CoverageConfig cfg;
  cfg.threads = s.threads;
  const bool zeta_kind = s.kind == Kind::ThroughputVsZeta;
  const bool threshold_sweep = s.sweep_variable == "threshold_dB";
  for (std::size_t c = 0; c < s.cases.size(); ++c) {
    Table t;
    t.file = file_stem(s, c) + ".csv";
    t.header.push_back(describe_case(s, c));
    t.header.push_back(s.sweep_variable + (s.sweep_unit == "lambda0" ? " in units of lambda0" : "") +
                       "; nu in bps/Hz/m^2; densities in m^-2; bf/sc/wo are the per-regime parts of p_cov");
    t.columns = {"source", s.sweep_variable, "p_cov", "std_err", "nu", "bf", "sc", "wo", "lambda_B", "lambda_I"};
    std::vector<std::vector<std::string>> mc_rows;
    std::optional<CoverageEstimate> shared;
    if (s.mc.enabled && threshold_sweep) {
      // One simulation serves every threshold of the curve.
      std::vector<double> th;
      for (std::size_t i = 0; i < s.sweep_grid.size(); ++i) th.push_back(s.scenario(c, i).params.gamma_bar());
      shared = estimate_coverage(s.scenario(c, 0).params, mc_config(s, derive_seed(s.seed, c, 0)), th);
    }
    double best_nu = -1.0, best_x = 0.0, nu0 = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < s.sweep_grid.size(); ++i) {
      const Scenario sc = s.scenario(c, i);
      const SystemParams& p = sc.params;
      cfg.non_outage = sc.non_outage;
      const std::string where = "coverage, " + describe_case(s, c) + ", " + s.sweep_variable + "=" + fmt(s.sweep_grid[i]);
      const CoverageResult r = in_context(where, [&] { return coverage_probability(p, cfg); });
      const double x = s.sweep_grid[i];
      t.rows.push_back({"analytic", fmt(x), fmt(r.p_cov), "", fmt(r.nu), fmt(r.breakdown.bf), fmt(r.breakdown.sc),
                        fmt(r.breakdown.wo), fmt(p.lambda_B()), fmt(p.lambda_I())});
      if (r.nu > best_nu) {  // strict: ties stay at the smaller x
        best_nu = r.nu;
        best_x = x;
      }
      if (i == 0) nu0 = r.nu;
      if (s.mc.enabled) {
        SimEstimate e;
        if (shared) {
          e = shared->p_cov[i];
        } else {
          e = estimate_coverage(p, mc_config(s, derive_seed(s.seed, c, i)), {p.gamma_bar()}).p_cov[0];
        }
        mc_rows.push_back({"mc", fmt(x), fmt(e.value), fmt(e.std_err), fmt(spatial_throughput(p, e.value)), "", "", "",
                           fmt(p.lambda_B()), fmt(p.lambda_I())});
      }
    }
    t.rows.insert(t.rows.end(), mc_rows.begin(), mc_rows.end());
    nlohmann::ordered_json sum;
    sum["argmax_" + s.sweep_variable] = best_x;
    sum["nu_max"] = best_nu;
    if (zeta_kind) {
      sum["nu_at_zeta0"] = nu0;
      t.header.push_back("argmax zeta = " + fmt(best_x) + ", nu = " + fmt(best_nu));
    }
    out.summary["cases"][s.cases[c].label.empty() ? "default" : s.cases[c].label] = sum;
    out.tables.push_back(std::move(t));
  }
}

inline void run_mean_powers(const ExperimentSpec& s, RunResult& out) {
  for (std::size_t c = 0; c < s.cases.size(); ++c) {
    Table t;
    t.file = file_stem(s, c) + ".csv";
    t.header.push_back(describe_case(s, c));
    t.header.push_back(s.sweep_variable + (s.sweep_unit == "lambda0" ? " in units of lambda0" : "") +
                       "; powers relative to the transmit power, *_dB = 10 log10");
    t.columns = {"source", s.sweep_variable, "mean_S", "mean_S_dB", "mean_I", "mean_I_dB", "std_err_S", "std_err_I"};
    std::vector<std::vector<std::string>> mc_rows;
    for (std::size_t i = 0; i < s.sweep_grid.size(); ++i) {
      const SystemParams p = s.scenario(c, i).params;
      const std::string where = "mean powers, " + describe_case(s, c) + ", " + s.sweep_variable + "=" + fmt(s.sweep_grid[i]);
      const double ES = in_context(where, [&] { return mean_signal_power(p); });
      const double EI = in_context(where, [&] { return mean_interference(p); });
      t.rows.push_back({"analytic", fmt(s.sweep_grid[i]), fmt(ES), fmt(linear_to_db(ES)), fmt(EI), fmt(linear_to_db(EI)), "", ""});
      if (s.mc.enabled) {
        const auto e = estimate_coverage(p, mc_config(s, derive_seed(s.seed, c, i)), {p.gamma_bar()});
        mc_rows.push_back({"mc", fmt(s.sweep_grid[i]), fmt(e.mean_S.value), fmt(linear_to_db(e.mean_S.value)),
                           fmt(e.mean_I.value), fmt(linear_to_db(e.mean_I.value)), fmt(e.mean_S.std_err),
                           fmt(e.mean_I.std_err)});
      }
    }
    t.rows.insert(t.rows.end(), mc_rows.begin(), mc_rows.end());
    out.tables.push_back(std::move(t));
  }
}

inline void run_optimal_zeta(const ExperimentSpec& s, RunResult& out) {
  CoverageConfig cfg;
  cfg.threads = s.threads;
  for (std::size_t c = 0; c < s.cases.size(); ++c) {
    Table t;
    t.file = file_stem(s, c) + ".csv";
    t.header.push_back(describe_case(s, c));
    t.header.push_back(s.sweep_variable + (s.sweep_unit == "lambda0" ? " in units of lambda0" : "") +
                       "; zeta searched on a grid of " + std::to_string(s.zeta_grid.size()) + " points in [" +
                       fmt(s.zeta_grid.front()) + ", " + fmt(s.zeta_grid.back()) + "]; nu in bps/Hz/m^2");
    t.columns = {"source", s.sweep_variable, "zeta_star", "nu_star", "nu_bs_only", "lambda_B_star", "lambda_I_star"};
    for (std::size_t i = 0; i < s.sweep_grid.size(); ++i) {
      const Scenario sc = s.scenario(c, i);
      cfg.non_outage = sc.non_outage;
      const std::string where = "density ratio, " + describe_case(s, c) + ", " + s.sweep_variable + "=" + fmt(s.sweep_grid[i]);
      const auto r = in_context(where, [&] { return optimal_density_ratio(*sc.C, sc.cost, sc.params, cfg, s.zeta_grid); });
      double nu_bs = std::numeric_limits<double>::quiet_NaN();
      const DensityRatioPoint* best = nullptr;
      for (const auto& pt : r.curve) {
        if (pt.zeta == 0.0) nu_bs = pt.coverage.nu;
        if (pt.zeta == r.zeta_star) best = &pt;
      }
      t.rows.push_back({"analytic", fmt(s.sweep_grid[i]), fmt(r.zeta_star), fmt(r.nu_star), fmt(nu_bs),
                        fmt(best->lambda_B), fmt(best->lambda_I)});
    }
    out.tables.push_back(std::move(t));
  }
}

}  // namespace detail

inline RunResult evaluate(const ExperimentSpec& s) {
  RunResult r;
  switch (s.kind) {
    case Kind::SignalCdf:
    case Kind::InterferenceCdf: detail::run_cdf(s, r); break;
    case Kind::CoverageCurve:
    case Kind::ThroughputVsLambdaI:
    case Kind::ThroughputVsZeta:
    case Kind::ThroughputVsCost: detail::run_coverage_sweep(s, r); break;
    case Kind::MeanPowers: detail::run_mean_powers(s, r); break;
    case Kind::OptimalZetaSweep: detail::run_optimal_zeta(s, r); break;
  }
  return r;
}

inline void write_table(const Table& t, const ExperimentSpec& s, const std::filesystem::path& dir) {
  const auto path = dir / t.file;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write '" + path.string() + "'");
  f << "# hybridnet " << kVersion << " " << kind_info(s.kind).name << ": " << kind_info(s.kind).what << "\n";
  f << "# experiment " << s.name << ", seed " << s.seed;
  if (s.mc.enabled)
    f << ", mc " << mc_scale_name(s.mc.scale) << " (" << s.mc.topologies() << " topologies x " << s.mc.fading()
      << " fading, " << s.mc.conditioned_draws() << " conditioned draws, disk " << fmt(s.mc.radius()) << " m)";
  else
    f << ", mc off";
  f << "\n";
  for (const auto& h : t.header) f << "# " << h << "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i) f << (i ? "," : "") << t.columns[i];
  f << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) f << (i ? "," : "") << row[i];
    f << "\n";
  }
  f.flush();
  if (!f) throw IoError("write failed for '" + path.string() + "'");
}

inline nlohmann::ordered_json resolved_params(const Scenario& sc) {
  const SystemParams& p = sc.params;
  nlohmann::ordered_json j;
  j["lambda_B"] = p.lambda_B();
  j["lambda_I"] = p.lambda_I();
  j["p"] = p.p();
  j["N"] = p.N();
  j["H_B"] = p.H_B();
  j["H_I"] = p.H_I();
  j["alpha"] = p.alpha();
  j["f_c"] = p.f_c();
  j["D1"] = p.D1();
  j["D2"] = p.D2();
  j["W"] = p.W();
  j["R_bar"] = p.R_bar();
  j["gamma_bar"] = p.gamma_bar();
  j["beta"] = p.beta();
  j["k_tilde"] = sc.non_outage.k_tilde;
  j["M"] = sc.non_outage.M;
  j["l0"] = sc.l0;
  if (std::isfinite(sc.d0)) j["d0"] = sc.d0;
  if (sc.C) {
    j["C"] = *sc.C;
    j["zeta"] = sc.zeta;
    j["K_N"] = sc.cost.K_N;
    j["c0"] = sc.cost.c0;
  }
  return j;
}

/// Evaluates the spec and writes its CSVs and manifest. Returns the summary.
inline RunResult run(ExperimentSpec s, const RunOptions& opt = {}) {
  if (opt.out) s.out = *opt.out;
  if (opt.seed) s.seed = *opt.seed;
  if (opt.mc_scale) s.mc.scale = *opt.mc_scale;
  if (opt.threads) {
    if (*opt.threads < 1) throw ConfigError("--threads must be >= 1");
    s.threads = *opt.threads;
  }
  const auto t0 = std::chrono::steady_clock::now();
  const std::filesystem::path dir(s.out);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw IoError("cannot create output directory '" + s.out + "'");

  RunResult r = evaluate(s);
  for (const auto& t : r.tables) write_table(t, s, dir);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  nlohmann::ordered_json m;
  m["experiment"] = s.name;
  m["kind"] = kind_info(s.kind).name;
  if (!opt.config_path.empty()) m["config"] = opt.config_path;
  m["seed"] = s.seed;
  m["threads"] = s.threads;
  m["mc"] = {{"enabled", s.mc.enabled},
             {"scale", mc_scale_name(s.mc.scale)},
             {"n_topologies", s.mc.topologies()},
             {"n_fading", s.mc.fading()},
             {"conditioned_draws", s.mc.conditioned_draws()},
             {"disk_radius", s.mc.radius()}};
  if (s.has_sweep()) m["sweep"] = {{"variable", s.sweep_variable}, {"unit", s.sweep_unit}, {"grid", s.sweep_grid}};
  for (std::size_t c = 0; c < s.cases.size(); ++c) {
    nlohmann::ordered_json cj;
    cj["label"] = s.cases[c].label.empty() ? "default" : s.cases[c].label;
    cj["file"] = r.tables[c].file;
    cj["params"] = resolved_params(s.scenario(c, 0));
    m["cases"].push_back(cj);
  }
  m["summary"] = r.summary;
  m["versions"] = {{"hybridnet", kVersion}, {"boost", BOOST_LIB_VERSION}, {"compiler", __VERSION__}};
  m["wall_time_s"] = wall;
  const auto mpath = dir / (s.name + ".manifest.json");
  std::ofstream f(mpath);
  if (!f) throw IoError("cannot write '" + mpath.string() + "'");
  f << m.dump(2) << "\n";
  if (!f) throw IoError("write failed for '" + mpath.string() + "'");
  r.summary["wall_time_s"] = wall;
  return r;
}

/// Process exit status for an exception escaping run/validate.
inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const IoError*>(&e)) return 4;
  if (dynamic_cast<const std::filesystem::filesystem_error*>(&e)) return 4;
  return 3;
}

inline std::string list_experiments() {
  std::string s = "Experiment kinds ([experiment] kind = ...):\n";
  char buf[256];
  for (const auto& k : kinds()) {
    std::snprintf(buf, sizeof buf, "  %-22s %s%s%s\n", k.name, k.what, k.sweep[0] ? "; sweeps " : "", k.sweep);
    s += buf;
  }
  s += "\nConfig files are flat key = value lines under [section] headers; lines starting with # or ; are comments.\n";
  std::string section;
  for (const auto* table : {&section_keys(), &scenario_keys()}) {
    for (const auto& d : *table) {
      if (section != d.section) {
        section = d.section;
        s += "\n[" + section + "]" + (section == "params" ? "  (also valid in [cases] entries and as [sweep] variable)" : "") + "\n";
      }
      std::snprintf(buf, sizeof buf, "  %-14s %-12s %s\n", d.key, d.fallback, d.doc);
      s += buf;
    }
  }
  s += "\nDensities and costs accept a lambda0 factor, e.g. lambda_B = 10*lambda0 (lambda0 = 5e-6 m^-2).\n";
  return s;
}

}  // namespace hybridnet::experiment
