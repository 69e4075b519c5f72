#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "porofeti/model.hpp"
#include "porofeti/timeloop.hpp"

namespace porofeti {

/// Fully resolved run configuration: defaults, then config file, then flag
/// overrides, flags winning.
struct RunConfig {
  std::string scenario = "mms";
  int mesh = 16;
  int fe_order = 2;
  double nu = 0.2;
  double E = 1e4;
  double dt = 0.0;  // 0 = scenario default
  double T = 0.0;   // 0 = scenario default
  std::string solver = "feti-generalized";
  double tol = 1e-8;
  int max_iters = 500;
  std::string out = "out";
  int stride = 1;
  // config-file-only keys
  double alpha = 1.0;
  double c0 = 0.1;
  double k_perm = 1.0;
  double mu_f = 1.0;
  std::string mu_convention = "paper";
  std::string nu_list = "0.2,0.49,0.499,0.4999";
  bool dump_blocks = false;
  bool serial = false;

  bool operator==(const RunConfig&) const = default;
};

namespace detail {

inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "scenario", "mesh",      "fe_order", "nu",        "E",
      "dt",       "T",         "solver",   "tol",       "max_iters",
      "out",      "stride",    "alpha",    "c0",        "k_perm",
      "mu_f",     "mu_convention", "nu_list", "dump_blocks", "serial"};
  return keys;
}

inline double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': cannot parse number from '" + v + "'");
  }
}

inline int to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const int x = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': cannot parse integer from '" + v + "'");
  }
}

inline bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config key '" + key + "': cannot parse boolean from '" + v + "'");
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline void set_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "scenario")
    cfg.scenario = value;
  else if (key == "mesh")
    cfg.mesh = to_int(key, value);
  else if (key == "fe_order")
    cfg.fe_order = to_int(key, value);
  else if (key == "nu")
    cfg.nu = to_double(key, value);
  else if (key == "E")
    cfg.E = to_double(key, value);
  else if (key == "dt")
    cfg.dt = to_double(key, value);
  else if (key == "T")
    cfg.T = to_double(key, value);
  else if (key == "solver")
    cfg.solver = value;
  else if (key == "tol")
    cfg.tol = to_double(key, value);
  else if (key == "max_iters")
    cfg.max_iters = to_int(key, value);
  else if (key == "out")
    cfg.out = value;
  else if (key == "stride")
    cfg.stride = to_int(key, value);
  else if (key == "alpha")
    cfg.alpha = to_double(key, value);
  else if (key == "c0")
    cfg.c0 = to_double(key, value);
  else if (key == "k_perm")
    cfg.k_perm = to_double(key, value);
  else if (key == "mu_f")
    cfg.mu_f = to_double(key, value);
  else if (key == "mu_convention")
    cfg.mu_convention = value;
  else if (key == "nu_list")
    cfg.nu_list = value;
  else if (key == "dump_blocks")
    cfg.dump_blocks = to_bool(key, value);
  else if (key == "serial")
    cfg.serial = to_bool(key, value);
  else {
    std::string keys;
    for (const auto& k : config_keys()) keys += (keys.empty() ? "" : ", ") + k;
    throw ConfigError("unknown config key '" + key + "' (valid keys: " + keys + ")");
  }
}

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

inline void validate_config(const RunConfig& cfg) {
  if (cfg.scenario != "mms" && cfg.scenario != "barry-mercer")
    throw ConfigError("scenario must be mms or barry-mercer, got '" + cfg.scenario + "'");
  if (cfg.mesh < 1) throw ConfigError("mesh must be >= 1");
  if (cfg.fe_order != 1 && cfg.fe_order != 2) throw ConfigError("fe_order must be 1 or 2");
  if (cfg.nu < 0.0 || cfg.nu >= 0.5) throw ConfigError("nu must satisfy 0 <= nu < 0.5");
  if (cfg.E <= 0.0) throw ConfigError("E must be positive");
  if (cfg.dt < 0.0) throw ConfigError("dt must be positive (or 0 for the scenario default)");
  if (cfg.T < 0.0) throw ConfigError("T must be positive (or 0 for the scenario default)");
  if (cfg.solver != "feti-generalized" && cfg.solver != "feti-schur" && cfg.solver != "monolithic")
    throw ConfigError("solver must be feti-generalized, feti-schur or monolithic");
  if (cfg.tol <= 0.0) throw ConfigError("tol must be positive");
  if (cfg.max_iters < 1) throw ConfigError("max_iters must be >= 1");
  if (cfg.stride < 1) throw ConfigError("stride must be >= 1");
  if (cfg.mu_convention != "paper" && cfg.mu_convention != "standard")
    throw ConfigError("mu_convention must be paper or standard");
  if (cfg.c0 < 0.0) throw ConfigError("c0 must be nonnegative");
  if (cfg.k_perm <= 0.0) throw ConfigError("k_perm must be positive");
  if (cfg.mu_f <= 0.0) throw ConfigError("mu_f must be positive");
}

/// Defaults + file + overrides, overrides winning; the result is validated.
inline RunConfig parse_config(const std::optional<std::string>& file,
                              const std::vector<std::pair<std::string, std::string>>& overrides = {}) {
  RunConfig cfg;
  if (file) {
    std::ifstream in(*file);
    if (!in) throw ConfigError("config file '" + *file + "' not found");
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      line = detail::trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError(*file + ":" + std::to_string(lineno) + ": expected 'key = value'");
      detail::set_key(cfg, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
    }
  }
  for (const auto& [key, value] : overrides) detail::set_key(cfg, key, value);
  validate_config(cfg);
  return cfg;
}

/// Inverse of parse_config for a resolved config (flat key = value lines).
inline std::string emit_config(const RunConfig& cfg) {
  std::ostringstream out;
  out << "scenario = " << cfg.scenario << "\n";
  out << "mesh = " << cfg.mesh << "\n";
  out << "fe_order = " << cfg.fe_order << "\n";
  out << "nu = " << detail::fmt_double(cfg.nu) << "\n";
  out << "E = " << detail::fmt_double(cfg.E) << "\n";
  out << "dt = " << detail::fmt_double(cfg.dt) << "\n";
  out << "T = " << detail::fmt_double(cfg.T) << "\n";
  out << "solver = " << cfg.solver << "\n";
  out << "tol = " << detail::fmt_double(cfg.tol) << "\n";
  out << "max_iters = " << cfg.max_iters << "\n";
  out << "out = " << cfg.out << "\n";
  out << "stride = " << cfg.stride << "\n";
  out << "alpha = " << detail::fmt_double(cfg.alpha) << "\n";
  out << "c0 = " << detail::fmt_double(cfg.c0) << "\n";
  out << "k_perm = " << detail::fmt_double(cfg.k_perm) << "\n";
  out << "mu_f = " << detail::fmt_double(cfg.mu_f) << "\n";
  out << "mu_convention = " << cfg.mu_convention << "\n";
  out << "nu_list = " << cfg.nu_list << "\n";
  out << "dump_blocks = " << (cfg.dump_blocks ? "true" : "false") << "\n";
  out << "serial = " << (cfg.serial ? "true" : "false") << "\n";
  return out.str();
}

inline ModelParams params_from_config(const RunConfig& cfg) {
  const MuConvention conv =
      cfg.mu_convention == "standard" ? MuConvention::standard : MuConvention::paper;
  return make_params(cfg.E, cfg.nu, cfg.E, cfg.nu, cfg.alpha, cfg.c0,
                     cfg.k_perm * Mat2::Identity(), cfg.mu_f, 0.0, Vec2::Zero(), conv);
}

inline SolveOptions options_from_config(const RunConfig& cfg) {
  SolveOptions opts;
  if (cfg.solver == "monolithic")
    opts.solver = SolverChoice::monolithic;
  else if (cfg.solver == "feti-schur")
    opts.solver = SolverChoice::feti_schur;
  else
    opts.solver = SolverChoice::feti_generalized;
  opts.tol = cfg.tol;
  opts.max_iter = cfg.max_iters;
  opts.parallel = !cfg.serial;
  opts.stride = cfg.stride;
  return opts;
}

inline std::vector<double> parse_nu_list(const std::string& list) {
  std::vector<double> nus;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = detail::trim(item);
    if (!item.empty()) nus.push_back(detail::to_double("nu_list", item));
  }
  if (nus.empty()) throw ConfigError("nu_list is empty");
  return nus;
}

}  // namespace porofeti
