// Command-line front end: single runs, the convergence study, and the
// Barry-Mercer benchmark, with CSV/VTK artifacts.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "porofeti/porofeti.hpp"

namespace {

using namespace porofeti;

struct CliOverrides {
  std::vector<std::pair<std::string, std::string>> kv;
  bool nu_given = false;
};

int run_solve(const RunConfig& cfg) {
  const ModelParams params = params_from_config(cfg);
  const Scenario scenario = scenario_by_name(cfg.scenario, params);
  const double T = cfg.T > 0.0 ? cfg.T : scenario.default_T;
  const double dt = cfg.dt > 0.0 ? cfg.dt : scenario.default_dt;
  const Discretization d =
      build_discretization(scenario, params, cfg.mesh, cfg.fe_order, time_grid_from_dt(T, dt));
  if (cfg.dump_blocks) dump_blocks_matrix_market(d.system, cfg.out + "/blocks");

  SolveOptions opts = options_from_config(cfg);
  opts.verbose = true;
  const SimulationResult result = run_simulation(d, opts);
  const auto written = write_outputs(d, result, cfg.out);
  std::printf("wrote %zu files to %s\n", written.size(), cfg.out.c_str());
  return 0;
}

int run_converge(const RunConfig& cfg, bool nu_flag) {
  StudyConfig study;
  study.fe_order = cfg.fe_order;
  study.E = cfg.E;
  study.nus = nu_flag ? std::vector<double>{cfg.nu} : parse_nu_list(cfg.nu_list);
  if (cfg.T > 0.0) study.T = cfg.T;
  if (cfg.dt > 0.0) study.dt = cfg.dt;
  study.mu_convention =
      cfg.mu_convention == "standard" ? MuConvention::standard : MuConvention::paper;
  study.solve = options_from_config(cfg);
  study.verbose = true;

  const ErrorTable table = convergence_study(study);
  std::filesystem::create_directories(cfg.out);
  const std::string csv = cfg.out + "/convergence.csv";
  write_error_table_csv(table, csv);
  std::printf("wrote %s (%zu rows)\n", csv.c_str(), table.rows.size());
  const std::size_t expected = study.nus.size() * study.mesh_sizes.size();
  return table.rows.size() == expected ? 0 : 1;
}

int run_barry_mercer(RunConfig cfg) {
  cfg.scenario = "barry-mercer";
  const ModelParams params = params_from_config(cfg);
  const Scenario scenario = barry_mercer_scenario(params);
  const double T = cfg.T > 0.0 ? cfg.T : scenario.default_T;
  const double dt = cfg.dt > 0.0 ? cfg.dt : scenario.default_dt;
  const Discretization d =
      build_discretization(scenario, params, cfg.mesh, cfg.fe_order, time_grid_from_dt(T, dt));

  SolveOptions opts = options_from_config(cfg);
  opts.verbose = true;
  const SimulationResult result = run_simulation(d, opts);
  write_outputs(d, result, cfg.out);

  const double max_boundary = std::sin(std::min(T, std::numbers::pi / 2.0));
  const OscillationReport rep =
      oscillation_check(result.snapshots, max_boundary, 0.05 * max_boundary);
  std::printf("oscillation check: %s  (pressure range [%.6g, %.6g], bounds [%.6g, %.6g])\n",
              rep.pass ? "PASS" : "FAIL", rep.min_p, rep.max_p, rep.lower_bound, rep.upper_bound);
  if (!rep.pass) std::printf("worst violating nodal value: %.6g\n", rep.worst_violation);
  return rep.pass ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FETI solver for poroelasticity coupled with elasticity"};
  app.require_subcommand(1);

  std::string config_path, solver, out;
  int mesh = 0, fe_order = 0, max_iters = 0, stride = 0;
  double dt = 0.0, T = 0.0, nu = 0.0, E = 0.0, tol = 0.0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "config file (key = value lines)");
    cmd->add_option("--mesh", mesh, "subdivisions of the unit edge");
    cmd->add_option("--dt", dt, "time step");
    cmd->add_option("--T", T, "final time");
    cmd->add_option("--nu", nu, "Poisson ratio");
    cmd->add_option("--E", E, "Young modulus");
    cmd->add_option("--fe-order", fe_order, "displacement order (1 or 2)");
    cmd->add_option("--solver", solver, "feti-generalized | feti-schur | monolithic");
    cmd->add_option("--tol", tol, "PCG relative tolerance");
    cmd->add_option("--max-iters", max_iters, "PCG iteration cap");
    cmd->add_option("--out", out, "output directory");
    cmd->add_option("--stride", stride, "snapshot stride");
  };

  CLI::App* solve = app.add_subcommand("solve", "run one simulation");
  CLI::App* converge = app.add_subcommand("converge", "manufactured-solution convergence study");
  CLI::App* barry = app.add_subcommand("barry-mercer", "Barry-Mercer benchmark run");
  add_common(solve);
  add_common(converge);
  add_common(barry);

  CLI11_PARSE(app, argc, argv);
  CLI::App* cmd = app.get_subcommands().front();

  auto fmt = [](double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  CliOverrides ov;
  if (cmd->count("--mesh")) ov.kv.emplace_back("mesh", std::to_string(mesh));
  if (cmd->count("--dt")) ov.kv.emplace_back("dt", fmt(dt));
  if (cmd->count("--T")) ov.kv.emplace_back("T", fmt(T));
  if (cmd->count("--nu")) {
    ov.kv.emplace_back("nu", fmt(nu));
    ov.nu_given = true;
  }
  if (cmd->count("--E")) ov.kv.emplace_back("E", fmt(E));
  if (cmd->count("--fe-order")) ov.kv.emplace_back("fe_order", std::to_string(fe_order));
  if (cmd->count("--solver")) ov.kv.emplace_back("solver", solver);
  if (cmd->count("--tol")) ov.kv.emplace_back("tol", fmt(tol));
  if (cmd->count("--max-iters")) ov.kv.emplace_back("max_iters", std::to_string(max_iters));
  if (cmd->count("--out")) ov.kv.emplace_back("out", out);
  if (cmd->count("--stride")) ov.kv.emplace_back("stride", std::to_string(stride));

  try {
    const std::optional<std::string> file =
        cmd->count("--config") ? std::optional(config_path) : std::nullopt;
    const RunConfig cfg = parse_config(file, ov.kv);
    std::printf("resolved configuration:\n%s", emit_config(cfg).c_str());

    if (cmd == solve) return run_solve(cfg);
    if (cmd == converge) return run_converge(cfg, ov.nu_given);
    return run_barry_mercer(cfg);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "solver error: %s\n", e.what());
    return 1;
  }
}
