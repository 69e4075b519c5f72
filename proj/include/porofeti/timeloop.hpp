#pragma once

#include <cstdio>
#include <memory>
#include <vector>

#include "porofeti/assembly.hpp"
#include "porofeti/feti.hpp"
#include "porofeti/mesh.hpp"
#include "porofeti/model.hpp"
#include "porofeti/state.hpp"

namespace porofeti {

struct TimeGrid {
  double T = 1.0;
  int N = 1;
  double tau = 1.0;

  TimeGrid() = default;
  TimeGrid(double T_, int N_) : T(T_), N(N_), tau(T_ / N_) {
    if (N < 1 || !(T > 0.0)) throw Error("TimeGrid: need N >= 1 and T > 0");
  }

  /// t_n = n tau, with the final time returned exactly.
  double time(int n) const { return n == N ? T : n * tau; }
};

inline TimeGrid time_grid_from_dt(double T, double dt) {
  if (!(dt > 0.0) || !(T > 0.0)) throw Error("time_grid_from_dt: need positive T and dt");
  const int N = std::max(1, static_cast<int>(std::llround(T / dt)));
  return TimeGrid(T, N);
}

/// Everything assembled once for a run: meshes, dof maps, constraints and
/// the constant-coefficient block system (matrices are time independent;
/// only right-hand sides change across steps).
struct Discretization {
  ModelParams params;
  Scenario scenario;
  int mesh_n = 16;
  int fe_order = 2;
  TimeGrid grid;
  Mesh mesh_P, mesh_E;
  DofMaps dofs;
  InterfacePairing pairing;
  ConstraintSet cs_P, cs_E;
  BlockSystem system;
};

inline Discretization build_discretization(const Scenario& scenario, const ModelParams& params,
                                           int mesh_n, int fe_order, const TimeGrid& grid) {
  Discretization d;
  d.params = params;
  d.scenario = scenario;
  d.mesh_n = mesh_n;
  d.fe_order = fe_order;
  d.grid = grid;
  const int ny = std::max(1, mesh_n / 2);
  d.mesh_P = tag_boundary_facets(
      build_subdomain_mesh(Subdomain::P, scenario.rect_P, mesh_n, ny), scenario.tag_rule_P);
  d.mesh_E = tag_boundary_facets(
      build_subdomain_mesh(Subdomain::E, scenario.rect_E, mesh_n, ny), scenario.tag_rule_E);
  d.dofs = build_all_dof_maps(d.mesh_P, d.mesh_E, fe_order);
  d.pairing = pair_interface(d.mesh_P, d.mesh_E, d.dofs.u_P, d.dofs.u_E);
  d.cs_P = build_constraints(d.mesh_P, d.dofs.u_P, d.dofs.s_P);
  d.cs_E = build_constraints(d.mesh_E, d.dofs.u_E, d.dofs.s_E);
  d.system = build_block_system(d.mesh_P, d.mesh_E, d.dofs, d.pairing, params, d.cs_P, d.cs_E,
                                grid.tau);
  return d;
}

/// Nodal interpolation of the initial data; eta and the elastic pressures
/// follow from the reformulation identities, the multiplier starts at zero.
inline StateSnapshot project_initial(const Discretization& d) {
  const Scenario& sc = d.scenario;
  StateSnapshot s;
  s.step = 0;
  s.time = 0.0;

  auto interp_u = [](const DofMap& map, const VectorFn& f) {
    Vector v(map.n_dofs);
    for (int n = 0; n < map.n_nodes; ++n) {
      const Vec2 val = f(map.node_coords[n], 0.0);
      v[map.dof(n, 0)] = val[0];
      v[map.dof(n, 1)] = val[1];
    }
    return v;
  };
  s.u_P = interp_u(d.dofs.u_P, sc.u0_P);
  s.u_E = interp_u(d.dofs.u_E, sc.u0_E);

  const int ns = d.dofs.s_P.n_dofs;
  s.p.resize(ns);
  s.eta.resize(ns);
  s.xi_P.resize(ns);
  for (int n = 0; n < ns; ++n) {
    const Vec2 x = d.dofs.s_P.node_coords[n];
    const double p0 = sc.p0(x, 0.0);
    const double div_u0 = sc.div_u0_P(x, 0.0);
    s.p[n] = p0;
    s.eta[n] = d.params.c0 * p0 + d.params.alpha * div_u0;
    s.xi_P[n] = d.params.alpha * p0 - d.params.lambda_P * div_u0;
  }
  s.xi_E.resize(d.dofs.s_E.n_dofs);
  for (int n = 0; n < d.dofs.s_E.n_dofs; ++n)
    s.xi_E[n] = -d.params.lambda_E * sc.div_u0_E(d.dofs.s_E.node_coords[n], 0.0);

  s.lambda = Vector::Zero(d.system.n_lambda);
  return s;
}

enum class SolverChoice { feti_generalized, feti_schur, monolithic };

inline const char* solver_name(SolverChoice s) {
  switch (s) {
    case SolverChoice::feti_generalized: return "feti-generalized";
    case SolverChoice::feti_schur: return "feti-schur";
    case SolverChoice::monolithic: return "monolithic";
  }
  return "?";
}

struct SolveOptions {
  SolverChoice solver = SolverChoice::feti_generalized;
  double tol = 1e-8;
  int max_iter = 500;
  bool warm_start = true;
  bool parallel = true;
  int stride = 1;
  bool verbose = false;
};

/// Per-step solver front end; factorizations are built once and reused.
class StepSolver {
 public:
  StepSolver(const Discretization& d, const SolveOptions& opts) : d_(&d), opts_(opts) {
    if (opts.solver == SolverChoice::monolithic) {
      mono_ = std::make_unique<MonolithicSolver>(d.system, d.dofs, d.params);
    } else {
      const FetiVariant variant = opts.solver == SolverChoice::feti_schur
                                      ? FetiVariant::schur
                                      : FetiVariant::generalized;
      feti_ = std::make_unique<FetiOperator>(d.system, d.dofs, variant, opts.parallel);
    }
  }

  const FetiOperator* feti() const { return feti_.get(); }

  StateSnapshot advance(const StateSnapshot& prev, PcgReport* report_out = nullptr) const {
    const int n = prev.step + 1;
    const double t = d_->grid.time(n);
    StateSnapshot next;
    try {
      if (mono_) {
        const Vector rhs = mono_->assemble_rhs(d_->mesh_P, d_->mesh_E, d_->dofs, d_->scenario,
                                               d_->params, t, prev.eta);
        next = mono_->solve(rhs);
        if (report_out) {
          report_out->step = n;
          report_out->variant = "monolithic";
          report_out->converged = true;
        }
      } else {
        const StepRhs rhs = assemble_rhs_step(d_->system, d_->mesh_P, d_->mesh_E, d_->dofs,
                                              d_->scenario, d_->params, t, prev.eta);
        const Vector F = feti_->interface_rhs(rhs);
        const Vector lambda0 =
            opts_.warm_start ? prev.lambda : Vector::Zero(d_->system.n_lambda).eval();
        auto [lambda, report] = feti_pcg(*feti_, F, lambda0, opts_.tol, opts_.max_iter);
        if (!report.converged)
          throw SolverError("PCG stalled at relative residual " +
                            std::to_string(report.rel_residual) + " after " +
                            std::to_string(report.iterations) + " iterations");
        const auto [x_P, x_E] = feti_->back_substitute(lambda, rhs);
        next = unpack_state(d_->system, x_P, x_E, lambda);
        report.step = n;
        if (report_out) *report_out = report;
      }
    } catch (const Error& e) {
      throw SolverError("step " + std::to_string(n) + ": " + e.what());
    }
    next.step = n;
    next.time = t;
    return next;
  }

 private:
  const Discretization* d_;
  SolveOptions opts_;
  std::unique_ptr<FetiOperator> feti_;
  std::unique_ptr<MonolithicSolver> mono_;
};

inline StateSnapshot advance_step(const StepSolver& solver, const StateSnapshot& prev,
                                  PcgReport* report = nullptr) {
  return solver.advance(prev, report);
}

struct SimulationResult {
  StateSnapshot initial;
  std::vector<StateSnapshot> snapshots;  // strided, final step always included
  std::vector<PcgReport> reports;        // one per step
};

inline SimulationResult run_simulation(const Discretization& d, const SolveOptions& opts) {
  SimulationResult result;
  result.initial = project_initial(d);
  StateSnapshot state = result.initial;
  const StepSolver solver(d, opts);
  for (int n = 1; n <= d.grid.N; ++n) {
    PcgReport report;
    state = solver.advance(state, &report);
    result.reports.push_back(report);
    if (opts.verbose)
      std::printf("step %5d  t=%-10.6g iters=%3d  residual=%.3e\n", n, state.time,
                  report.iterations, report.rel_residual);
    if (n % opts.stride == 0 || n == d.grid.N) result.snapshots.push_back(state);
  }
  return result;
}

}  // namespace porofeti
