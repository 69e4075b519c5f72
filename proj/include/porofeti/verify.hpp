#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <vector>

#include "porofeti/timeloop.hpp"

namespace porofeti {

namespace detail {

constexpr int kErrorQuadDegree = 4;

}  // namespace detail

/// Elementwise quadrature of (field_h - exact)^2, square root taken.
inline double l2_error_scalar(const Vector& coeffs, const ScalarFn& exact, const Mesh& mesh,
                              const DofMap& map, double t) {
  const QuadratureRule rule = triangle_rule(detail::kErrorQuadDegree);
  std::array<double, 6> vals;
  std::array<Vec2, 6> grads;
  double acc = 0.0;
  for (int tri = 0; tri < mesh.n_triangles(); ++tri) {
    const auto coords = mesh.triangle_coords(tri);
    const detail::AffineMap amap(coords);
    const std::vector<int> nodes = detail::local_disp_nodes(mesh, tri, map.order);
    for (int q = 0; q < rule.size(); ++q) {
      eval_basis(map.order, rule.points[q], vals.data(), grads.data());
      const Vec2 x = coords[0] + amap.jacobian * rule.points[q];
      double fh = 0.0;
      for (std::size_t i = 0; i < nodes.size(); ++i) fh += coeffs[map.dof(nodes[i])] * vals[i];
      const double diff = fh - exact(x, t);
      acc += rule.weights[q] * std::abs(amap.det) * diff * diff;
    }
  }
  return std::sqrt(acc);
}

inline double l2_error_vector(const Vector& coeffs, const VectorFn& exact, const Mesh& mesh,
                              const DofMap& map, double t) {
  const QuadratureRule rule = triangle_rule(detail::kErrorQuadDegree);
  std::array<double, 6> vals;
  std::array<Vec2, 6> grads;
  double acc = 0.0;
  for (int tri = 0; tri < mesh.n_triangles(); ++tri) {
    const auto coords = mesh.triangle_coords(tri);
    const detail::AffineMap amap(coords);
    const std::vector<int> nodes = detail::local_disp_nodes(mesh, tri, map.order);
    for (int q = 0; q < rule.size(); ++q) {
      eval_basis(map.order, rule.points[q], vals.data(), grads.data());
      const Vec2 x = coords[0] + amap.jacobian * rule.points[q];
      Vec2 fh = Vec2::Zero();
      for (std::size_t i = 0; i < nodes.size(); ++i)
        for (int c = 0; c < 2; ++c) fh[c] += coeffs[map.dof(nodes[i], c)] * vals[i];
      acc += rule.weights[q] * std::abs(amap.det) * (fh - exact(x, t)).squaredNorm();
    }
  }
  return std::sqrt(acc);
}

/// Displacement error over the union of both subdomains.
inline double snapshot_u_error(const Discretization& d, const StateSnapshot& s) {
  const ExactSolution& ex = *d.scenario.exact;
  const double eP = l2_error_vector(s.u_P, ex.u_P, d.mesh_P, d.dofs.u_P, s.time);
  const double eE = l2_error_vector(s.u_E, ex.u_E, d.mesh_E, d.dofs.u_E, s.time);
  return std::sqrt(eP * eP + eE * eE);
}

inline double snapshot_p_error(const Discretization& d, const StateSnapshot& s) {
  return l2_error_scalar(s.p, d.scenario.exact->p, d.mesh_P, d.dofs.s_P, s.time);
}

/// max over time steps of the spatial L2 error.
template <typename ErrFn>
double linf_l2_error(const std::vector<StateSnapshot>& snapshots, ErrFn&& err) {
  if (snapshots.empty()) throw Error("linf_l2_error: no snapshots");
  double m = 0.0;
  for (const auto& s : snapshots) m = std::max(m, err(s));
  return m;
}

inline double estimate_order(double err_coarse, double err_fine, double h_coarse, double h_fine) {
  return std::log(err_coarse / err_fine) / std::log(h_coarse / h_fine);
}

struct ErrorRow {
  double nu = 0.0, h = 0.0;
  double err_u = 0.0, order_u = std::numeric_limits<double>::quiet_NaN();
  double err_p = 0.0, order_p = std::numeric_limits<double>::quiet_NaN();
};

struct ErrorTable {
  std::vector<ErrorRow> rows;
};

struct StudyConfig {
  std::vector<int> mesh_sizes = {8, 16, 24, 32};
  std::vector<double> nus = {0.2, 0.49, 0.499, 0.4999};
  int fe_order = 2;
  double E = 1e4;
  double T = 1e-2;
  double dt = 1e-3;
  MuConvention mu_convention = MuConvention::paper;
  SolveOptions solve;
  bool verbose = false;
};

/// One manufactured-solution run; returns the L-inf(L2) errors of u and p.
inline std::pair<double, double> mms_errors(const StudyConfig& cfg, double nu, int mesh_n) {
  const ModelParams params = default_params(cfg.E, nu, cfg.mu_convention);
  const Scenario scenario = mms_scenario(params);
  const Discretization d = build_discretization(scenario, params, mesh_n, cfg.fe_order,
                                                time_grid_from_dt(cfg.T, cfg.dt));
  SolveOptions opts = cfg.solve;
  opts.verbose = false;
  const SimulationResult result = run_simulation(d, opts);
  const double eu =
      linf_l2_error(result.snapshots, [&](const StateSnapshot& s) { return snapshot_u_error(d, s); });
  const double ep =
      linf_l2_error(result.snapshots, [&](const StateSnapshot& s) { return snapshot_p_error(d, s); });
  return {eu, ep};
}

/// Rows per (nu, h); a failed solve drops its row and the study continues.
inline ErrorTable convergence_study(const StudyConfig& cfg) {
  ErrorTable table;
  for (double nu : cfg.nus) {
    ErrorRow prev;
    bool have_prev = false;
    for (int n : cfg.mesh_sizes) {
      const double h = 1.0 / n;
      try {
        const auto [eu, ep] = mms_errors(cfg, nu, n);
        ErrorRow row;
        row.nu = nu;
        row.h = h;
        row.err_u = eu;
        row.err_p = ep;
        if (have_prev) {
          row.order_u = estimate_order(prev.err_u, eu, prev.h, h);
          row.order_p = estimate_order(prev.err_p, ep, prev.h, h);
        }
        if (cfg.verbose)
          std::printf("nu=%-7g h=1/%-3d  err_u=%.6e ord_u=%6.3f  err_p=%.6e ord_p=%6.3f\n", nu, n,
                      row.err_u, row.order_u, row.err_p, row.order_p);
        table.rows.push_back(row);
        prev = row;
        have_prev = true;
      } catch (const Error& e) {
        std::fprintf(stderr, "convergence_study: run nu=%g n=%d failed: %s\n", nu, n, e.what());
        have_prev = false;
      }
    }
  }
  return table;
}

struct OscillationReport {
  bool pass = true;
  double min_p = 0.0, max_p = 0.0;
  double lower_bound = 0.0, upper_bound = 0.0;
  double worst_violation = 0.0;  // the offending nodal value, 0 when passing
};

/// Nodal pressure must stay within [-delta, max_boundary + delta] at every
/// step; the worst offender is reported.
inline OscillationReport oscillation_check(const std::vector<StateSnapshot>& snapshots,
                                           double max_boundary, double delta) {
  OscillationReport rep;
  rep.lower_bound = -delta;
  rep.upper_bound = max_boundary + delta;
  rep.min_p = std::numeric_limits<double>::infinity();
  rep.max_p = -std::numeric_limits<double>::infinity();
  for (const auto& s : snapshots) {
    if (s.p.size() == 0) continue;
    rep.min_p = std::min(rep.min_p, s.p.minCoeff());
    rep.max_p = std::max(rep.max_p, s.p.maxCoeff());
  }
  if (!std::isfinite(rep.min_p)) {
    rep.min_p = rep.max_p = 0.0;
  }
  double worst = 0.0;
  if (rep.min_p < rep.lower_bound && rep.lower_bound - rep.min_p > worst) {
    worst = rep.lower_bound - rep.min_p;
    rep.worst_violation = rep.min_p;
    rep.pass = false;
  }
  if (rep.max_p > rep.upper_bound && rep.max_p - rep.upper_bound > worst) {
    rep.worst_violation = rep.max_p;
    rep.pass = false;
  }
  return rep;
}

}  // namespace porofeti
