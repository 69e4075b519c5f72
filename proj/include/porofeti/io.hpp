#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "porofeti/timeloop.hpp"
#include "porofeti/verify.hpp"

namespace porofeti {

namespace detail {

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace detail

/// Legacy ASCII VTK dump of one triangulation.
inline void write_mesh_vtk(const Mesh& mesh, const std::string& path) {
  std::ofstream out = detail::open_out(path);
  out << "# vtk DataFile Version 3.0\n"
      << "porofeti mesh " << subdomain_name(mesh.subdomain) << "\n"
      << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.n_vertices() << " double\n";
  for (const auto& v : mesh.vertices)
    out << detail::num(v.x()) << " " << detail::num(v.y()) << " 0\n";
  out << "CELLS " << mesh.n_triangles() << " " << 4 * mesh.n_triangles() << "\n";
  for (const auto& t : mesh.triangles) out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
  out << "CELL_TYPES " << mesh.n_triangles() << "\n";
  for (int t = 0; t < mesh.n_triangles(); ++t) out << "5\n";
}

/// Union-mesh VTK snapshot: both subdomain triangulations appended, point
/// data subsampled to vertices (P2 midside values dropped). Fields that
/// only live on the pay zone are zero on the elastic points.
inline void write_solution_vtk(const Discretization& d, const StateSnapshot& s,
                               const std::string& path) {
  std::ofstream out = detail::open_out(path);
  const Mesh& mp = d.mesh_P;
  const Mesh& me = d.mesh_E;
  const int np = mp.n_vertices(), ne = me.n_vertices();
  out << "# vtk DataFile Version 3.0\n"
      << "porofeti solution step " << s.step << "\n"
      << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << np + ne << " double\n";
  for (const auto& v : mp.vertices) out << detail::num(v.x()) << " " << detail::num(v.y()) << " 0\n";
  for (const auto& v : me.vertices) out << detail::num(v.x()) << " " << detail::num(v.y()) << " 0\n";
  const int nt = mp.n_triangles() + me.n_triangles();
  out << "CELLS " << nt << " " << 4 * nt << "\n";
  for (const auto& t : mp.triangles) out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
  for (const auto& t : me.triangles)
    out << "3 " << np + t[0] << " " << np + t[1] << " " << np + t[2] << "\n";
  out << "CELL_TYPES " << nt << "\n";
  for (int t = 0; t < nt; ++t) out << "5\n";

  out << "POINT_DATA " << np + ne << "\n";
  out << "VECTORS displacement double\n";
  for (int v = 0; v < np; ++v)
    out << detail::num(s.u_P[d.dofs.u_P.dof(v, 0)]) << " " << detail::num(s.u_P[d.dofs.u_P.dof(v, 1)])
        << " 0\n";
  for (int v = 0; v < ne; ++v)
    out << detail::num(s.u_E[d.dofs.u_E.dof(v, 0)]) << " " << detail::num(s.u_E[d.dofs.u_E.dof(v, 1)])
        << " 0\n";
  auto scalar = [&](const char* name, const Vector& on_P, const Vector* on_E) {
    out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (int v = 0; v < np; ++v) out << detail::num(on_P[v]) << "\n";
    for (int v = 0; v < ne; ++v) out << detail::num(on_E ? (*on_E)[v] : 0.0) << "\n";
  };
  scalar("pressure", s.p, nullptr);
  scalar("elastic_pressure", s.xi_P, &s.xi_E);
  scalar("fluid_content", s.eta, nullptr);
}

inline void write_matrix_market(const SparseMatrix& M, const std::string& path) {
  std::ofstream out = detail::open_out(path);
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << M.rows() << " " << M.cols() << " " << M.nonZeros() << "\n";
  for (int col = 0; col < M.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(M, col); it; ++it)
      out << it.row() + 1 << " " << it.col() + 1 << " " << detail::num(it.value()) << "\n";
}

inline void write_error_table_csv(const ErrorTable& table, const std::string& path) {
  std::ofstream out = detail::open_out(path);
  out << "nu,h,err_u,order_u,err_p,order_p\n";
  for (const auto& r : table.rows) {
    out << detail::num(r.nu) << "," << detail::num(r.h) << "," << detail::num(r.err_u) << ",";
    if (std::isfinite(r.order_u)) out << detail::num(r.order_u);
    out << "," << detail::num(r.err_p) << ",";
    if (std::isfinite(r.order_p)) out << detail::num(r.order_p);
    out << "\n";
  }
}

inline void write_solver_log_csv(const std::vector<PcgReport>& reports, const std::string& path) {
  std::ofstream out = detail::open_out(path);
  out << "step,variant,iterations,residual,time_p,time_e\n";
  for (const auto& r : reports)
    out << r.step << "," << r.variant << "," << r.iterations << "," << detail::num(r.rel_residual)
        << "," << detail::num(r.time_P) << "," << detail::num(r.time_E) << "\n";
}

inline std::string snapshot_filename(int step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "step_%06d.vtk", step);
  return buf;
}

/// VTK per strided snapshot plus the solver CSV log; returns written paths.
inline std::vector<std::string> write_outputs(const Discretization& d,
                                              const SimulationResult& result,
                                              const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> written;
  for (const auto& s : result.snapshots) {
    const std::string path = dir + "/" + snapshot_filename(s.step);
    write_solution_vtk(d, s, path);
    written.push_back(path);
  }
  const std::string log = dir + "/solver_log.csv";
  write_solver_log_csv(result.reports, log);
  written.push_back(log);
  return written;
}

inline void dump_blocks_matrix_market(const BlockSystem& bs, const std::string& dir) {
  std::filesystem::create_directories(dir);
  write_matrix_market(bs.raw_P.A, dir + "/A_P.mtx");
  write_matrix_market(bs.raw_P.B, dir + "/B_P.mtx");
  write_matrix_market(bs.raw_P.R, dir + "/R_P.mtx");
  write_matrix_market(bs.raw_P.Af, dir + "/A_f.mtx");
  write_matrix_market(bs.raw_E.A, dir + "/A_E.mtx");
  write_matrix_market(bs.raw_E.B, dir + "/B_E.mtx");
  write_matrix_market(bs.raw_E.R, dir + "/R_E.mtx");
  write_matrix_market(bs.H_P_full, dir + "/H_P.mtx");
  write_matrix_market(bs.H_E_full, dir + "/H_E.mtx");
}

}  // namespace porofeti
