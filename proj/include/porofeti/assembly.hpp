#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <utility>
#include <vector>

#include "porofeti/core.hpp"
#include "porofeti/elements.hpp"
#include "porofeti/mesh.hpp"
#include "porofeti/model.hpp"

namespace porofeti {

/// One essential condition: a dof of a field pinned to a (possibly
/// time-dependent) boundary value evaluated at its node.
struct Constraint {
  FieldKind field = FieldKind::displacement;
  int dof = -1;  // within the field's dof map
  Vec2 coords = Vec2::Zero();
  int component = 0;
};

struct ConstraintSet {
  Subdomain subdomain = Subdomain::P;
  std::vector<Constraint> u_constraints;  // displacement dofs
  std::vector<Constraint> p_constraints;  // fluid pressure dofs (P only)
};

namespace detail {

inline std::vector<int> edge_disp_nodes(const Mesh& mesh, const DofMap& u_map, int edge) {
  std::vector<int> nodes = {mesh.edges[edge][0], mesh.edges[edge][1]};
  if (u_map.order == 2) nodes.push_back(mesh.n_vertices() + edge);
  return nodes;
}

}  // namespace detail

inline ConstraintSet build_constraints(const Mesh& mesh, const DofMap& u_map,
                                       const DofMap& s_map) {
  if (!mesh.tagged) throw AssemblyError("build_constraints: mesh boundary is untagged");
  ConstraintSet cs;
  cs.subdomain = mesh.subdomain;
  std::map<int, Constraint> u_set, p_set;
  for (const auto& bf : mesh.boundary) {
    if (bf.tag.interface_edge) continue;
    for (int c = 0; c < 2; ++c) {
      if (!bf.tag.component_essential(c)) continue;
      for (int node : detail::edge_disp_nodes(mesh, u_map, bf.edge)) {
        const int dof = u_map.dof(node, c);
        u_set.emplace(dof, Constraint{FieldKind::displacement, dof, u_map.node_coords[node], c});
      }
    }
    if (mesh.subdomain == Subdomain::P && bf.tag.pressure == FacetTag::Pressure::dirichlet) {
      for (int node : {mesh.edges[bf.edge][0], mesh.edges[bf.edge][1]}) {
        p_set.emplace(node, Constraint{FieldKind::fluid_pressure, node,
                                       s_map.node_coords[node], 0});
      }
    }
  }
  for (auto& [dof, c] : u_set) cs.u_constraints.push_back(c);
  for (auto& [dof, c] : p_set) cs.p_constraints.push_back(c);
  return cs;
}

/// Pointwise values of a constraint set at time t, ordered like the set.
inline Vector constraint_values(const ConstraintSet& cs, const Scenario& scenario, double t) {
  const VectorFn& u_bc = cs.subdomain == Subdomain::P ? scenario.u_bc_P : scenario.u_bc_E;
  Vector g(cs.u_constraints.size() + cs.p_constraints.size());
  int k = 0;
  for (const auto& c : cs.u_constraints) g[k++] = u_bc(c.coords, t)[c.component];
  for (const auto& c : cs.p_constraints) g[k++] = scenario.p_bc(c.coords, t);
  return g;
}

/// The Lagrange multiplier space: vector P1 on the interface vertex mesh,
/// with (node, component) pairs dropped where the matching displacement
/// trace dofs are essentially constrained on both sides (those continuity
/// rows would be identically zero after elimination).
struct MultiplierMap {
  int n_nodes = 0;
  std::vector<int> kept;          // kept full dofs, full dof = 2 * node + c
  std::vector<int> full_to_kept;  // -1 where dropped
  int n_full = 0;
  int n_dofs = 0;
};

inline MultiplierMap build_multiplier_map(const InterfacePairing& pairing, const DofMap& u_P,
                                          const DofMap& u_E, const ConstraintSet& cs_P,
                                          const ConstraintSet& cs_E) {
  MultiplierMap mm;
  mm.n_nodes = static_cast<int>(pairing.mult_vertices_P.size());
  mm.n_full = 2 * mm.n_nodes;
  mm.full_to_kept.assign(mm.n_full, -1);

  std::map<int, int> paired_E;  // P node -> E node
  for (const auto& [np, ne] : pairing.node_pairs) paired_E[np] = ne;

  auto constrained = [](const ConstraintSet& cs, int dof) {
    return std::any_of(cs.u_constraints.begin(), cs.u_constraints.end(),
                       [dof](const Constraint& c) { return c.dof == dof; });
  };

  for (int k = 0; k < mm.n_nodes; ++k) {
    const int node_P = pairing.mult_vertices_P[k];
    const int node_E = paired_E.at(node_P);
    for (int c = 0; c < 2; ++c) {
      const bool dropped = constrained(cs_P, u_P.dof(node_P, c)) &&
                           constrained(cs_E, u_E.dof(node_E, c));
      if (!dropped) {
        mm.full_to_kept[2 * k + c] = static_cast<int>(mm.kept.size());
        mm.kept.push_back(2 * k + c);
      }
    }
  }
  mm.n_dofs = static_cast<int>(mm.kept.size());
  return mm;
}

/// Raw per-subdomain sparse blocks before boundary conditions.
struct SubdomainBlocks {
  Subdomain subdomain = Subdomain::P;
  SparseMatrix A;   // elastic stiffness, u x u
  SparseMatrix B;   // div coupling, scalar x u
  SparseMatrix R;   // scalar mass
  SparseMatrix Af;  // pressure diffusion (P only)
};

namespace detail {

inline std::vector<int> local_disp_nodes(const Mesh& mesh, int t, int order) {
  const auto& tri = mesh.triangles[t];
  std::vector<int> nodes = {tri[0], tri[1], tri[2]};
  if (order == 2) {
    const auto& te = mesh.tri_edges[t];
    const int nv = mesh.n_vertices();
    nodes.push_back(nv + te[2]);  // midpoint of (v0, v1)
    nodes.push_back(nv + te[0]);  // midpoint of (v1, v2)
    nodes.push_back(nv + te[1]);  // midpoint of (v2, v0)
  }
  return nodes;
}

}  // namespace detail

inline SubdomainBlocks assemble_subdomain_blocks(const Mesh& mesh, const DofMap& u_map,
                                                 const DofMap& s_map, const ModelParams& params) {
  SubdomainBlocks blocks;
  blocks.subdomain = mesh.subdomain;
  const double mu = mesh.subdomain == Subdomain::P ? params.mu_P : params.mu_E;

  std::vector<Triplet> ta, tb, tr, tf;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto tri = mesh.triangle_coords(t);
    const std::vector<int> un = detail::local_disp_nodes(mesh, t, u_map.order);
    const auto& sn = mesh.triangles[t];
    const int nb = static_cast<int>(un.size());

    const LocalMatrix la = local_elastic_matrix(tri, mu, u_map.order);
    for (int i = 0; i < nb; ++i)
      for (int ci = 0; ci < 2; ++ci)
        for (int j = 0; j < nb; ++j)
          for (int cj = 0; cj < 2; ++cj)
            ta.emplace_back(u_map.dof(un[i], ci), u_map.dof(un[j], cj),
                            la.entries(2 * i + ci, 2 * j + cj));

    const LocalMatrix lb = local_div_matrix(tri, u_map.order);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < nb; ++j)
        for (int cj = 0; cj < 2; ++cj)
          tb.emplace_back(sn[i], u_map.dof(un[j], cj), lb.entries(i, 2 * j + cj));

    const LocalMatrix lr = local_mass_matrix(tri);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) tr.emplace_back(sn[i], sn[j], lr.entries(i, j));

    if (mesh.subdomain == Subdomain::P) {
      const LocalMatrix lf = local_diffusion_matrix(tri, params.K, params.mu_f);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) tf.emplace_back(sn[i], sn[j], lf.entries(i, j));
    }
  }

  blocks.A.resize(u_map.n_dofs, u_map.n_dofs);
  blocks.A.setFromTriplets(ta.begin(), ta.end());
  blocks.B.resize(s_map.n_dofs, u_map.n_dofs);
  blocks.B.setFromTriplets(tb.begin(), tb.end());
  blocks.R.resize(s_map.n_dofs, s_map.n_dofs);
  blocks.R.setFromTriplets(tr.begin(), tr.end());
  if (mesh.subdomain == Subdomain::P) {
    blocks.Af.resize(s_map.n_dofs, s_map.n_dofs);
    blocks.Af.setFromTriplets(tf.begin(), tf.end());
  }
  return blocks;
}

/// Full (unrestricted) interface coupling matrices: multiplier rows against
/// trace columns, identical on paired columns for conforming meshes.
inline std::pair<SparseMatrix, SparseMatrix> assemble_interface(const Mesh& mesh_P,
                                                                const Mesh& mesh_E,
                                                                const DofMap& u_P,
                                                                const DofMap& u_E,
                                                                const InterfacePairing& pairing) {
  if (pairing.edge_list.empty()) throw AssemblyError("assemble_interface: empty interface");
  const int n_full = 2 * static_cast<int>(pairing.mult_vertices_P.size());
  std::map<int, int> mult_pos;  // P vertex node -> multiplier node index
  for (std::size_t k = 0; k < pairing.mult_vertices_P.size(); ++k)
    mult_pos[pairing.mult_vertices_P[k]] = static_cast<int>(k);

  std::vector<Triplet> tp, te;
  for (const auto& ie : pairing.edge_list) {
    const std::array<int, 2> mrow = {mult_pos.at(ie.vertices_P[0]), mult_pos.at(ie.vertices_P[1])};
    const Vec2 a = mesh_P.vertices[ie.vertices_P[0]], b = mesh_P.vertices[ie.vertices_P[1]];
    const LocalMatrix lm = local_interface_matrix(a, b, u_P.order);

    std::vector<int> cols_P = {ie.vertices_P[0], ie.vertices_P[1]};
    std::vector<int> cols_E = {ie.vertices_E[0], ie.vertices_E[1]};
    if (u_P.order == 2) {
      cols_P.push_back(mesh_P.n_vertices() + ie.edge_P);
      cols_E.push_back(mesh_E.n_vertices() + ie.edge_E);
    }
    for (int i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < cols_P.size(); ++j)
        for (int c = 0; c < 2; ++c) {
          tp.emplace_back(2 * mrow[i] + c, u_P.dof(cols_P[j], c), lm.entries(i, j));
          te.emplace_back(2 * mrow[i] + c, u_E.dof(cols_E[j], c), lm.entries(i, j));
        }
  }
  SparseMatrix H_P(n_full, u_P.n_dofs), H_E(n_full, u_E.n_dofs);
  H_P.setFromTriplets(tp.begin(), tp.end());
  H_E.setFromTriplets(te.begin(), te.end());
  return {H_P, H_E};
}

/// Symmetric elimination of essential dofs: constrained rows and columns are
/// zeroed, the diagonal set to one, and the dropped columns are returned so
/// per-step right-hand sides can be lifted.
struct Elimination {
  SparseMatrix matrix;
  SparseMatrix lift;            // n x nC, original columns at constrained dofs, free rows only
  std::vector<int> constrained; // ascending
};

inline Elimination apply_constraints(const SparseMatrix& M, std::vector<int> constrained) {
  std::sort(constrained.begin(), constrained.end());
  constrained.erase(std::unique(constrained.begin(), constrained.end()), constrained.end());
  std::vector<int> pos(M.rows(), -1);
  for (std::size_t k = 0; k < constrained.size(); ++k) pos[constrained[k]] = static_cast<int>(k);

  std::vector<Triplet> tm, tl;
  for (int col = 0; col < M.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(M, col); it; ++it) {
      const bool row_c = pos[it.row()] >= 0, col_c = pos[it.col()] >= 0;
      if (!row_c && !col_c)
        tm.emplace_back(it.row(), it.col(), it.value());
      else if (!row_c && col_c)
        tl.emplace_back(it.row(), pos[it.col()], it.value());
    }
  }
  for (int c : constrained) tm.emplace_back(c, c, 1.0);

  Elimination out;
  out.matrix.resize(M.rows(), M.cols());
  out.matrix.setFromTriplets(tm.begin(), tm.end());
  out.lift.resize(M.rows(), static_cast<int>(constrained.size()));
  out.lift.setFromTriplets(tl.begin(), tl.end());
  out.constrained = std::move(constrained);
  return out;
}

inline void lift_rhs(Vector& rhs, const Elimination& elim, const Vector& values) {
  rhs -= elim.lift * values;
  for (std::size_t k = 0; k < elim.constrained.size(); ++k) rhs[elim.constrained[k]] = values[k];
}

/// One subdomain's saddle system [[A*, (B*)^T], [B*, -C*]] in the grouped
/// ordering (P side: u, eta | xi, p; E side: u | xi), with its constraint
/// elimination baked in.
struct SubdomainSystem {
  Subdomain subdomain = Subdomain::P;
  int n_u = 0, n_s = 0, dim = 0;
  int off_u = 0, off_eta = 0, off_xi = 0, off_p = 0;
  Elimination saddle;              // constrained saddle matrix + lifting
  std::vector<Constraint> constraints;  // ordered like saddle.constrained
};

/// The coupled per-step system: both subdomain saddles, the (restricted,
/// eliminated, signed) multiplier coupling maps, and the pieces needed to
/// rebuild right-hand sides each step.
struct BlockSystem {
  SubdomainBlocks raw_P, raw_E;
  SparseMatrix H_P_full, H_E_full;
  MultiplierMap lambda_map;
  SubdomainSystem P, E;
  SparseMatrix G_P, G_E;    // signed coupling: G_P = +H_P, G_E = -H_E (kept rows, saddle cols)
  SparseMatrix H_P_c, H_E_c;  // kept multiplier rows against constrained saddle dofs
  double tau = 0.0;
  int n_lambda = 0;
};

namespace detail {

inline void scatter_block(std::vector<Triplet>& ts, const SparseMatrix& M, int row_off, int col_off,
                          double scale) {
  for (int col = 0; col < M.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(M, col); it; ++it)
      ts.emplace_back(row_off + it.row(), col_off + it.col(), scale * it.value());
}

inline void scatter_block_t(std::vector<Triplet>& ts, const SparseMatrix& M, int row_off,
                            int col_off, double scale) {
  for (int col = 0; col < M.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(M, col); it; ++it)
      ts.emplace_back(row_off + it.col(), col_off + it.row(), scale * it.value());
}

inline std::vector<int> saddle_constrained(const SubdomainSystem& sys,
                                           const ConstraintSet& cs,
                                           std::vector<Constraint>* info) {
  std::vector<std::pair<int, Constraint>> items;
  for (const auto& c : cs.u_constraints) items.emplace_back(sys.off_u + c.dof, c);
  if (sys.subdomain == Subdomain::P)
    for (const auto& c : cs.p_constraints) items.emplace_back(sys.off_p + c.dof, c);
  std::sort(items.begin(), items.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<int> idx;
  for (auto& [i, c] : items) {
    idx.push_back(i);
    if (info) info->push_back(c);
  }
  return idx;
}

}  // namespace detail

inline BlockSystem build_block_system(const Mesh& mesh_P, const Mesh& mesh_E, const DofMaps& dofs,
                                      const InterfacePairing& pairing, const ModelParams& params,
                                      const ConstraintSet& cs_P, const ConstraintSet& cs_E,
                                      double tau) {
  if (tau <= 0.0) throw AssemblyError("build_block_system: time step must be positive");
  BlockSystem bs;
  bs.tau = tau;
  bs.raw_P = assemble_subdomain_blocks(mesh_P, dofs.u_P, dofs.s_P, params);
  bs.raw_E = assemble_subdomain_blocks(mesh_E, dofs.u_E, dofs.s_E, params);
  std::tie(bs.H_P_full, bs.H_E_full) =
      assemble_interface(mesh_P, mesh_E, dofs.u_P, dofs.u_E, pairing);
  bs.lambda_map = build_multiplier_map(pairing, dofs.u_P, dofs.u_E, cs_P, cs_E);
  bs.n_lambda = bs.lambda_map.n_dofs;

  // P-side saddle: [u, eta | xi, p]
  SubdomainSystem& P = bs.P;
  P.subdomain = Subdomain::P;
  P.n_u = dofs.u_P.n_dofs;
  P.n_s = dofs.s_P.n_dofs;
  P.off_u = 0;
  P.off_eta = P.n_u;
  P.off_xi = P.n_u + P.n_s;
  P.off_p = P.n_u + 2 * P.n_s;
  P.dim = P.n_u + 3 * P.n_s;
  {
    std::vector<Triplet> ts;
    detail::scatter_block(ts, bs.raw_P.A, P.off_u, P.off_u, 1.0);
    detail::scatter_block(ts, bs.raw_P.R, P.off_eta, P.off_eta, params.kappa2);
    detail::scatter_block_t(ts, bs.raw_P.B, P.off_u, P.off_xi, 1.0);
    detail::scatter_block(ts, bs.raw_P.R, P.off_eta, P.off_xi, params.kappa1);
    detail::scatter_block(ts, bs.raw_P.R, P.off_eta, P.off_p, -1.0);
    detail::scatter_block(ts, bs.raw_P.B, P.off_xi, P.off_u, 1.0);
    detail::scatter_block(ts, bs.raw_P.R, P.off_xi, P.off_eta, params.kappa1);
    detail::scatter_block(ts, bs.raw_P.R, P.off_xi, P.off_xi, -params.kappa3);
    detail::scatter_block(ts, bs.raw_P.R, P.off_p, P.off_eta, -1.0);
    detail::scatter_block(ts, bs.raw_P.Af, P.off_p, P.off_p, -tau);
    SparseMatrix M(P.dim, P.dim);
    M.setFromTriplets(ts.begin(), ts.end());
    const std::vector<int> idx = detail::saddle_constrained(P, cs_P, &P.constraints);
    P.saddle = apply_constraints(M, idx);
  }

  // E-side saddle: [u | xi]
  SubdomainSystem& E = bs.E;
  E.subdomain = Subdomain::E;
  E.n_u = dofs.u_E.n_dofs;
  E.n_s = dofs.s_E.n_dofs;
  E.off_u = 0;
  E.off_xi = E.n_u;
  E.dim = E.n_u + E.n_s;
  {
    std::vector<Triplet> ts;
    detail::scatter_block(ts, bs.raw_E.A, E.off_u, E.off_u, 1.0);
    detail::scatter_block_t(ts, bs.raw_E.B, E.off_u, E.off_xi, 1.0);
    detail::scatter_block(ts, bs.raw_E.B, E.off_xi, E.off_u, 1.0);
    detail::scatter_block(ts, bs.raw_E.R, E.off_xi, E.off_xi, -1.0 / params.lambda_E);
    SparseMatrix M(E.dim, E.dim);
    M.setFromTriplets(ts.begin(), ts.end());
    const std::vector<int> idx = detail::saddle_constrained(E, cs_E, &E.constraints);
    E.saddle = apply_constraints(M, idx);
  }

  // Coupling maps: restrict multiplier rows, drop constrained columns, sign E.
  auto build_G = [&](const SparseMatrix& H_full, const SubdomainSystem& sys, double sign,
                     SparseMatrix& G, SparseMatrix& H_c) {
    std::vector<int> cpos(sys.dim, -1);
    for (std::size_t k = 0; k < sys.saddle.constrained.size(); ++k)
      cpos[sys.saddle.constrained[k]] = static_cast<int>(k);
    std::vector<Triplet> tg, tc;
    for (int col = 0; col < H_full.outerSize(); ++col) {
      for (SparseMatrix::InnerIterator it(H_full, col); it; ++it) {
        const int kept = bs.lambda_map.full_to_kept[it.row()];
        if (kept < 0) continue;
        const int saddle_col = sys.off_u + it.col();
        if (cpos[saddle_col] >= 0)
          tc.emplace_back(kept, cpos[saddle_col], it.value());
        else
          tg.emplace_back(kept, saddle_col, sign * it.value());
      }
    }
    G.resize(bs.n_lambda, sys.dim);
    G.setFromTriplets(tg.begin(), tg.end());
    H_c.resize(bs.n_lambda, static_cast<int>(sys.saddle.constrained.size()));
    H_c.setFromTriplets(tc.begin(), tc.end());
  };
  build_G(bs.H_P_full, bs.P, +1.0, bs.G_P, bs.H_P_c);
  build_G(bs.H_E_full, bs.E, -1.0, bs.G_E, bs.H_E_c);
  return bs;
}

/// Raw load vectors at time t: body forces, boundary tractions, and the
/// mass-balance source row Z = (z, phi) + <z_w, phi>_f + (rho_f/mu_f)(K g, grad phi).
struct StepLoads {
  Vector F_P, F_E, Z;
};

namespace detail {

inline void add_body_loads(const Mesh& mesh, const DofMap& u_map, const VectorFn& f, double t,
                           Vector& F) {
  const QuadratureRule rule = triangle_rule(kLocalFormDegree);
  std::array<double, 6> vals;
  std::array<Vec2, 6> grads;
  for (int tri = 0; tri < mesh.n_triangles(); ++tri) {
    const auto coords = mesh.triangle_coords(tri);
    const AffineMap map(coords);
    const std::vector<int> nodes = local_disp_nodes(mesh, tri, u_map.order);
    for (int q = 0; q < rule.size(); ++q) {
      eval_basis(u_map.order, rule.points[q], vals.data(), grads.data());
      const Vec2 x = coords[0] + map.jacobian * rule.points[q];
      const Vec2 fx = f(x, t);
      const double w = rule.weights[q] * std::abs(map.det);
      for (std::size_t i = 0; i < nodes.size(); ++i)
        for (int c = 0; c < 2; ++c) F[u_map.dof(nodes[i], c)] += w * vals[i] * fx[c];
    }
  }
}

inline void add_traction_loads(const Mesh& mesh, const DofMap& u_map, const VectorFn& traction,
                               double t, Vector& F) {
  const QuadratureRule rule = edge_rule(5);
  std::array<double, 3> vals;
  for (const auto& bf : mesh.boundary) {
    if (bf.tag.interface_edge) continue;
    const Vec2 a = mesh.vertices[mesh.edges[bf.edge][0]];
    const Vec2 b = mesh.vertices[mesh.edges[bf.edge][1]];
    const double len = (b - a).norm();
    std::vector<int> nodes = {mesh.edges[bf.edge][0], mesh.edges[bf.edge][1]};
    if (u_map.order == 2) nodes.push_back(mesh.n_vertices() + bf.edge);
    for (int q = 0; q < rule.size(); ++q) {
      const double s = rule.points[q].x();
      eval_edge_basis(u_map.order, s, vals.data());
      const Vec2 x = a + s * (b - a);
      const Vec2 tx = traction(x, t);
      const double w = rule.weights[q] * len;
      for (std::size_t i = 0; i < nodes.size(); ++i)
        for (int c = 0; c < 2; ++c) F[u_map.dof(nodes[i], c)] += w * vals[i] * tx[c];
    }
  }
}

}  // namespace detail

inline StepLoads assemble_loads(const Mesh& mesh_P, const Mesh& mesh_E, const DofMaps& dofs,
                                const Scenario& scenario, const ModelParams& params, double t) {
  StepLoads loads;
  loads.F_P = Vector::Zero(dofs.u_P.n_dofs);
  loads.F_E = Vector::Zero(dofs.u_E.n_dofs);
  loads.Z = Vector::Zero(dofs.s_P.n_dofs);

  detail::add_body_loads(mesh_P, dofs.u_P, scenario.f_P, t, loads.F_P);
  detail::add_body_loads(mesh_E, dofs.u_E, scenario.f_E, t, loads.F_E);
  detail::add_traction_loads(mesh_P, dofs.u_P, scenario.traction_P, t, loads.F_P);
  detail::add_traction_loads(mesh_E, dofs.u_E, scenario.traction_E, t, loads.F_E);

  // volumetric source (z, phi)
  {
    const QuadratureRule rule = triangle_rule(detail::kLocalFormDegree);
    std::array<double, 3> vals;
    std::array<Vec2, 3> grads;
    for (int tri = 0; tri < mesh_P.n_triangles(); ++tri) {
      const auto coords = mesh_P.triangle_coords(tri);
      const detail::AffineMap map(coords);
      const auto& sn = mesh_P.triangles[tri];
      for (int q = 0; q < rule.size(); ++q) {
        eval_basis(1, rule.points[q], vals.data(), grads.data());
        const Vec2 x = coords[0] + map.jacobian * rule.points[q];
        const double zq = scenario.z_source(x, t);
        const double w = rule.weights[q] * std::abs(map.det);
        for (int i = 0; i < 3; ++i) loads.Z[sn[i]] += w * vals[i] * zq;
      }
      // gravity term (rho_f/mu_f)(K g, grad phi)
      if (params.rho_f != 0.0 && params.gravity.squaredNorm() > 0.0) {
        const Vec2 kg = (params.rho_f / params.mu_f) * (params.K * params.gravity);
        eval_basis(1, Vec2(1.0 / 3.0, 1.0 / 3.0), vals.data(), grads.data());
        const double area = 0.5 * std::abs(map.det);
        for (int i = 0; i < 3; ++i)
          loads.Z[sn[i]] += area * kg.dot(map.jacobian_inv_t * grads[i]);
      }
    }
  }
  // boundary flux <z_w, phi>_f
  {
    const QuadratureRule rule = edge_rule(5);
    std::array<double, 2> vals;
    for (const auto& bf : mesh_P.boundary) {
      if (bf.tag.pressure != FacetTag::Pressure::flux) continue;
      const Vec2 a = mesh_P.vertices[mesh_P.edges[bf.edge][0]];
      const Vec2 b = mesh_P.vertices[mesh_P.edges[bf.edge][1]];
      const double len = (b - a).norm();
      for (int q = 0; q < rule.size(); ++q) {
        const double s = rule.points[q].x();
        eval_edge_basis(1, s, vals.data());
        const Vec2 x = a + s * (b - a);
        const double zw = scenario.flux_zw(x, t);
        const double w = rule.weights[q] * len;
        loads.Z[mesh_P.edges[bf.edge][0]] += w * vals[0] * zw;
        loads.Z[mesh_P.edges[bf.edge][1]] += w * vals[1] * zw;
      }
    }
  }
  return loads;
}

/// Per-step right-hand sides of both subdomain saddles plus the multiplier
/// row, boundary lifting applied at time t.
struct StepRhs {
  Vector b_P, b_E;  // constrained saddle right-hand sides
  Vector d;         // multiplier row right-hand side
  Vector g_P, g_E;  // essential values used for the lifting
};

inline StepRhs assemble_rhs_step(const BlockSystem& bs, const Mesh& mesh_P, const Mesh& mesh_E,
                                 const DofMaps& dofs, const Scenario& scenario,
                                 const ModelParams& params, double t, const Vector& eta_prev) {
  const StepLoads loads = assemble_loads(mesh_P, mesh_E, dofs, scenario, params, t);

  StepRhs rhs;
  rhs.b_P = Vector::Zero(bs.P.dim);
  rhs.b_P.segment(bs.P.off_u, bs.P.n_u) = loads.F_P;
  rhs.b_P.segment(bs.P.off_p, bs.P.n_s) = -(bs.raw_P.R * eta_prev) - bs.tau * loads.Z;
  rhs.b_E = Vector::Zero(bs.E.dim);
  rhs.b_E.segment(bs.E.off_u, bs.E.n_u) = loads.F_E;

  auto values = [&](const SubdomainSystem& sys) {
    const VectorFn& u_bc = sys.subdomain == Subdomain::P ? scenario.u_bc_P : scenario.u_bc_E;
    Vector g(sys.constraints.size());
    for (std::size_t k = 0; k < sys.constraints.size(); ++k) {
      const Constraint& c = sys.constraints[k];
      g[k] = c.field == FieldKind::displacement ? u_bc(c.coords, t)[c.component]
                                                : scenario.p_bc(c.coords, t);
    }
    return g;
  };
  rhs.g_P = values(bs.P);
  rhs.g_E = values(bs.E);
  lift_rhs(rhs.b_P, bs.P.saddle, rhs.g_P);
  lift_rhs(rhs.b_E, bs.E.saddle, rhs.g_E);

  rhs.d = -(bs.H_P_c * rhs.g_P - bs.H_E_c * rhs.g_E);
  return rhs;
}

}  // namespace porofeti
