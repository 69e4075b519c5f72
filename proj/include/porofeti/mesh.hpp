#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "porofeti/core.hpp"

namespace porofeti {

/// Boundary condition classification of one boundary edge. Displacement
/// components can be constrained individually (bit c of disp_mask), the
/// pressure trace carries its own tag, and interface edges are marked
/// separately. An edge with disp_mask == 0 is a pure traction edge.
struct FacetTag {
  enum class Pressure { none, dirichlet, flux };

  unsigned disp_mask = 0;
  Pressure pressure = Pressure::none;
  bool interface_edge = false;

  static FacetTag dirichlet_displacement(Pressure p = Pressure::none) { return {3u, p, false}; }
  static FacetTag traction(Pressure p = Pressure::none) { return {0u, p, false}; }
  static FacetTag interface() { return {0u, Pressure::none, true}; }

  bool component_essential(int c) const { return (disp_mask >> c) & 1u; }
};

struct BoundaryFacet {
  int edge = -1;
  FacetTag tag;
};

struct Mesh {
  Subdomain subdomain = Subdomain::P;
  Rect rect;
  int nx = 0, ny = 0;

  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;  // counterclockwise
  std::vector<std::array<int, 2>> edges;      // vertex pairs, lo < hi
  std::vector<std::array<int, 3>> tri_edges;  // edge opposite local vertex i
  std::vector<BoundaryFacet> boundary;
  bool tagged = false;

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_triangles() const { return static_cast<int>(triangles.size()); }
  int n_edges() const { return static_cast<int>(edges.size()); }

  double triangle_area(int t) const {
    const auto& tri = triangles[t];
    const Vec2 a = vertices[tri[0]], b = vertices[tri[1]], c = vertices[tri[2]];
    return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
  }

  Vec2 edge_midpoint(int e) const { return 0.5 * (vertices[edges[e][0]] + vertices[edges[e][1]]); }

  double edge_length(int e) const { return (vertices[edges[e][1]] - vertices[edges[e][0]]).norm(); }

  std::array<Vec2, 3> triangle_coords(int t) const {
    const auto& tri = triangles[t];
    return {vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]};
  }
};

namespace detail {

inline void build_edges(Mesh& mesh) {
  std::map<std::pair<int, int>, int> edge_ids;
  mesh.tri_edges.resize(mesh.triangles.size());
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int i = 0; i < 3; ++i) {
      // edge opposite local vertex i
      int a = tri[(i + 1) % 3], b = tri[(i + 2) % 3];
      if (a > b) std::swap(a, b);
      auto [it, inserted] = edge_ids.try_emplace({a, b}, mesh.n_edges());
      if (inserted) mesh.edges.push_back({a, b});
      mesh.tri_edges[t][i] = it->second;
    }
  }
}

inline std::vector<int> boundary_edge_ids(const Mesh& mesh) {
  std::vector<int> count(mesh.n_edges(), 0);
  for (const auto& te : mesh.tri_edges)
    for (int e : te) ++count[e];
  std::vector<int> out;
  for (int e = 0; e < mesh.n_edges(); ++e)
    if (count[e] == 1) out.push_back(e);
  return out;
}

}  // namespace detail

/// Structured triangulation of an axis-aligned rectangle: nx-by-ny cells,
/// each split along the lower-left to upper-right diagonal, vertices
/// numbered row-major bottom to top.
inline Mesh build_subdomain_mesh(Subdomain subdomain, const Rect& rect, int nx, int ny) {
  if (nx < 1 || ny < 1) throw MeshError("build_subdomain_mesh: subdivision counts must be >= 1");
  if (rect.degenerate()) throw MeshError("build_subdomain_mesh: degenerate rectangle");

  Mesh mesh;
  mesh.subdomain = subdomain;
  mesh.rect = rect;
  mesh.nx = nx;
  mesh.ny = ny;

  const double hx = rect.width() / nx, hy = rect.height() / ny;
  mesh.vertices.reserve((nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      mesh.vertices.emplace_back(rect.x0 + i * hx, rect.y0 + j * hy);

  auto vid = [nx](int i, int j) { return j * (nx + 1) + i; };
  mesh.triangles.reserve(2 * nx * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int a = vid(i, j), b = vid(i + 1, j), c = vid(i + 1, j + 1), d = vid(i, j + 1);
      mesh.triangles.push_back({a, b, c});
      mesh.triangles.push_back({a, c, d});
    }
  }
  detail::build_edges(mesh);
  return mesh;
}

/// Rule deciding the tag of a boundary edge from its midpoint; returning
/// nullopt marks the edge untaggable and aborts.
using TagRule = std::function<std::optional<FacetTag>(const Vec2& midpoint)>;

inline Mesh tag_boundary_facets(Mesh mesh, const TagRule& rule) {
  mesh.boundary.clear();
  for (int e : detail::boundary_edge_ids(mesh)) {
    const std::optional<FacetTag> tag = rule(mesh.edge_midpoint(e));
    if (!tag) {
      const Vec2 m = mesh.edge_midpoint(e);
      throw MeshError("tag_boundary_facets: untaggable boundary edge at (" + std::to_string(m.x()) +
                      ", " + std::to_string(m.y()) + ")");
    }
    mesh.boundary.push_back({e, *tag});
  }
  mesh.tagged = true;
  return mesh;
}

enum class FieldKind { displacement, elastic_pressure, fluid_content, fluid_pressure, multiplier };

/// Nodal layout of one finite element field: P1 nodes are the mesh
/// vertices, P2 adds edge midpoints (node id nv + edge id). Vector fields
/// interleave components: dof = node * components + c.
struct DofMap {
  FieldKind kind = FieldKind::displacement;
  Subdomain subdomain = Subdomain::P;
  int order = 1;
  int components = 1;
  int n_nodes = 0;
  int n_dofs = 0;
  std::vector<Vec2> node_coords;
  std::vector<bool> node_on_interface;

  int dof(int node, int c = 0) const { return node * components + c; }
  int node_of(int dof) const { return dof / components; }
  int component_of(int dof) const { return dof % components; }
};

inline DofMap make_dof_map(const Mesh& mesh, FieldKind kind, int order) {
  if (order != 1 && order != 2) throw MeshError("make_dof_map: unsupported polynomial order");
  if (kind != FieldKind::displacement && order != 1)
    throw MeshError("make_dof_map: scalar fields are lowest order only");

  DofMap map;
  map.kind = kind;
  map.subdomain = mesh.subdomain;
  map.order = order;
  map.components = (kind == FieldKind::displacement || kind == FieldKind::multiplier) ? 2 : 1;
  map.n_nodes = mesh.n_vertices() + (order == 2 ? mesh.n_edges() : 0);
  map.n_dofs = map.n_nodes * map.components;

  map.node_coords.resize(map.n_nodes);
  for (int v = 0; v < mesh.n_vertices(); ++v) map.node_coords[v] = mesh.vertices[v];
  if (order == 2)
    for (int e = 0; e < mesh.n_edges(); ++e)
      map.node_coords[mesh.n_vertices() + e] = mesh.edge_midpoint(e);

  map.node_on_interface.assign(map.n_nodes, false);
  for (const auto& bf : mesh.boundary) {
    if (!bf.tag.interface_edge) continue;
    map.node_on_interface[mesh.edges[bf.edge][0]] = true;
    map.node_on_interface[mesh.edges[bf.edge][1]] = true;
    if (order == 2) map.node_on_interface[mesh.n_vertices() + bf.edge] = true;
  }
  return map;
}

/// All field dof maps of one subdomain. Ω^P carries displacement plus the
/// three scalar fields; Ω^E carries displacement and the elastic pressure.
inline std::vector<DofMap> build_dof_maps(const Mesh& mesh, int displacement_order) {
  std::vector<DofMap> maps;
  maps.push_back(make_dof_map(mesh, FieldKind::displacement, displacement_order));
  maps.push_back(make_dof_map(mesh, FieldKind::elastic_pressure, 1));
  if (mesh.subdomain == Subdomain::P) {
    maps.push_back(make_dof_map(mesh, FieldKind::fluid_content, 1));
    maps.push_back(make_dof_map(mesh, FieldKind::fluid_pressure, 1));
  }
  return maps;
}

struct DofMaps {
  DofMap u_P, s_P, u_E, s_E;  // s_*: the shared P1 scalar layout (ξ, and on P also η, p)
};

inline DofMaps build_all_dof_maps(const Mesh& mesh_P, const Mesh& mesh_E, int displacement_order) {
  return {make_dof_map(mesh_P, FieldKind::displacement, displacement_order),
          make_dof_map(mesh_P, FieldKind::elastic_pressure, 1),
          make_dof_map(mesh_E, FieldKind::displacement, displacement_order),
          make_dof_map(mesh_E, FieldKind::elastic_pressure, 1)};
}

/// One interface edge seen from both sides, endpoints ordered left to right.
struct InterfaceEdge {
  int edge_P = -1, edge_E = -1;        // mesh edge ids
  std::array<int, 2> vertices_P{};     // P-mesh vertex ids, ascending x
  std::array<int, 2> vertices_E{};
};

/// Bijective matching of the displacement trace nodes across the interface.
struct InterfacePairing {
  std::vector<std::pair<int, int>> node_pairs;  // (P node, E node), ascending x
  std::vector<InterfaceEdge> edge_list;         // ascending x
  std::vector<int> mult_vertices_P;             // interface vertex nodes on the P side, ascending x
  double interface_y = 0.0;
};

namespace detail {

inline std::vector<int> interface_trace_nodes(const Mesh& mesh, const DofMap& u_map) {
  std::vector<int> nodes;
  for (int n = 0; n < u_map.n_nodes; ++n)
    if (u_map.node_on_interface[n]) nodes.push_back(n);
  std::sort(nodes.begin(), nodes.end(), [&](int a, int b) {
    return u_map.node_coords[a].x() < u_map.node_coords[b].x();
  });
  if (nodes.empty()) throw MeshError("pair_interface: mesh has no interface edges");
  return nodes;
}

}  // namespace detail

inline InterfacePairing pair_interface(const Mesh& mesh_P, const Mesh& mesh_E, const DofMap& u_P,
                                       const DofMap& u_E) {
  const std::vector<int> nodes_P = detail::interface_trace_nodes(mesh_P, u_P);
  const std::vector<int> nodes_E = detail::interface_trace_nodes(mesh_E, u_E);
  if (nodes_P.size() != nodes_E.size())
    throw NonConformingInterfaceError("pair_interface: trace node counts differ (" +
                                      std::to_string(nodes_P.size()) + " vs " +
                                      std::to_string(nodes_E.size()) + ")");

  InterfacePairing pairing;
  pairing.interface_y = u_P.node_coords[nodes_P.front()].y();
  for (std::size_t i = 0; i < nodes_P.size(); ++i) {
    const Vec2 a = u_P.node_coords[nodes_P[i]], b = u_E.node_coords[nodes_E[i]];
    if ((a - b).lpNorm<Eigen::Infinity>() > kGeomTol)
      throw NonConformingInterfaceError("pair_interface: interface node mismatch at x=" +
                                        std::to_string(a.x()));
    pairing.node_pairs.emplace_back(nodes_P[i], nodes_E[i]);
  }

  for (int n : nodes_P)
    if (n < mesh_P.n_vertices()) pairing.mult_vertices_P.push_back(n);

  // match interface edges of both meshes by midpoint x
  std::vector<std::pair<double, int>> be_P, be_E;
  for (const auto& bf : mesh_P.boundary)
    if (bf.tag.interface_edge) be_P.emplace_back(mesh_P.edge_midpoint(bf.edge).x(), bf.edge);
  for (const auto& bf : mesh_E.boundary)
    if (bf.tag.interface_edge) be_E.emplace_back(mesh_E.edge_midpoint(bf.edge).x(), bf.edge);
  std::sort(be_P.begin(), be_P.end());
  std::sort(be_E.begin(), be_E.end());
  if (be_P.size() != be_E.size())
    throw NonConformingInterfaceError("pair_interface: interface edge counts differ");

  for (std::size_t i = 0; i < be_P.size(); ++i) {
    if (std::abs(be_P[i].first - be_E[i].first) > kGeomTol)
      throw NonConformingInterfaceError("pair_interface: interface edges do not line up");
    InterfaceEdge ie;
    ie.edge_P = be_P[i].second;
    ie.edge_E = be_E[i].second;
    auto orient = [](const Mesh& m, int e) -> std::array<int, 2> {
      auto [a, b] = std::pair{m.edges[e][0], m.edges[e][1]};
      return m.vertices[a].x() <= m.vertices[b].x() ? std::array{a, b} : std::array{b, a};
    };
    ie.vertices_P = orient(mesh_P, ie.edge_P);
    ie.vertices_E = orient(mesh_E, ie.edge_E);
    pairing.edge_list.push_back(ie);
  }
  return pairing;
}

}  // namespace porofeti
