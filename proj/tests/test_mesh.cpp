#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "porofeti/mesh.hpp"
#include "porofeti/model.hpp"

using namespace porofeti;

namespace {

double total_area(const Mesh& mesh) {
  double a = 0.0;
  for (int t = 0; t < mesh.n_triangles(); ++t) a += mesh.triangle_area(t);
  return a;
}

TagRule all_dirichlet_with_interface(double interface_y) {
  return [interface_y](const Vec2& m) -> std::optional<FacetTag> {
    if (std::abs(m.y() - interface_y) < 1e-9) return FacetTag::interface();
    return FacetTag::dirichlet_displacement(FacetTag::Pressure::dirichlet);
  };
}

}  // namespace

TEST(Mesh, StructuredGridCounts) {
  const Mesh mesh = build_subdomain_mesh(Subdomain::P, {0, 0, 1, 0.5}, 8, 4);
  EXPECT_EQ(mesh.n_vertices(), 45);
  EXPECT_EQ(mesh.n_triangles(), 64);
  EXPECT_EQ(mesh.n_edges(), 8 * 5 + 9 * 4 + 32);  // horizontal + vertical + diagonal
}

TEST(Mesh, SmallestGrid) {
  const Mesh mesh = build_subdomain_mesh(Subdomain::E, {0, 0, 1, 1}, 1, 1);
  EXPECT_EQ(mesh.n_vertices(), 4);
  EXPECT_EQ(mesh.n_triangles(), 2);
}

TEST(Mesh, PositiveAreasAndPartition) {
  for (int n : {1, 2, 5, 8, 13}) {
    const Rect rect{-0.5, 0.25, 2.0, 1.0};
    const Mesh mesh = build_subdomain_mesh(Subdomain::P, rect, n, n + 1);
    for (int t = 0; t < mesh.n_triangles(); ++t) EXPECT_GT(mesh.triangle_area(t), 0.0);
    EXPECT_NEAR(total_area(mesh), rect.area(), 1e-12 * rect.area());
  }
}

TEST(Mesh, RejectsBadInput) {
  EXPECT_THROW(build_subdomain_mesh(Subdomain::P, {0, 0, 1, 1}, 0, 4), MeshError);
  EXPECT_THROW(build_subdomain_mesh(Subdomain::P, {0, 0, 1, 1}, 4, -1), MeshError);
  EXPECT_THROW(build_subdomain_mesh(Subdomain::P, {0, 0, 0, 1}, 4, 4), MeshError);
}

TEST(Mesh, RefinementNesting) {
  const Mesh coarse = build_subdomain_mesh(Subdomain::P, {0, 0, 1, 0.5}, 6, 3);
  const Mesh fine = build_subdomain_mesh(Subdomain::P, {0, 0, 1, 0.5}, 12, 6);
  for (const auto& v : coarse.vertices) {
    bool found = false;
    for (const auto& w : fine.vertices)
      if ((v - w).lpNorm<Eigen::Infinity>() < 1e-12) {
        found = true;
        break;
      }
    EXPECT_TRUE(found) << "coarse vertex (" << v.x() << "," << v.y() << ") not nested";
  }
}

TEST(Mesh, BoundaryTagging) {
  const int nx = 8, ny = 4;
  Mesh mesh = build_subdomain_mesh(Subdomain::P, {0, 0, 1, 0.5}, nx, ny);
  mesh = tag_boundary_facets(mesh, all_dirichlet_with_interface(0.5));
  EXPECT_TRUE(mesh.tagged);
  EXPECT_EQ(static_cast<int>(mesh.boundary.size()), 2 * nx + 2 * ny);
  int interface_count = 0;
  for (const auto& bf : mesh.boundary)
    if (bf.tag.interface_edge) ++interface_count;
  EXPECT_EQ(interface_count, nx);
}

TEST(Mesh, BarryMercerLayoutTags) {
  const ModelParams params = default_params();
  const Scenario sc = barry_mercer_scenario(params);
  Mesh mesh = build_subdomain_mesh(Subdomain::P, sc.rect_P, 8, 4);
  mesh = tag_boundary_facets(mesh, sc.tag_rule_P);
  for (const auto& bf : mesh.boundary) {
    const Vec2 m = mesh.edge_midpoint(bf.edge);
    if (std::abs(m.y() - 0.5) < 1e-9) {
      EXPECT_TRUE(bf.tag.interface_edge);
    } else if (std::abs(m.y()) < 1e-9) {
      EXPECT_EQ(bf.tag.disp_mask, 2u);  // u2 pinned on the bottom
      EXPECT_EQ(bf.tag.pressure, FacetTag::Pressure::dirichlet);
    } else {
      EXPECT_EQ(bf.tag.disp_mask, 1u);  // u1 pinned on the side walls
      EXPECT_EQ(bf.tag.pressure, FacetTag::Pressure::dirichlet);
    }
  }
}

TEST(Mesh, UntaggableEdgeThrows) {
  Mesh mesh = build_subdomain_mesh(Subdomain::P, {0, 0, 1, 0.5}, 2, 1);
  const TagRule partial = [](const Vec2& m) -> std::optional<FacetTag> {
    if (std::abs(m.y()) < 1e-9) return FacetTag::dirichlet_displacement();
    return std::nullopt;
  };
  EXPECT_THROW(tag_boundary_facets(mesh, partial), MeshError);
}

TEST(DofMap, CountsAndOrders) {
  const Mesh mesh = build_subdomain_mesh(Subdomain::P, {0, 0, 1, 0.5}, 8, 4);
  const DofMap u2 = make_dof_map(mesh, FieldKind::displacement, 2);
  EXPECT_EQ(u2.n_nodes, 45 + mesh.n_edges());
  EXPECT_EQ(u2.n_dofs, 2 * (45 + 108));

  const Mesh tiny = build_subdomain_mesh(Subdomain::P, {0, 0, 1, 1}, 1, 1);
  const DofMap s = make_dof_map(tiny, FieldKind::fluid_pressure, 1);
  EXPECT_EQ(s.n_dofs, 4);

  EXPECT_THROW(make_dof_map(mesh, FieldKind::displacement, 3), MeshError);
  EXPECT_THROW(make_dof_map(mesh, FieldKind::fluid_pressure, 2), MeshError);
}

TEST(DofMap, BuildPerSubdomainLists) {
  const Mesh mesh_P = build_subdomain_mesh(Subdomain::P, {0, 0, 1, 0.5}, 4, 2);
  const Mesh mesh_E = build_subdomain_mesh(Subdomain::E, {0, 0.5, 1, 1}, 4, 2);
  EXPECT_EQ(build_dof_maps(mesh_P, 2).size(), 4u);
  EXPECT_EQ(build_dof_maps(mesh_E, 2).size(), 2u);
}

namespace {

std::pair<Mesh, Mesh> tagged_pair(int nx_P, int nx_E) {
  Mesh P = build_subdomain_mesh(Subdomain::P, {0, 0, 1, 0.5}, nx_P, std::max(1, nx_P / 2));
  Mesh E = build_subdomain_mesh(Subdomain::E, {0, 0.5, 1, 1}, nx_E, std::max(1, nx_E / 2));
  P = tag_boundary_facets(P, all_dirichlet_with_interface(0.5));
  E = tag_boundary_facets(E, all_dirichlet_with_interface(0.5));
  return {P, E};
}

}  // namespace

TEST(InterfacePairing, ConformingCounts) {
  const auto [P, E] = tagged_pair(8, 8);
  const DofMap uP1 = make_dof_map(P, FieldKind::displacement, 1);
  const DofMap uE1 = make_dof_map(E, FieldKind::displacement, 1);
  const InterfacePairing pairing = pair_interface(P, E, uP1, uE1);
  EXPECT_EQ(pairing.node_pairs.size(), 9u);       // vertex dofs per component
  EXPECT_EQ(pairing.mult_vertices_P.size(), 9u);  // P1 multiplier nodes per component
  EXPECT_EQ(pairing.edge_list.size(), 8u);

  const DofMap uP2 = make_dof_map(P, FieldKind::displacement, 2);
  const DofMap uE2 = make_dof_map(E, FieldKind::displacement, 2);
  const InterfacePairing pairing2 = pair_interface(P, E, uP2, uE2);
  EXPECT_EQ(pairing2.node_pairs.size(), 17u);  // vertices + midside nodes
  for (const auto& [np, ne] : pairing2.node_pairs)
    EXPECT_LT((uP2.node_coords[np] - uE2.node_coords[ne]).norm(), 1e-12);
}

TEST(InterfacePairing, NonConformingRejected) {
  const auto [P, E] = tagged_pair(8, 16);
  const DofMap uP = make_dof_map(P, FieldKind::displacement, 1);
  const DofMap uE = make_dof_map(E, FieldKind::displacement, 1);
  EXPECT_THROW(pair_interface(P, E, uP, uE), NonConformingInterfaceError);
}

TEST(InterfacePairing, SwapSymmetry) {
  const auto [P, E] = tagged_pair(4, 4);
  const DofMap uP = make_dof_map(P, FieldKind::displacement, 2);
  const DofMap uE = make_dof_map(E, FieldKind::displacement, 2);
  const InterfacePairing ab = pair_interface(P, E, uP, uE);
  const InterfacePairing ba = pair_interface(E, P, uE, uP);
  ASSERT_EQ(ab.node_pairs.size(), ba.node_pairs.size());
  for (std::size_t i = 0; i < ab.node_pairs.size(); ++i) {
    EXPECT_EQ(ab.node_pairs[i].first, ba.node_pairs[i].second);
    EXPECT_EQ(ab.node_pairs[i].second, ba.node_pairs[i].first);
  }
}

TEST(InterfacePairing, MissingInterfaceFailsLoudly) {
  Mesh P = build_subdomain_mesh(Subdomain::P, {0, 0, 1, 0.5}, 4, 2);
  Mesh E = build_subdomain_mesh(Subdomain::E, {0, 0.5, 1, 1}, 4, 2);
  const TagRule no_interface = [](const Vec2&) -> std::optional<FacetTag> {
    return FacetTag::dirichlet_displacement();
  };
  P = tag_boundary_facets(P, no_interface);
  E = tag_boundary_facets(E, no_interface);
  const DofMap uP = make_dof_map(P, FieldKind::displacement, 1);
  const DofMap uE = make_dof_map(E, FieldKind::displacement, 1);
  EXPECT_THROW(pair_interface(P, E, uP, uE), MeshError);
}

TEST(InterfacePairing, MasksMatchAcrossPairing) {
  const auto [P, E] = tagged_pair(6, 6);
  const DofMap uP = make_dof_map(P, FieldKind::displacement, 2);
  const DofMap uE = make_dof_map(E, FieldKind::displacement, 2);
  const InterfacePairing pairing = pair_interface(P, E, uP, uE);
  std::set<int> seen_P, seen_E;
  for (const auto& [np, ne] : pairing.node_pairs) {
    EXPECT_TRUE(uP.node_on_interface[np]);
    EXPECT_TRUE(uE.node_on_interface[ne]);
    seen_P.insert(np);
    seen_E.insert(ne);
  }
  // bijective: every interface node appears exactly once on each side
  EXPECT_EQ(seen_P.size(), pairing.node_pairs.size());
  EXPECT_EQ(seen_E.size(), pairing.node_pairs.size());
  int count_P = 0;
  for (int n = 0; n < uP.n_nodes; ++n) count_P += uP.node_on_interface[n];
  EXPECT_EQ(static_cast<std::size_t>(count_P), pairing.node_pairs.size());
}
