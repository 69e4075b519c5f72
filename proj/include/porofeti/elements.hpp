#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "porofeti/core.hpp"

namespace porofeti {

/// Quadrature on the reference triangle (0,0)-(1,0)-(0,1) or the reference
/// edge [0,1]; weights carry the reference measure (1/2 resp. 1).
struct QuadratureRule {
  int degree = 0;
  std::vector<Vec2> points;  // edge rules use the x coordinate only
  std::vector<double> weights;

  int size() const { return static_cast<int>(points.size()); }
};

inline QuadratureRule triangle_rule(int degree) {
  QuadratureRule rule;
  rule.degree = degree;
  switch (degree) {
    case 0:
    case 1:
      rule.points = {{1.0 / 3.0, 1.0 / 3.0}};
      rule.weights = {0.5};
      break;
    case 2:
      rule.points = {{1.0 / 6.0, 1.0 / 6.0}, {2.0 / 3.0, 1.0 / 6.0}, {1.0 / 6.0, 2.0 / 3.0}};
      rule.weights = {1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0};
      break;
    case 3:
    case 4: {
      // Dunavant degree-4 rule, two orbits of three points
      const double a1 = 0.816847572980459, b1 = 0.091576213509771, w1 = 0.109951743655322;
      const double a2 = 0.108103018168070, b2 = 0.445948490915965, w2 = 0.223381589678011;
      rule.points = {{b1, b1}, {a1, b1}, {b1, a1}, {b2, b2}, {a2, b2}, {b2, a2}};
      rule.weights = {0.5 * w1, 0.5 * w1, 0.5 * w1, 0.5 * w2, 0.5 * w2, 0.5 * w2};
      break;
    }
    default:
      throw Error("triangle_rule: degree " + std::to_string(degree) + " not supported (max 4)");
  }
  return rule;
}

inline QuadratureRule edge_rule(int degree) {
  QuadratureRule rule;
  rule.degree = degree;
  if (degree <= 1) {
    rule.points = {{0.5, 0.0}};
    rule.weights = {1.0};
  } else if (degree <= 3) {
    const double d = 0.5 / std::sqrt(3.0);
    rule.points = {{0.5 - d, 0.0}, {0.5 + d, 0.0}};
    rule.weights = {0.5, 0.5};
  } else if (degree <= 5) {
    const double d = 0.5 * std::sqrt(3.0 / 5.0);
    rule.points = {{0.5 - d, 0.0}, {0.5, 0.0}, {0.5 + d, 0.0}};
    rule.weights = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
  } else {
    throw Error("edge_rule: degree " + std::to_string(degree) + " not supported (max 5)");
  }
  return rule;
}

inline int basis_size(int order) { return order == 1 ? 3 : 6; }

/// Lagrange basis on the reference triangle. P2 nodes 3,4,5 are the
/// midpoints of edges (0,1), (1,2), (2,0).
inline void eval_basis(int order, const Vec2& xi, double* values, Vec2* grads) {
  const double x = xi.x(), y = xi.y();
  if (x < -kGeomTol || y < -kGeomTol || x + y > 1.0 + kGeomTol)
    throw Error("eval_basis: point outside reference triangle");
  const double l0 = 1.0 - x - y, l1 = x, l2 = y;
  const Vec2 g0(-1.0, -1.0), g1(1.0, 0.0), g2(0.0, 1.0);
  if (order == 1) {
    values[0] = l0;
    values[1] = l1;
    values[2] = l2;
    grads[0] = g0;
    grads[1] = g1;
    grads[2] = g2;
  } else if (order == 2) {
    values[0] = l0 * (2.0 * l0 - 1.0);
    values[1] = l1 * (2.0 * l1 - 1.0);
    values[2] = l2 * (2.0 * l2 - 1.0);
    values[3] = 4.0 * l0 * l1;
    values[4] = 4.0 * l1 * l2;
    values[5] = 4.0 * l2 * l0;
    grads[0] = (4.0 * l0 - 1.0) * g0;
    grads[1] = (4.0 * l1 - 1.0) * g1;
    grads[2] = (4.0 * l2 - 1.0) * g2;
    grads[3] = 4.0 * (l1 * g0 + l0 * g1);
    grads[4] = 4.0 * (l2 * g1 + l1 * g2);
    grads[5] = 4.0 * (l0 * g2 + l2 * g0);
  } else {
    throw Error("eval_basis: unsupported order");
  }
}

/// 1D Lagrange basis on the reference edge [0,1]; P2 node 2 is the midpoint.
inline void eval_edge_basis(int order, double s, double* values) {
  if (order == 1) {
    values[0] = 1.0 - s;
    values[1] = s;
  } else if (order == 2) {
    values[0] = (1.0 - s) * (1.0 - 2.0 * s);
    values[1] = s * (2.0 * s - 1.0);
    values[2] = 4.0 * s * (1.0 - s);
  } else {
    throw Error("eval_edge_basis: unsupported order");
  }
}

inline int edge_basis_size(int order) { return order + 1; }

enum class FormKind { elastic, div_coupling, mass, diffusion, interface_coupling };

struct LocalMatrix {
  FormKind kind = FormKind::mass;
  DenseMatrix entries;

  int rows() const { return static_cast<int>(entries.rows()); }
  int cols() const { return static_cast<int>(entries.cols()); }
};

namespace detail {

struct AffineMap {
  Mat2 jacobian;      // columns (v1-v0, v2-v0)
  Mat2 jacobian_inv_t;
  double det = 0.0;

  explicit AffineMap(const std::array<Vec2, 3>& tri) {
    jacobian.col(0) = tri[1] - tri[0];
    jacobian.col(1) = tri[2] - tri[0];
    det = jacobian.determinant();
    if (std::abs(det) < 1e-14) throw AssemblyError("degenerate triangle");
    jacobian_inv_t = jacobian.inverse().transpose();
  }
};

constexpr int kLocalFormDegree = 4;  // exact for all P2-by-P2 products on affine maps

}  // namespace detail

/// 2 mu * integral of eps(phi_i) : eps(phi_j); local dofs interleaved
/// (node-major, component-minor).
inline LocalMatrix local_elastic_matrix(const std::array<Vec2, 3>& tri, double mu, int order) {
  const detail::AffineMap map(tri);
  const int nb = basis_size(order);
  LocalMatrix lm{FormKind::elastic, DenseMatrix::Zero(2 * nb, 2 * nb)};
  const QuadratureRule rule = triangle_rule(detail::kLocalFormDegree);
  std::array<double, 6> vals;
  std::array<Vec2, 6> ref_grads, grads;
  for (int q = 0; q < rule.size(); ++q) {
    eval_basis(order, rule.points[q], vals.data(), ref_grads.data());
    for (int i = 0; i < nb; ++i) grads[i] = map.jacobian_inv_t * ref_grads[i];
    const double w = rule.weights[q] * std::abs(map.det);
    for (int i = 0; i < nb; ++i) {
      for (int j = 0; j < nb; ++j) {
        const Vec2 gi = grads[i], gj = grads[j];
        // eps(N_i e_a) : eps(N_j e_b) entries for the 2x2 component block
        lm.entries(2 * i, 2 * j) += 2.0 * mu * w * (gi.x() * gj.x() + 0.5 * gi.y() * gj.y());
        lm.entries(2 * i, 2 * j + 1) += 2.0 * mu * w * 0.5 * gi.y() * gj.x();
        lm.entries(2 * i + 1, 2 * j) += 2.0 * mu * w * 0.5 * gi.x() * gj.y();
        lm.entries(2 * i + 1, 2 * j + 1) += 2.0 * mu * w * (gi.y() * gj.y() + 0.5 * gi.x() * gj.x());
      }
    }
  }
  return lm;
}

/// -integral of psi_i (div phi_j): rows scalar P1, cols vector order-k.
inline LocalMatrix local_div_matrix(const std::array<Vec2, 3>& tri, int order) {
  const detail::AffineMap map(tri);
  const int nb = basis_size(order);
  LocalMatrix lm{FormKind::div_coupling, DenseMatrix::Zero(3, 2 * nb)};
  const QuadratureRule rule = triangle_rule(detail::kLocalFormDegree);
  std::array<double, 6> vals, svals;
  std::array<Vec2, 6> ref_grads, grads, sgrads;
  for (int q = 0; q < rule.size(); ++q) {
    eval_basis(order, rule.points[q], vals.data(), ref_grads.data());
    eval_basis(1, rule.points[q], svals.data(), sgrads.data());
    for (int j = 0; j < nb; ++j) grads[j] = map.jacobian_inv_t * ref_grads[j];
    const double w = rule.weights[q] * std::abs(map.det);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < nb; ++j) {
        lm.entries(i, 2 * j) -= w * svals[i] * grads[j].x();
        lm.entries(i, 2 * j + 1) -= w * svals[i] * grads[j].y();
      }
  }
  return lm;
}

inline LocalMatrix local_mass_matrix(const std::array<Vec2, 3>& tri) {
  const detail::AffineMap map(tri);
  LocalMatrix lm{FormKind::mass, DenseMatrix::Zero(3, 3)};
  const QuadratureRule rule = triangle_rule(detail::kLocalFormDegree);
  std::array<double, 3> vals;
  std::array<Vec2, 3> grads;
  for (int q = 0; q < rule.size(); ++q) {
    eval_basis(1, rule.points[q], vals.data(), grads.data());
    const double w = rule.weights[q] * std::abs(map.det);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) lm.entries(i, j) += w * vals[i] * vals[j];
  }
  return lm;
}

/// (1/mu_f) integral of (K grad psi_i) . grad psi_j for P1 scalars.
inline LocalMatrix local_diffusion_matrix(const std::array<Vec2, 3>& tri, const Mat2& K,
                                          double mu_f) {
  const detail::AffineMap map(tri);
  LocalMatrix lm{FormKind::diffusion, DenseMatrix::Zero(3, 3)};
  const QuadratureRule rule = triangle_rule(detail::kLocalFormDegree);
  std::array<double, 3> vals;
  std::array<Vec2, 3> ref_grads, grads;
  for (int q = 0; q < rule.size(); ++q) {
    eval_basis(1, rule.points[q], vals.data(), ref_grads.data());
    for (int i = 0; i < 3; ++i) grads[i] = map.jacobian_inv_t * ref_grads[i];
    const double w = rule.weights[q] * std::abs(map.det) / mu_f;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) lm.entries(i, j) += w * (K * grads[j]).dot(grads[i]);
  }
  return lm;
}

/// Interface edge mass between a multiplier (order 1) and a displacement
/// trace (order k), per scalar component: entries integral of l_i q_j ds.
inline LocalMatrix local_interface_matrix(const Vec2& a, const Vec2& b, int trace_order,
                                          int mult_order = 1) {
  const double length = (b - a).norm();
  if (length < 1e-14) throw AssemblyError("local_interface_matrix: zero-length edge");
  const int nm = edge_basis_size(mult_order), nt = edge_basis_size(trace_order);
  LocalMatrix lm{FormKind::interface_coupling, DenseMatrix::Zero(nm, nt)};
  const QuadratureRule rule = edge_rule(mult_order + trace_order + 1);
  std::array<double, 3> mv, tv;
  for (int q = 0; q < rule.size(); ++q) {
    const double s = rule.points[q].x();
    eval_edge_basis(mult_order, s, mv.data());
    eval_edge_basis(trace_order, s, tv.data());
    const double w = rule.weights[q] * length;
    for (int i = 0; i < nm; ++i)
      for (int j = 0; j < nt; ++j) lm.entries(i, j) += w * mv[i] * tv[j];
  }
  return lm;
}

}  // namespace porofeti
