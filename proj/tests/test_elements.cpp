#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "porofeti/elements.hpp"

using namespace porofeti;

namespace {

// analytic integral of x^a y^b over the reference triangle: a! b! / (a+b+2)!
double monomial_integral(int a, int b) {
  auto fact = [](int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
  };
  return fact(a) * fact(b) / fact(a + b + 2);
}

std::array<Vec2, 3> random_triangle(std::mt19937& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  while (true) {
    const std::array<Vec2, 3> tri = {Vec2(d(rng), d(rng)), Vec2(d(rng), d(rng)),
                                     Vec2(d(rng), d(rng))};
    const double area2 = (tri[1] - tri[0]).x() * (tri[2] - tri[0]).y() -
                         (tri[2] - tri[0]).x() * (tri[1] - tri[0]).y();
    if (std::abs(area2) > 0.2) return tri;
  }
}

Vec2 random_reference_point(std::mt19937& rng) {
  std::uniform_real_distribution<double> d(0.0, 1.0);
  while (true) {
    const Vec2 p(d(rng), d(rng));
    if (p.x() + p.y() <= 1.0) return p;
  }
}

}  // namespace

TEST(Basis, LagrangeProperty) {
  std::array<double, 6> v;
  std::array<Vec2, 6> g;
  eval_basis(1, Vec2(0.0, 0.0), v.data(), g.data());
  EXPECT_DOUBLE_EQ(v[0], 1.0);
  EXPECT_DOUBLE_EQ(v[1], 0.0);
  EXPECT_DOUBLE_EQ(v[2], 0.0);

  // P2 nodes: vertices then midpoints of (0,1), (1,2), (2,0)
  const std::array<Vec2, 6> nodes = {Vec2(0, 0),     Vec2(1, 0),     Vec2(0, 1),
                                     Vec2(0.5, 0),   Vec2(0.5, 0.5), Vec2(0, 0.5)};
  for (int n = 0; n < 6; ++n) {
    eval_basis(2, nodes[n], v.data(), g.data());
    for (int i = 0; i < 6; ++i) EXPECT_NEAR(v[i], i == n ? 1.0 : 0.0, 1e-14);
  }
}

TEST(Basis, PartitionOfUnityAndGradientSum) {
  std::mt19937 rng(7);
  std::array<double, 6> v;
  std::array<Vec2, 6> g;
  for (int order : {1, 2}) {
    const int nb = basis_size(order);
    for (int trial = 0; trial < 100; ++trial) {
      const Vec2 p = random_reference_point(rng);
      eval_basis(order, p, v.data(), g.data());
      double sum = 0.0;
      Vec2 gsum = Vec2::Zero();
      for (int i = 0; i < nb; ++i) {
        sum += v[i];
        gsum += g[i];
      }
      EXPECT_NEAR(sum, 1.0, 1e-13);
      EXPECT_LT(gsum.norm(), 1e-13);
    }
  }
}

TEST(Basis, OutsidePointRejected) {
  std::array<double, 6> v;
  std::array<Vec2, 6> g;
  EXPECT_THROW(eval_basis(1, Vec2(0.7, 0.7), v.data(), g.data()), Error);
  EXPECT_THROW(eval_basis(3, Vec2(0.1, 0.1), v.data(), g.data()), Error);
}

TEST(Quadrature, LowOrderRules) {
  const QuadratureRule r1 = triangle_rule(1);
  ASSERT_EQ(r1.size(), 1);
  EXPECT_NEAR(r1.points[0].x(), 1.0 / 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(r1.weights[0], 0.5);

  const QuadratureRule r2 = triangle_rule(2);
  ASSERT_EQ(r2.size(), 3);
  for (double w : r2.weights) EXPECT_DOUBLE_EQ(w, 1.0 / 6.0);
  // verified against the analytic integrals of x, y, x^2
  double ix = 0.0, iy = 0.0, ixx = 0.0;
  for (int q = 0; q < 3; ++q) {
    ix += r2.weights[q] * r2.points[q].x();
    iy += r2.weights[q] * r2.points[q].y();
    ixx += r2.weights[q] * r2.points[q].x() * r2.points[q].x();
  }
  EXPECT_NEAR(ix, monomial_integral(1, 0), 1e-15);
  EXPECT_NEAR(iy, monomial_integral(0, 1), 1e-15);
  EXPECT_NEAR(ixx, monomial_integral(2, 0), 1e-15);
}

TEST(Quadrature, MonomialExactness) {
  for (int degree = 1; degree <= 4; ++degree) {
    const QuadratureRule rule = triangle_rule(degree);
    double unit = 0.0;
    for (double w : rule.weights) unit += w;
    EXPECT_NEAR(unit, 0.5, 1e-14);
    for (int a = 0; a + 0 <= degree; ++a) {
      for (int b = 0; a + b <= degree; ++b) {
        double acc = 0.0;
        for (int q = 0; q < rule.size(); ++q)
          acc += rule.weights[q] * std::pow(rule.points[q].x(), a) *
                 std::pow(rule.points[q].y(), b);
        EXPECT_NEAR(acc, monomial_integral(a, b), 1e-13)
            << "degree " << degree << " monomial x^" << a << " y^" << b;
      }
    }
  }
  EXPECT_THROW(triangle_rule(5), Error);
}

TEST(Quadrature, EdgeRules) {
  for (int degree : {1, 2, 3, 4, 5}) {
    const QuadratureRule rule = edge_rule(degree);
    for (int k = 0; k <= degree; ++k) {
      double acc = 0.0;
      for (int q = 0; q < rule.size(); ++q)
        acc += rule.weights[q] * std::pow(rule.points[q].x(), k);
      EXPECT_NEAR(acc, 1.0 / (k + 1), 1e-14) << "edge degree " << degree << " s^" << k;
    }
  }
}

TEST(LocalMatrix, MassAnalytic) {
  std::mt19937 rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const auto tri = random_triangle(rng);
    const double area2 = (tri[1] - tri[0]).x() * (tri[2] - tri[0]).y() -
                         (tri[2] - tri[0]).x() * (tri[1] - tri[0]).y();
    const double area = 0.5 * std::abs(area2);
    const LocalMatrix lm = local_mass_matrix(tri);
    DenseMatrix expect(3, 3);
    expect << 2, 1, 1, 1, 2, 1, 1, 1, 2;
    expect *= area / 12.0;
    EXPECT_LT((lm.entries - expect).lpNorm<Eigen::Infinity>(), 1e-12 * area);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) EXPECT_GE(lm.entries(i, j), 0.0);
  }
}

TEST(LocalMatrix, DivOnConstantField) {
  std::mt19937 rng(22);
  for (int order : {1, 2}) {
    const auto tri = random_triangle(rng);
    const LocalMatrix lb = local_div_matrix(tri, order);
    const int nb = basis_size(order);
    Vector constant(2 * nb);
    for (int i = 0; i < nb; ++i) {
      constant[2 * i] = 0.7;
      constant[2 * i + 1] = -1.3;
    }
    EXPECT_LT((lb.entries * constant).norm(), 1e-12);
  }
}

TEST(LocalMatrix, ElasticKernelIsRigidModes) {
  std::mt19937 rng(23);
  for (int order : {1, 2}) {
    for (int trial = 0; trial < 5; ++trial) {
      const auto tri = random_triangle(rng);
      const LocalMatrix la = local_elastic_matrix(tri, 123.0, order);
      EXPECT_LT((la.entries - la.entries.transpose()).lpNorm<Eigen::Infinity>(),
                1e-14 * la.entries.lpNorm<Eigen::Infinity>());

      Eigen::SelfAdjointEigenSolver<DenseMatrix> es(la.entries);
      const Vector ev = es.eigenvalues();
      const double scale = ev.cwiseAbs().maxCoeff();
      int zeros = 0;
      for (int i = 0; i < ev.size(); ++i)
        if (std::abs(ev[i]) < 1e-10 * scale) ++zeros;
      EXPECT_EQ(zeros, 3) << "order " << order;
      EXPECT_GT(ev.minCoeff(), -1e-10 * scale);

      // rigid rotation (-y, x) interpolated at the nodes lies in the kernel
      const int nb = basis_size(order);
      std::vector<Vec2> nodes(tri.begin(), tri.end());
      if (order == 2) {
        nodes.push_back(0.5 * (tri[0] + tri[1]));
        nodes.push_back(0.5 * (tri[1] + tri[2]));
        nodes.push_back(0.5 * (tri[2] + tri[0]));
      }
      Vector rot(2 * nb), tx(2 * nb), ty(2 * nb);
      for (int i = 0; i < nb; ++i) {
        rot[2 * i] = -nodes[i].y();
        rot[2 * i + 1] = nodes[i].x();
        tx[2 * i] = 1.0;
        tx[2 * i + 1] = 0.0;
        ty[2 * i] = 0.0;
        ty[2 * i + 1] = 1.0;
      }
      EXPECT_LT((la.entries * rot).norm(), 1e-10 * scale);
      EXPECT_LT((la.entries * tx).norm(), 1e-10 * scale);
      EXPECT_LT((la.entries * ty).norm(), 1e-10 * scale);
    }
  }
}

TEST(LocalMatrix, DiffusionRowSumsAndSymmetry) {
  std::mt19937 rng(24);
  Mat2 K;
  K << 2.0, 0.3, 0.3, 1.5;
  for (int trial = 0; trial < 5; ++trial) {
    const auto tri = random_triangle(rng);
    const LocalMatrix lf = local_diffusion_matrix(tri, K, 0.7);
    EXPECT_LT((lf.entries - lf.entries.transpose()).lpNorm<Eigen::Infinity>(),
              1e-13 * lf.entries.lpNorm<Eigen::Infinity>());
    const Vector rowsum = lf.entries.rowwise().sum();
    EXPECT_LT(rowsum.lpNorm<Eigen::Infinity>(), 1e-13 * lf.entries.lpNorm<Eigen::Infinity>());
  }
}

TEST(LocalMatrix, DegenerateTriangleRejected) {
  const std::array<Vec2, 3> degen = {Vec2(0, 0), Vec2(1, 1), Vec2(2, 2)};
  EXPECT_THROW(local_mass_matrix(degen), AssemblyError);
}

TEST(LocalInterface, P1TraceAnalytic) {
  const Vec2 a(0.25, 0.5), b(0.75, 0.5);
  const double L = 0.5;
  const LocalMatrix lm = local_interface_matrix(a, b, 1);
  DenseMatrix expect(2, 2);
  expect << 2, 1, 1, 2;
  expect *= L / 6.0;
  EXPECT_LT((lm.entries - expect).lpNorm<Eigen::Infinity>(), 1e-14);
  EXPECT_NEAR(lm.entries.sum(), L, 1e-14);  // constant against constant
}

TEST(LocalInterface, P2TraceAnalytic) {
  // hand integration of linear times quadratic Lagrange products on [0, L]
  const double L = 0.375;
  const Vec2 a(0.0, 0.5), b(L, 0.5);
  const LocalMatrix lm = local_interface_matrix(a, b, 2);
  DenseMatrix expect(2, 3);
  expect << 1.0 / 6.0, 0.0, 1.0 / 3.0, 0.0, 1.0 / 6.0, 1.0 / 3.0;
  expect *= L;
  EXPECT_LT((lm.entries - expect).lpNorm<Eigen::Infinity>(), 1e-14);
}

TEST(LocalInterface, ScalesLinearlyWithLength) {
  const LocalMatrix small = local_interface_matrix(Vec2(0, 0), Vec2(0.25, 0), 1);
  const LocalMatrix big = local_interface_matrix(Vec2(0, 0), Vec2(0.75, 0), 1);
  EXPECT_LT((3.0 * small.entries - big.entries).lpNorm<Eigen::Infinity>(), 1e-14);
  EXPECT_THROW(local_interface_matrix(Vec2(0, 0), Vec2(0, 0), 1), AssemblyError);
}
