#pragma once

#include <Eigen/Core>
#include <Eigen/Sparse>

#include <stdexcept>
#include <string>

namespace porofeti {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

/// Which of the two coupled layers a mesh or field lives on.
enum class Subdomain { P, E };

inline const char* subdomain_name(Subdomain s) { return s == Subdomain::P ? "P" : "E"; }

struct Rect {
  double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
  bool degenerate() const { return width() <= 0.0 || height() <= 0.0; }
};

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class MeshError : public Error {
 public:
  using Error::Error;
};

class NonConformingInterfaceError : public Error {
 public:
  using Error::Error;
};

class AssemblyError : public Error {
 public:
  using Error::Error;
};

class SingularSubproblemError : public Error {
 public:
  using Error::Error;
};

class PcgBreakdownError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

constexpr double kGeomTol = 1e-12;

}  // namespace porofeti
