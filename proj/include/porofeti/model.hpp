#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>

#include "porofeti/core.hpp"
#include "porofeti/mesh.hpp"

namespace porofeti {

/// Shear modulus convention. `paper` uses mu = E/(1+nu), matching the
/// parameter tables this solver is compared against; `standard` uses the
/// textbook mu = E/(2(1+nu)).
enum class MuConvention { paper, standard };

struct LameConstants {
  double lambda = 0.0;
  double mu = 0.0;
};

inline LameConstants lame_from_young_poisson(double E, double nu,
                                             MuConvention conv = MuConvention::paper) {
  if (E <= 0.0) throw Error("lame_from_young_poisson: E must be positive");
  if (nu < 0.0 || nu >= 0.5) throw Error("lame_from_young_poisson: need 0 <= nu < 0.5");
  LameConstants lame;
  lame.lambda = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
  lame.mu = conv == MuConvention::paper ? E / (1.0 + nu) : E / (2.0 * (1.0 + nu));
  return lame;
}

struct Kappas {
  double k1 = 0.0, k2 = 0.0, k3 = 0.0;
};

inline Kappas derived_kappas(double alpha, double c0, double lambda_P) {
  const double den = alpha * alpha + c0 * lambda_P;
  if (den <= 0.0) throw Error("derived_kappas: alpha^2 + c0*lambda_P must be positive");
  return {alpha / den, lambda_P / den, c0 / den};
}

struct ModelParams {
  double E_P = 1e4, nu_P = 0.2, E_E = 1e4, nu_E = 0.2;
  double lambda_P = 0.0, mu_P = 0.0, lambda_E = 0.0, mu_E = 0.0;
  double alpha = 1.0;
  double c0 = 0.1;
  Mat2 K = Mat2::Identity();
  double mu_f = 1.0;
  double rho_f = 0.0;
  Vec2 gravity = Vec2::Zero();
  double kappa1 = 0.0, kappa2 = 0.0, kappa3 = 0.0;
  MuConvention mu_convention = MuConvention::paper;
};

inline ModelParams make_params(double E_P, double nu_P, double E_E, double nu_E, double alpha,
                               double c0, const Mat2& K, double mu_f, double rho_f = 0.0,
                               const Vec2& gravity = Vec2::Zero(),
                               MuConvention conv = MuConvention::paper) {
  ModelParams p;
  p.E_P = E_P;
  p.nu_P = nu_P;
  p.E_E = E_E;
  p.nu_E = nu_E;
  const LameConstants lp = lame_from_young_poisson(E_P, nu_P, conv);
  const LameConstants le = lame_from_young_poisson(E_E, nu_E, conv);
  p.lambda_P = lp.lambda;
  p.mu_P = lp.mu;
  p.lambda_E = le.lambda;
  p.mu_E = le.mu;
  p.alpha = alpha;
  p.c0 = c0;
  if ((K - K.transpose()).lpNorm<Eigen::Infinity>() > 1e-14 * (1.0 + K.lpNorm<Eigen::Infinity>()))
    throw Error("make_params: permeability tensor must be symmetric");
  Eigen::SelfAdjointEigenSolver<Mat2> es(K);
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw Error("make_params: permeability tensor must be positive definite");
  p.K = K;
  if (mu_f <= 0.0) throw Error("make_params: fluid viscosity must be positive");
  p.mu_f = mu_f;
  p.rho_f = rho_f;
  p.gravity = gravity;
  const Kappas k = derived_kappas(alpha, c0, lp.lambda);
  p.kappa1 = k.k1;
  p.kappa2 = k.k2;
  p.kappa3 = k.k3;
  p.mu_convention = conv;
  return p;
}

inline ModelParams default_params(double E = 1e4, double nu = 0.2,
                                  MuConvention conv = MuConvention::paper) {
  return make_params(E, nu, E, nu, 1.0, 0.1, Mat2::Identity(), 1.0, 0.0, Vec2::Zero(), conv);
}

using ScalarFn = std::function<double(const Vec2&, double)>;
using VectorFn = std::function<Vec2(const Vec2&, double)>;
using TensorFn = std::function<Mat2(const Vec2&, double)>;

/// Closed-form fields of a scenario with a known solution.
struct ExactSolution {
  VectorFn u_P, u_E;
  TensorFn grad_u_P, grad_u_E;  // rows: component, cols: d/dx, d/dy
  ScalarFn p;
  VectorFn grad_p;
  ScalarFn div_u_P, div_u_E;
  ScalarFn xi_P, xi_E;
};

/// Everything that defines one concrete problem: geometry split, forcing,
/// boundary data per facet tag, and initial data.
struct Scenario {
  std::string name;
  double default_T = 1.0;
  double default_dt = 1e-2;
  Rect rect_P, rect_E;
  double interface_y = 0.5;

  std::optional<ExactSolution> exact;

  VectorFn f_P, f_E;
  ScalarFn z_source;

  VectorFn u_bc_P, u_bc_E;  // essential displacement values
  ScalarFn p_bc;            // essential pressure values
  VectorFn traction_P, traction_E;
  ScalarFn flux_zw;

  VectorFn u0_P, u0_E;
  ScalarFn p0;
  ScalarFn div_u0_P, div_u0_E;

  TagRule tag_rule_P, tag_rule_E;
};

namespace detail {

inline bool near(double a, double b) { return std::abs(a - b) < 1e-9; }

}  // namespace detail

/// Stationary manufactured solution on the unit square split at y = 1/2.
/// The elastic-side displacement carries a correction that keeps both the
/// displacement and the total normal stress continuous across the interface.
inline Scenario mms_scenario(const ModelParams& params) {
  using std::numbers::pi;

  Scenario sc;
  sc.name = "mms";
  sc.default_T = 1e-2;
  sc.default_dt = 1e-4;
  sc.rect_P = {0.0, 0.0, 1.0, 0.5};
  sc.rect_E = {0.0, 0.5, 1.0, 1.0};
  sc.interface_y = 0.5;

  const double mu_P = params.mu_P, lam_P = params.lambda_P;
  const double mu_E = params.mu_E, lam_E = params.lambda_E;
  const double alpha = params.alpha;
  const double gamma = alpha / (lam_P + 2.0 * mu_P);

  auto s = [](const Vec2& x) { return std::sin(2.0 * pi * x.x()) * std::sin(2.0 * pi * x.y()); };
  auto s_x = [](const Vec2& x) {
    return 2.0 * pi * std::cos(2.0 * pi * x.x()) * std::sin(2.0 * pi * x.y());
  };
  auto s_y = [](const Vec2& x) {
    return 2.0 * pi * std::sin(2.0 * pi * x.x()) * std::cos(2.0 * pi * x.y());
  };
  auto cc = [](const Vec2& x) { return std::cos(2.0 * pi * x.x()) * std::cos(2.0 * pi * x.y()); };

  auto pf = [](const Vec2& x) { return std::sin(pi * x.x()) * std::sin(pi * x.y()); };
  auto p_x = [](const Vec2& x) { return pi * std::cos(pi * x.x()) * std::sin(pi * x.y()); };
  auto p_y = [](const Vec2& x) { return pi * std::sin(pi * x.x()) * std::cos(pi * x.y()); };
  auto p_xx = [pf](const Vec2& x) { return -pi * pi * pf(x); };
  auto p_yy = [pf](const Vec2& x) { return -pi * pi * pf(x); };
  auto p_xy = [](const Vec2& x) { return pi * pi * std::cos(pi * x.x()) * std::cos(pi * x.y()); };

  auto div_u = [s_x, s_y](const Vec2& x) { return s_x(x) + s_y(x); };
  auto ddx_div_u = [s, cc](const Vec2& x) {
    return 4.0 * pi * pi * (cc(x) - s(x));
  };
  auto ddy_div_u = ddx_div_u;  // symmetric in x and y

  // correction c(x,y) = -gamma * p * (y - 1/2) added to the second component on E
  auto corr = [pf, gamma](const Vec2& x) { return -gamma * pf(x) * (x.y() - 0.5); };
  auto corr_x = [p_x, gamma](const Vec2& x) { return -gamma * p_x(x) * (x.y() - 0.5); };
  auto corr_y = [p_y, pf, gamma](const Vec2& x) {
    return -gamma * (p_y(x) * (x.y() - 0.5) + pf(x));
  };
  auto corr_xx = [p_xx, gamma](const Vec2& x) { return -gamma * p_xx(x) * (x.y() - 0.5); };
  auto corr_xy = [p_xy, p_x, gamma](const Vec2& x) {
    return -gamma * (p_xy(x) * (x.y() - 0.5) + p_x(x));
  };
  auto corr_yy = [p_yy, p_y, gamma](const Vec2& x) {
    return -gamma * (p_yy(x) * (x.y() - 0.5) + 2.0 * p_y(x));
  };

  ExactSolution ex;
  ex.u_P = [s](const Vec2& x, double) { return Vec2(s(x), s(x)); };
  ex.u_E = [s, corr](const Vec2& x, double) { return Vec2(s(x), s(x) + corr(x)); };
  ex.grad_u_P = [s_x, s_y](const Vec2& x, double) {
    Mat2 g;
    g << s_x(x), s_y(x), s_x(x), s_y(x);
    return g;
  };
  ex.grad_u_E = [s_x, s_y, corr_x, corr_y](const Vec2& x, double) {
    Mat2 g;
    g << s_x(x), s_y(x), s_x(x) + corr_x(x), s_y(x) + corr_y(x);
    return g;
  };
  ex.p = [pf](const Vec2& x, double) { return pf(x); };
  ex.grad_p = [p_x, p_y](const Vec2& x, double) { return Vec2(p_x(x), p_y(x)); };
  ex.div_u_P = [div_u](const Vec2& x, double) { return div_u(x); };
  ex.div_u_E = [div_u, corr_y](const Vec2& x, double) { return div_u(x) + corr_y(x); };
  ex.xi_P = [pf, div_u, alpha, lam_P](const Vec2& x, double) {
    return alpha * pf(x) - lam_P * div_u(x);
  };
  ex.xi_E = [div_u, corr_y, lam_E](const Vec2& x, double) {
    return -lam_E * (div_u(x) + corr_y(x));
  };
  sc.exact = ex;

  // div eps(u_P) has equal components for this symmetric field
  auto div_eps_u = [s, cc](const Vec2& x) {
    return 2.0 * pi * pi * (cc(x) - 3.0 * s(x));
  };

  sc.f_P = [div_eps_u, p_x, p_y, ddx_div_u, ddy_div_u, mu_P, lam_P, alpha](const Vec2& x, double) {
    const double de = div_eps_u(x);
    return Vec2(-2.0 * mu_P * de + alpha * p_x(x) - lam_P * ddx_div_u(x),
                -2.0 * mu_P * de + alpha * p_y(x) - lam_P * ddy_div_u(x));
  };
  sc.f_E = [div_eps_u, ddx_div_u, ddy_div_u, corr_xx, corr_xy, corr_yy, mu_E,
            lam_E](const Vec2& x, double) {
    const double de = div_eps_u(x);
    return Vec2(-2.0 * mu_E * (de + 0.5 * corr_xy(x)) - lam_E * (ddx_div_u(x) + corr_xy(x)),
                -2.0 * mu_E * (de + 0.5 * corr_xx(x) + corr_yy(x)) -
                    lam_E * (ddy_div_u(x) + corr_yy(x)));
  };
  // stationary fields: eta_t = 0, so z = div w(p)
  const Mat2 K = params.K;
  const double mu_f = params.mu_f;
  sc.z_source = [p_xx, p_xy, p_yy, K, mu_f](const Vec2& x, double) {
    return -(K(0, 0) * p_xx(x) + 2.0 * K(0, 1) * p_xy(x) + K(1, 1) * p_yy(x)) / mu_f;
  };

  sc.u_bc_P = ex.u_P;
  sc.u_bc_E = ex.u_E;
  sc.p_bc = ex.p;
  sc.traction_P = [](const Vec2&, double) { return Vec2::Zero().eval(); };
  sc.traction_E = [](const Vec2&, double) { return Vec2::Zero().eval(); };
  sc.flux_zw = [](const Vec2&, double) { return 0.0; };

  sc.u0_P = ex.u_P;
  sc.u0_E = ex.u_E;
  sc.p0 = ex.p;
  sc.div_u0_P = ex.div_u_P;
  sc.div_u0_E = ex.div_u_E;

  sc.tag_rule_P = [](const Vec2& m) -> std::optional<FacetTag> {
    if (detail::near(m.y(), 0.5)) return FacetTag::interface();
    return FacetTag::dirichlet_displacement(FacetTag::Pressure::dirichlet);
  };
  sc.tag_rule_E = [](const Vec2& m) -> std::optional<FacetTag> {
    if (detail::near(m.y(), 0.5)) return FacetTag::interface();
    return FacetTag::dirichlet_displacement();
  };
  return sc;
}

/// Time-periodic pressure load on part of the drained bottom edge; zero
/// forcing and zero initial state. Side walls block horizontal motion,
/// bottom and top block vertical motion.
inline Scenario barry_mercer_scenario(const ModelParams& params) {
  Scenario sc;
  sc.name = "barry-mercer";
  sc.default_T = 1.0;
  sc.default_dt = 1e-2;
  sc.rect_P = {0.0, 0.0, 1.0, 0.5};
  sc.rect_E = {0.0, 0.5, 1.0, 1.0};
  sc.interface_y = 0.5;

  auto p2 = [](const Vec2& x, double t) {
    return (x.x() >= 0.2 && x.x() <= 0.8) ? std::sin(t) : 0.0;
  };

  sc.f_P = [](const Vec2&, double) { return Vec2::Zero().eval(); };
  sc.f_E = [](const Vec2&, double) { return Vec2::Zero().eval(); };
  sc.z_source = [](const Vec2&, double) { return 0.0; };

  sc.u_bc_P = [](const Vec2&, double) { return Vec2::Zero().eval(); };
  sc.u_bc_E = [](const Vec2&, double) { return Vec2::Zero().eval(); };
  sc.p_bc = [p2](const Vec2& x, double t) { return detail::near(x.y(), 0.0) ? p2(x, t) : 0.0; };
  const double alpha = params.alpha;
  sc.traction_P = [p2, alpha](const Vec2& x, double t) {
    return detail::near(x.y(), 0.0) ? Vec2(0.0, alpha * p2(x, t)) : Vec2(0.0, 0.0);
  };
  sc.traction_E = [](const Vec2&, double) { return Vec2::Zero().eval(); };
  sc.flux_zw = [](const Vec2&, double) { return 0.0; };

  sc.u0_P = [](const Vec2&, double) { return Vec2::Zero().eval(); };
  sc.u0_E = [](const Vec2&, double) { return Vec2::Zero().eval(); };
  sc.p0 = [](const Vec2&, double) { return 0.0; };
  sc.div_u0_P = [](const Vec2&, double) { return 0.0; };
  sc.div_u0_E = [](const Vec2&, double) { return 0.0; };

  // Gamma_1/Gamma_3: side walls, u1 = 0, drained. Gamma_2: bottom, u2 = 0,
  // prescribed pressure and normal load. Gamma_4: top, u2 = 0.
  sc.tag_rule_P = [](const Vec2& m) -> std::optional<FacetTag> {
    if (detail::near(m.y(), 0.5)) return FacetTag::interface();
    if (detail::near(m.y(), 0.0)) return FacetTag{2u, FacetTag::Pressure::dirichlet, false};
    if (detail::near(m.x(), 0.0) || detail::near(m.x(), 1.0))
      return FacetTag{1u, FacetTag::Pressure::dirichlet, false};
    return std::nullopt;
  };
  sc.tag_rule_E = [](const Vec2& m) -> std::optional<FacetTag> {
    if (detail::near(m.y(), 0.5)) return FacetTag::interface();
    if (detail::near(m.y(), 1.0)) return FacetTag{2u, FacetTag::Pressure::none, false};
    if (detail::near(m.x(), 0.0) || detail::near(m.x(), 1.0))
      return FacetTag{1u, FacetTag::Pressure::none, false};
    return std::nullopt;
  };
  return sc;
}

inline Scenario scenario_by_name(const std::string& name, const ModelParams& params) {
  if (name == "mms") return mms_scenario(params);
  if (name == "barry-mercer") return barry_mercer_scenario(params);
  throw ConfigError("unknown scenario '" + name + "' (expected mms or barry-mercer)");
}

}  // namespace porofeti
