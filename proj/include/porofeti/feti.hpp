#pragma once

#include <Eigen/SparseLU>

#include <chrono>
#include <cmath>
#include <future>
#include <memory>
#include <random>
#include <utility>
#include <vector>

#include "porofeti/assembly.hpp"
#include "porofeti/state.hpp"

namespace porofeti {

/// Reusable direct factorization of one subdomain saddle matrix. The
/// factorization is verified on a (fixed-seed) random right-hand side so a
/// structurally singular subproblem fails here and not downstream.
class SubdomainFactorization {
 public:
  explicit SubdomainFactorization(const SparseMatrix& M) : dim_(static_cast<int>(M.rows())) {
    lu_ = std::make_unique<Eigen::SparseLU<SparseMatrix>>();
    lu_->compute(M);
    if (lu_->info() != Eigen::Success)
      throw SingularSubproblemError("subdomain saddle factorization failed (singular block?)");
    std::mt19937 rng(20240901u);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Vector b(dim_);
    for (int i = 0; i < dim_; ++i) b[i] = dist(rng);
    const Vector x = lu_->solve(b);
    const double res = (M * x - b).norm() / b.norm();
    if (!(res < 1e-8))
      throw SingularSubproblemError("subdomain factorization residual " + std::to_string(res) +
                                    " (check boundary constraints)");
  }

  Vector solve(const Vector& b) const { return lu_->solve(b); }
  int dim() const { return dim_; }

 private:
  int dim_ = 0;
  std::unique_ptr<Eigen::SparseLU<SparseMatrix>> lu_;
};

inline SubdomainFactorization factor_subdomain(const SparseMatrix& M) {
  return SubdomainFactorization(M);
}

enum class FetiVariant { generalized, schur };

inline const char* variant_name(FetiVariant v) {
  return v == FetiVariant::generalized ? "feti-generalized" : "feti-schur";
}

enum class PrecondKind { generalized, schur, identity };

struct PcgReport {
  int step = 0;
  std::string variant;
  int iterations = 0;
  bool converged = false;
  double rel_residual = 0.0;
  std::vector<double> residual_history;  // preconditioned norms sqrt(r.z)
  double time_P = 0.0, time_E = 0.0;     // accumulated subdomain solve seconds
};

/// Implicit interface operator K = G_P M_P^{-1} G_P^T + G_E M_E^{-1} G_E^T
/// acting on the multiplier, plus its preconditioner. Both algorithm
/// variants share the operator; they differ in the preconditioner: the
/// Dirichlet one applies the subdomain Schur complements (one interior
/// solve each), the generalized one multiplies by the boundary blocks only.
class FetiOperator {
 public:
  FetiOperator(const BlockSystem& bs, const DofMaps& dofs, FetiVariant variant,
               bool parallel = true)
      : bs_(&bs),
        variant_(variant),
        precond_(variant == FetiVariant::schur ? PrecondKind::schur : PrecondKind::generalized),
        parallel_(parallel),
        fac_P_(bs.P.saddle.matrix),
        fac_E_(bs.E.saddle.matrix) {
    if (variant == FetiVariant::schur) build_schur_data(dofs);
    // dense boundary-block preconditioner, cheap to precompute and to apply
    const SparseMatrix mp = bs.G_P * bs.P.saddle.matrix * bs.G_P.transpose();
    const SparseMatrix me = bs.G_E * bs.E.saddle.matrix * bs.G_E.transpose();
    boundary_precond_ = DenseMatrix(mp) + DenseMatrix(me);
  }

  int n_lambda() const { return bs_->n_lambda; }
  FetiVariant variant() const { return variant_; }
  const BlockSystem& system() const { return *bs_; }
  const SubdomainFactorization& factor_P() const { return fac_P_; }
  const SubdomainFactorization& factor_E() const { return fac_E_; }

  void set_precond(PrecondKind kind) { precond_ = kind; }
  void set_parallel(bool on) { parallel_ = on; }

  /// K lambda: two independent subdomain solves, one per term.
  Vector apply(const Vector& lambda, PcgReport* report = nullptr) const {
    auto part = [&](const SparseMatrix& G, const SubdomainFactorization& fac, double* seconds) {
      const auto t0 = std::chrono::steady_clock::now();
      const Vector y = G * fac.solve(G.transpose() * lambda);
      if (seconds)
        *seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      return y;
    };
    double sp = 0.0, se = 0.0;
    Vector y_P, y_E;
    if (parallel_) {
      auto fut = std::async(std::launch::async,
                            [&] { return part(bs_->G_E, fac_E_, &se); });
      y_P = part(bs_->G_P, fac_P_, &sp);
      y_E = fut.get();
    } else {
      y_P = part(bs_->G_P, fac_P_, &sp);
      y_E = part(bs_->G_E, fac_E_, &se);
    }
    if (report) {
      report->time_P += sp;
      report->time_E += se;
    }
    return y_P + y_E;
  }

  Vector apply_preconditioner(const Vector& r) const {
    switch (precond_) {
      case PrecondKind::identity:
        return r;
      case PrecondKind::generalized:
        return boundary_precond_ * r;
      case PrecondKind::schur: {
        if (parallel_) {
          auto fut = std::async(std::launch::async,
                                [&] { return schur_part(schur_E_, bs_->G_E, r); });
          const Vector z_P = schur_part(schur_P_, bs_->G_P, r);
          return z_P + fut.get();
        }
        return schur_part(schur_P_, bs_->G_P, r) + schur_part(schur_E_, bs_->G_E, r);
      }
    }
    throw SolverError("unreachable preconditioner kind");
  }

  /// Interface right-hand side F = G_P M_P^{-1} b_P + G_E M_E^{-1} b_E - d.
  Vector interface_rhs(const StepRhs& rhs) const {
    if (parallel_) {
      auto fut = std::async(std::launch::async,
                            [&] { return (bs_->G_E * fac_E_.solve(rhs.b_E)).eval(); });
      const Vector f_P = bs_->G_P * fac_P_.solve(rhs.b_P);
      return f_P + fut.get() - rhs.d;
    }
    return bs_->G_P * fac_P_.solve(rhs.b_P) + bs_->G_E * fac_E_.solve(rhs.b_E) - rhs.d;
  }

  /// Recover the subdomain saddle solutions for a converged multiplier.
  std::pair<Vector, Vector> back_substitute(const Vector& lambda, const StepRhs& rhs) const {
    if (parallel_) {
      auto fut = std::async(std::launch::async, [&] {
        return fac_E_.solve(rhs.b_E - bs_->G_E.transpose() * lambda).eval();
      });
      Vector x_P = fac_P_.solve(rhs.b_P - bs_->G_P.transpose() * lambda);
      return {std::move(x_P), fut.get()};
    }
    return {fac_P_.solve(rhs.b_P - bs_->G_P.transpose() * lambda),
            fac_E_.solve(rhs.b_E - bs_->G_E.transpose() * lambda)};
  }

 private:
  struct SchurData {
    std::vector<int> B;                 // free interface trace dofs (saddle indices)
    std::vector<int> I;                 // complement
    SparseMatrix M;                     // the constrained saddle matrix
    std::unique_ptr<Eigen::SparseLU<SparseMatrix>> interior;
  };

  void build_schur_data(const DofMaps& dofs) {
    auto build = [](const SubdomainSystem& sys, const DofMap& u_map, SchurData& sd) {
      std::vector<bool> constrained(sys.dim, false);
      for (int c : sys.saddle.constrained) constrained[c] = true;
      std::vector<bool> is_B(sys.dim, false);
      for (int n = 0; n < u_map.n_nodes; ++n) {
        if (!u_map.node_on_interface[n]) continue;
        for (int c = 0; c < 2; ++c) {
          const int idx = sys.off_u + u_map.dof(n, c);
          if (!constrained[idx]) is_B[idx] = true;
        }
      }
      for (int i = 0; i < sys.dim; ++i) (is_B[i] ? sd.B : sd.I).push_back(i);
      sd.M = sys.saddle.matrix;

      std::vector<int> ipos(sys.dim, -1);
      for (std::size_t k = 0; k < sd.I.size(); ++k) ipos[sd.I[k]] = static_cast<int>(k);
      std::vector<Triplet> ts;
      for (int col = 0; col < sd.M.outerSize(); ++col)
        for (SparseMatrix::InnerIterator it(sd.M, col); it; ++it)
          if (ipos[it.row()] >= 0 && ipos[it.col()] >= 0)
            ts.emplace_back(ipos[it.row()], ipos[it.col()], it.value());
      SparseMatrix M_II(static_cast<int>(sd.I.size()), static_cast<int>(sd.I.size()));
      M_II.setFromTriplets(ts.begin(), ts.end());
      sd.interior = std::make_unique<Eigen::SparseLU<SparseMatrix>>();
      sd.interior->compute(M_II);
      if (sd.interior->info() != Eigen::Success)
        throw SingularSubproblemError("interior block factorization failed");
    };
    build(bs_->P, dofs.u_P, schur_P_);
    build(bs_->E, dofs.u_E, schur_E_);
  }

  /// G_D S_D G_D^T r with S_D = M_BB - M_BI M_II^{-1} M_IB (one interior solve).
  static Vector schur_part(const SchurData& sd, const SparseMatrix& G, const Vector& r) {
    const Vector w = G.transpose() * r;  // supported on the B dofs
    const Vector y = sd.M * w;
    Vector e_I(static_cast<Eigen::Index>(sd.I.size()));
    for (std::size_t k = 0; k < sd.I.size(); ++k) e_I[k] = y[sd.I[k]];
    const Vector v_I = sd.interior->solve(e_I);
    Vector v = Vector::Zero(sd.M.rows());
    for (std::size_t k = 0; k < sd.I.size(); ++k) v[sd.I[k]] = v_I[k];
    const Vector mv = sd.M * v;
    Vector s = Vector::Zero(sd.M.rows());
    for (int idx : sd.B) s[idx] = y[idx] - mv[idx];
    return G * s;
  }

  const BlockSystem* bs_;
  FetiVariant variant_;
  PrecondKind precond_;
  bool parallel_;
  SubdomainFactorization fac_P_, fac_E_;
  DenseMatrix boundary_precond_;
  SchurData schur_P_, schur_E_;
};

inline Vector operator_apply(const FetiOperator& op, const Vector& lambda) {
  return op.apply(lambda);
}

inline Vector preconditioner_apply(const FetiOperator& op, const Vector& r) {
  return op.apply_preconditioner(r);
}

/// Materializes the interface operator column by column (test scaffolding
/// for the small-mesh algebra checks).
inline DenseMatrix materialize_operator(const FetiOperator& op) {
  const int n = op.n_lambda();
  DenseMatrix K(n, n);
  for (int j = 0; j < n; ++j) K.col(j) = op.apply(Vector::Unit(n, j));
  return K;
}

inline DenseMatrix materialize_preconditioner(const FetiOperator& op) {
  const int n = op.n_lambda();
  DenseMatrix M(n, n);
  for (int j = 0; j < n; ++j) M.col(j) = op.apply_preconditioner(Vector::Unit(n, j));
  return M;
}

/// Preconditioned conjugate gradients on the interface system. Follows the
/// standard recursion (alpha, x, r, z = M^{-1} r, beta, p); convergence is
/// measured by the preconditioned residual norm sqrt(r.z) relative to its
/// initial value.
inline std::pair<Vector, PcgReport> feti_pcg(const FetiOperator& op, const Vector& rhs,
                                             const Vector& lambda_init, double tol, int max_iter) {
  if (!(tol > 0.0)) throw SolverError("feti_pcg: tolerance must be positive");
  PcgReport report;
  report.variant = variant_name(op.variant());

  Vector lambda = lambda_init;
  Vector r = rhs - op.apply(lambda, &report);
  Vector z = op.apply_preconditioner(r);
  double rz = r.dot(z);
  const double delta0 = std::sqrt(std::max(rz, 0.0));
  report.residual_history.push_back(delta0);
  if (delta0 == 0.0 || !(delta0 > 0.0)) {
    report.converged = true;
    report.rel_residual = 0.0;
    return {lambda, report};
  }

  Vector p = z;
  for (int k = 0; k < max_iter; ++k) {
    const Vector Kp = op.apply(p, &report);
    const double pKp = p.dot(Kp);
    if (pKp <= 1e-14 * p.squaredNorm())
      throw PcgBreakdownError("feti_pcg: <p, Kp> not positive (operator not SPD?)");
    const double alpha = rz / pKp;
    lambda += alpha * p;
    r -= alpha * Kp;
    z = op.apply_preconditioner(r);
    const double rz_next = r.dot(z);
    const double delta = std::sqrt(std::max(rz_next, 0.0));
    report.residual_history.push_back(delta);
    report.iterations = k + 1;
    if (delta <= tol * delta0) {
      report.converged = true;
      rz = rz_next;
      break;
    }
    if (rz_next <= 0.0)
      throw PcgBreakdownError("feti_pcg: preconditioned residual norm lost positivity");
    const double beta = rz_next / rz;
    rz = rz_next;
    p = z + beta * p;
  }
  report.rel_residual = report.residual_history.back() / delta0;
  return {lambda, report};
}

/// Direct sparse solve of the full coupled system in the printed block
/// order (u_P, xi_P, eta, p, u_E, xi_E, lambda); the oracle the iterative
/// path is validated against.
class MonolithicSolver {
 public:
  MonolithicSolver(const BlockSystem& bs, const DofMaps& dofs, const ModelParams& params)
      : bs_(&bs) {
    n_uP_ = dofs.u_P.n_dofs;
    n_sP_ = dofs.s_P.n_dofs;
    n_uE_ = dofs.u_E.n_dofs;
    n_sE_ = dofs.s_E.n_dofs;
    off_uP_ = 0;
    off_xiP_ = n_uP_;
    off_eta_ = n_uP_ + n_sP_;
    off_p_ = n_uP_ + 2 * n_sP_;
    off_uE_ = n_uP_ + 3 * n_sP_;
    off_xiE_ = off_uE_ + n_uE_;
    off_lambda_ = off_xiE_ + n_sE_;
    dim_ = off_lambda_ + bs.n_lambda;

    // multiplier rows restricted to the kept set, unsigned
    SparseMatrix HkP(bs.n_lambda, n_uP_), HkE(bs.n_lambda, n_uE_);
    {
      std::vector<Triplet> tp, te;
      auto restrict_rows = [&](const SparseMatrix& H, std::vector<Triplet>& ts) {
        for (int col = 0; col < H.outerSize(); ++col)
          for (SparseMatrix::InnerIterator it(H, col); it; ++it) {
            const int kept = bs.lambda_map.full_to_kept[it.row()];
            if (kept >= 0) ts.emplace_back(kept, it.col(), it.value());
          }
      };
      restrict_rows(bs.H_P_full, tp);
      restrict_rows(bs.H_E_full, te);
      HkP.setFromTriplets(tp.begin(), tp.end());
      HkE.setFromTriplets(te.begin(), te.end());
    }

    std::vector<Triplet> ts;
    detail::scatter_block(ts, bs.raw_P.A, off_uP_, off_uP_, 1.0);
    detail::scatter_block_t(ts, bs.raw_P.B, off_uP_, off_xiP_, 1.0);
    detail::scatter_block_t(ts, HkP, off_uP_, off_lambda_, 1.0);
    detail::scatter_block(ts, bs.raw_P.B, off_xiP_, off_uP_, 1.0);
    detail::scatter_block(ts, bs.raw_P.R, off_xiP_, off_xiP_, -params.kappa3);
    detail::scatter_block(ts, bs.raw_P.R, off_xiP_, off_eta_, params.kappa1);
    detail::scatter_block(ts, bs.raw_P.R, off_eta_, off_xiP_, params.kappa1);
    detail::scatter_block(ts, bs.raw_P.R, off_eta_, off_eta_, params.kappa2);
    detail::scatter_block(ts, bs.raw_P.R, off_eta_, off_p_, -1.0);
    detail::scatter_block(ts, bs.raw_P.R, off_p_, off_eta_, -1.0);
    detail::scatter_block(ts, bs.raw_P.Af, off_p_, off_p_, -bs.tau);
    detail::scatter_block(ts, bs.raw_E.A, off_uE_, off_uE_, 1.0);
    detail::scatter_block_t(ts, bs.raw_E.B, off_uE_, off_xiE_, 1.0);
    detail::scatter_block_t(ts, HkE, off_uE_, off_lambda_, -1.0);
    detail::scatter_block(ts, bs.raw_E.B, off_xiE_, off_uE_, 1.0);
    detail::scatter_block(ts, bs.raw_E.R, off_xiE_, off_xiE_, -1.0 / params.lambda_E);
    detail::scatter_block(ts, HkP, off_lambda_, off_uP_, 1.0);
    detail::scatter_block(ts, HkE, off_lambda_, off_uE_, -1.0);
    raw_matrix_.resize(dim_, dim_);
    raw_matrix_.setFromTriplets(ts.begin(), ts.end());

    std::vector<std::pair<int, Constraint>> items;
    for (const auto& c : bs.P.constraints) {
      const int off = c.field == FieldKind::displacement ? off_uP_ : off_p_;
      items.emplace_back(off + c.dof, c);
    }
    for (const auto& c : bs.E.constraints) items.emplace_back(off_uE_ + c.dof, c);
    std::sort(items.begin(), items.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<int> idx;
    for (auto& [i, c] : items) {
      idx.push_back(i);
      constraints_.push_back(c);
      constraint_side_.push_back(i < off_uE_ ? Subdomain::P : Subdomain::E);
    }
    elim_ = apply_constraints(raw_matrix_, idx);
    lu_.compute(elim_.matrix);
    if (lu_.info() != Eigen::Success)
      throw SingularSubproblemError("monolithic factorization failed");
  }

  int dim() const { return dim_; }
  const SparseMatrix& raw_matrix() const { return raw_matrix_; }
  const SparseMatrix& matrix() const { return elim_.matrix; }

  Vector assemble_rhs(const Mesh& mesh_P, const Mesh& mesh_E, const DofMaps& dofs,
                      const Scenario& scenario, const ModelParams& params, double t,
                      const Vector& eta_prev) const {
    const StepLoads loads = assemble_loads(mesh_P, mesh_E, dofs, scenario, params, t);
    Vector rhs = Vector::Zero(dim_);
    rhs.segment(off_uP_, n_uP_) = loads.F_P;
    rhs.segment(off_p_, n_sP_) = -(bs_->raw_P.R * eta_prev) - bs_->tau * loads.Z;
    rhs.segment(off_uE_, n_uE_) = loads.F_E;

    Vector g(constraints_.size());
    for (std::size_t k = 0; k < constraints_.size(); ++k) {
      const Constraint& c = constraints_[k];
      const VectorFn& u_bc =
          constraint_side_[k] == Subdomain::P ? scenario.u_bc_P : scenario.u_bc_E;
      g[k] = c.field == FieldKind::displacement ? u_bc(c.coords, t)[c.component]
                                                : scenario.p_bc(c.coords, t);
    }
    lift_rhs(rhs, elim_, g);
    return rhs;
  }

  StateSnapshot solve(const Vector& rhs) const {
    const Vector x = lu_.solve(rhs);
    if (lu_.info() != Eigen::Success) throw SolverError("monolithic solve failed");
    StateSnapshot s;
    s.u_P = x.segment(off_uP_, n_uP_);
    s.xi_P = x.segment(off_xiP_, n_sP_);
    s.eta = x.segment(off_eta_, n_sP_);
    s.p = x.segment(off_p_, n_sP_);
    s.u_E = x.segment(off_uE_, n_uE_);
    s.xi_E = x.segment(off_xiE_, n_sE_);
    s.lambda = x.segment(off_lambda_, bs_->n_lambda);
    return s;
  }

  int off_lambda() const { return off_lambda_; }

 private:
  const BlockSystem* bs_;
  int n_uP_ = 0, n_sP_ = 0, n_uE_ = 0, n_sE_ = 0, dim_ = 0;
  int off_uP_ = 0, off_xiP_ = 0, off_eta_ = 0, off_p_ = 0, off_uE_ = 0, off_xiE_ = 0,
      off_lambda_ = 0;
  SparseMatrix raw_matrix_;
  Elimination elim_;
  std::vector<Constraint> constraints_;
  std::vector<Subdomain> constraint_side_;
  Eigen::SparseLU<SparseMatrix> lu_;
};

/// Unpack the two saddle solutions into named fields.
inline StateSnapshot unpack_state(const BlockSystem& bs, const Vector& x_P, const Vector& x_E,
                                  const Vector& lambda) {
  StateSnapshot s;
  s.u_P = x_P.segment(bs.P.off_u, bs.P.n_u);
  s.eta = x_P.segment(bs.P.off_eta, bs.P.n_s);
  s.xi_P = x_P.segment(bs.P.off_xi, bs.P.n_s);
  s.p = x_P.segment(bs.P.off_p, bs.P.n_s);
  s.u_E = x_E.segment(bs.E.off_u, bs.E.n_u);
  s.xi_E = x_E.segment(bs.E.off_xi, bs.E.n_s);
  s.lambda = lambda;
  return s;
}

}  // namespace porofeti
