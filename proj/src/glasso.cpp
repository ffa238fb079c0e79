#include "eigengap/glasso.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>

namespace eigengap {

namespace {

// min x^T A x over the box |x - center| <= rho, A symmetric positive
// definite, by cyclic coordinate descent. Each coordinate has the closed-form
// unconstrained step -g_k / A_kk followed by clipping into the box.
Vector box_qp_minimize(const Matrix& a, const Vector& center, double rho,
                       Vector x, double tol, int max_cycles) {
  const Index m = a.rows();
  for (Index k = 0; k < m; ++k)
    x(k) = std::clamp(x(k), center(k) - rho, center(k) + rho);

  for (int cycle = 0; cycle < max_cycles; ++cycle) {
    double max_change = 0.0;
    for (Index k = 0; k < m; ++k) {
      const double off = a.col(k).dot(x) - a(k, k) * x(k);
      const double cand = -off / a(k, k);
      const double nx = std::clamp(cand, center(k) - rho, center(k) + rho);
      max_change = std::max(max_change, std::abs(nx - x(k)));
      x(k) = nx;
    }
    if (max_change <= tol) return x;
  }
  throw ConvergenceFailure(
      "bcd_column_update: inner coordinate descent exhausted " +
          std::to_string(max_cycles) + " cycles",
      0.0, max_cycles);
}

}  // namespace

double neg_log_det(const Matrix& c) {
  Eigen::LLT<Matrix> llt(c);
  if (llt.info() != Eigen::Success)
    throw NumericalFailure("neg_log_det: matrix is not positive definite");
  return -2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

GlassoState init_dual(const Matrix& cov, double rho) {
  require_symmetric(cov, "init_dual");
  if (rho < 0.0) throw InvalidInput("init_dual: rho must be >= 0");

  GlassoState state;
  state.cov = cov;
  state.c = cov + rho * Matrix::Identity(cov.rows(), cov.cols());
  Eigen::LLT<Matrix> llt(state.c);
  if (llt.info() != Eigen::Success)
    throw NumericalFailure("init_dual: cov + rho*I is not positive definite");
  return state;
}

namespace {

// Returns false when the whole box slice for column j is incompatible with
// positive definiteness (no update applied). From a box-feasible iterate this
// cannot happen; it can after a projection moved C far outside the box.
bool try_bcd_column_update(GlassoState& state, Index j, double rho,
                           const GlassoConfig& cfg) {
  const Index n = state.c.rows();
  if (j < 0 || j >= n) throw InvalidInput("bcd_column_update: column index out of range");
  if (rho < 0.0) throw InvalidInput("bcd_column_update: rho must be >= 0");

  // Partition out row/column j.
  Matrix c11(n - 1, n - 1);
  Vector center(n - 1), x(n - 1);
  for (Index r = 0, rr = 0; r < n; ++r) {
    if (r == j) continue;
    center(rr) = state.cov(r, j);
    x(rr) = state.c(r, j);
    for (Index s = 0, ss = 0; s < n; ++s) {
      if (s == j) continue;
      c11(rr, ss) = state.c(r, s);
      ++ss;
    }
    ++rr;
  }

  Eigen::LLT<Matrix> llt(c11);
  if (llt.info() != Eigen::Success)
    throw NumericalFailure("bcd_column_update: principal block lost positive definiteness");
  const Matrix c11_inv = llt.solve(Matrix::Identity(n - 1, n - 1));

  if (rho == 0.0) {
    x = center;  // the box collapses to a point
  } else {
    x = box_qp_minimize(c11_inv, center, rho, x, cfg.inner_tol, cfg.inner_max_cycles);
  }

  const double diag = state.cov(j, j) + rho;
  const double schur = diag - x.dot(c11_inv * x);
  if (schur <= 0.0) return false;

  for (Index r = 0, rr = 0; r < n; ++r) {
    if (r == j) continue;
    state.c(r, j) = x(rr);
    state.c(j, r) = x(rr);
    ++rr;
  }
  state.c(j, j) = diag;
  return true;
}

}  // namespace

void bcd_column_update(GlassoState& state, Index j, double rho,
                       const GlassoConfig& cfg) {
  if (!try_bcd_column_update(state, j, rho, cfg))
    throw NumericalFailure(
        "bcd_column_update: no positive definite column exists inside the box");
}

GlassoResult glasso_learn(const Matrix& cov, const Vector& u,
                          const ProjectionConfig& proj_cfg,
                          const GlassoConfig& glasso_cfg) {
  proj_cfg.validate();
  glasso_cfg.validate();

  GlassoState state = init_dual(cov, glasso_cfg.rho);

  GlassoResult out;
  const Index n = cov.rows();
  for (int sweep = 1; sweep <= glasso_cfg.max_sweeps; ++sweep) {
    const Matrix c_old = state.c;
    for (Index j = 0; j < n; ++j) {
      // After a projection the iterate can sit so far outside the box that a
      // column has no positive definite point in it; keep that column and move
      // on, the remaining columns and the next projection still make progress.
      if (!try_bcd_column_update(state, j, glasso_cfg.rho, glasso_cfg))
        ++out.skipped_updates;
    }
    state.sweep_count = sweep;
    state.objective_trace.push_back(neg_log_det(state.c));

    ProjectionResult proj = project(state.c, u, proj_cfg);
    state.c = proj.c;
    out.decomp = std::move(proj.decomp);
    out.sweeps = sweep;

    const double change = (state.c - c_old).norm();
    if (change <= glasso_cfg.outer_tol * c_old.norm()) {
      out.converged = true;
      break;
    }
  }

  // Invert through the decomposition; with floored eigenvalues this is the
  // exact inverse of the projected C and shares its eigenvectors.
  const double smallest = out.decomp.values.minCoeff();
  if (!(smallest > 0.0))
    throw NumericalFailure("glasso_learn: projected covariance is singular");
  out.laplacian = symmetrized(out.decomp.vectors *
                              out.decomp.values.cwiseInverse().asDiagonal() *
                              out.decomp.vectors.transpose());
  out.objective_trace = state.objective_trace;
  out.c = state.c;
  return out;
}

}  // namespace eigengap
