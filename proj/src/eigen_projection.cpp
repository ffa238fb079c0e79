#include "eigengap/eigen_projection.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>

namespace eigengap {

namespace {

void require_unit(const Vector& u, const char* what) {
  if (!u.allFinite()) throw InvalidInput(std::string(what) + ": non-finite vector");
  if (std::abs(u.norm() - 1.0) > 1e-10)
    throw InvalidInput(std::string(what) + ": vector is not unit norm");
}

void require_psd_input(const Matrix& cov, const char* what) {
  const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
  if (!is_psd(cov, 1e-8 * scale))
    throw InvalidInput(std::string(what) + ": matrix is not PSD within tolerance");
}

// Orthonormal basis of the orthogonal complement of span(basis): the trailing
// columns of the full Q factor of basis.
Matrix complement_basis(const Matrix& basis) {
  const Index n = basis.rows();
  const Index k = basis.cols();
  Eigen::HouseholderQR<Matrix> qr(basis);
  Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  return q.rightCols(n - k);
}

// Two Gram-Schmidt passes; the second mops up the rounding of the first.
Vector orthogonalized(Vector v, const Matrix& basis) {
  for (int pass = 0; pass < 2; ++pass)
    v.noalias() -= basis * (basis.transpose() * v);
  return v;
}

Vector fallback_complement_vector(const Matrix& basis) {
  const Index n = basis.rows();
  for (Index k = 0; k < n; ++k) {
    Vector v = orthogonalized(Vector::Unit(n, k), basis);
    if (v.norm() > 0.5) return canonical_sign(v.normalized());
  }
  throw NumericalFailure("direction solve: orthogonal complement is empty");
}

}  // namespace

void ProjectionConfig::validate() const {
  if (!(kappa > 0.0)) throw InvalidInput("ProjectionConfig: kappa must be positive");
  if (!(gamma > 0.0)) throw InvalidInput("ProjectionConfig: gamma must be positive");
  if (pg_step > 0.0 && pg_step > 1.0 / (2.0 * gamma))
    throw InvalidInput("ProjectionConfig: pg_step exceeds the Lipschitz-safe bound 1/(2 gamma)");
  if (!(pg_tol > 0.0)) throw InvalidInput("ProjectionConfig: pg_tol must be positive");
  if (pg_max_iter < 1) throw InvalidInput("ProjectionConfig: pg_max_iter must be >= 1");
  if (exact_threshold < 0) throw InvalidInput("ProjectionConfig: exact_threshold must be >= 0");
}

void validate_decomposition(const SpectralDecomposition& d, double kappa) {
  const Index n = d.size();
  if (d.vectors.rows() != n || d.vectors.cols() != n)
    throw InvalidInput("SpectralDecomposition: shape mismatch");
  for (Index i = 0; i < n; ++i) {
    if (std::abs(d.vectors.col(i).norm() - 1.0) > 1e-10)
      throw NumericalFailure("SpectralDecomposition: eigenvector not unit norm");
    for (Index j = i + 1; j < n; ++j)
      if (std::abs(d.vectors.col(i).dot(d.vectors.col(j))) > 1e-8)
        throw NumericalFailure("SpectralDecomposition: eigenvectors not orthogonal");
  }
  for (Index i = 0; i + 1 < n; ++i)
    if (d.values(i) > d.values(i + 1) + 1e-12)
      throw NumericalFailure("SpectralDecomposition: eigenvalues not ascending");
  if (n >= 2 && d.top_gap() > kappa + 1e-9)
    throw NumericalFailure("SpectralDecomposition: eigen-gap exceeds kappa");
}

LastEigen last_eigenpair(const Matrix& cov, const Vector& u, double energy_floor) {
  require_symmetric(cov, "last_eigenpair");
  if (u.size() != cov.rows()) throw InvalidInput("last_eigenpair: dimension mismatch");
  require_unit(u, "last_eigenpair");
  require_psd_input(cov, "last_eigenpair");

  LastEigen out;
  out.lambda_n = u.dot(cov * u);
  if (out.lambda_n <= energy_floor)
    throw InvalidInput("last_eigenpair: u carries no energy in cov");
  out.residual = symmetrized(cov - out.lambda_n * (u * u.transpose()));
  return out;
}

EigenPair solve_direction_exact(const Matrix& residual, const Matrix& basis) {
  require_symmetric(residual, "solve_direction_exact");
  if (basis.rows() != residual.rows())
    throw InvalidInput("solve_direction_exact: basis dimension mismatch");

  const Matrix q = complement_basis(basis);
  if (q.cols() == 0)
    throw InvalidInput("solve_direction_exact: basis already spans the space");

  const Matrix restricted = symmetrized(q.transpose() * residual * q);
  if (restricted.cwiseAbs().maxCoeff() <= 1e-14 * std::max(1.0, residual.cwiseAbs().maxCoeff()))
    return {0.0, fallback_complement_vector(basis)};

  Eigen::SelfAdjointEigenSolver<Matrix> es(restricted);
  const Index top = restricted.rows() - 1;
  Vector v = q * es.eigenvectors().col(top);
  v = orthogonalized(v, basis).normalized();
  return {es.eigenvalues()(top), canonical_sign(v)};
}

Vector pg_unit_ball_minimize(const Vector& e, const Matrix& basis,
                             const ProjectionConfig& cfg) {
  cfg.validate();
  const double eta = cfg.step();
  Vector v = e / e.squaredNorm();
  for (int k = 1; k <= cfg.pg_max_iter; ++k) {
    Vector grad = -e;
    grad.noalias() += 2.0 * cfg.gamma * (basis * (basis.transpose() * v));
    Vector next = v - eta * grad;
    const double nn = next.norm();
    if (nn > 1.0) next /= nn;  // proximal step: projection onto the unit ball
    const double change = (next - v).norm();
    v = next;
    if (change <= cfg.pg_tol) return v;
  }
  throw ConvergenceFailure(
      "pg_unit_ball_minimize: no convergence after " + std::to_string(cfg.pg_max_iter) +
          " iterations",
      (e - v).norm(), cfg.pg_max_iter);
}

EigenPair solve_direction_pg(const Matrix& residual, const Matrix& basis,
                             const ProjectionConfig& cfg) {
  require_symmetric(residual, "solve_direction_pg");
  if (basis.rows() != residual.rows())
    throw InvalidInput("solve_direction_pg: basis dimension mismatch");
  cfg.validate();

  const EigenPair top = top_eigenpair(residual);
  const Vector e_perp = orthogonalized(top.vector, basis);
  const double alpha = e_perp.norm();

  // The iterate's complement component stays proportional to e_perp for the
  // whole PG run (the gradient never rotates it), so the re-orthogonalized
  // output is e_perp / alpha at every iteration count. When alpha is too
  // small for the configured budget to matter (the ball crawl needs about
  // 1 / (step * alpha) iterations), return that limit directly.
  const double alpha_min = std::max(1e-8, 30.0 / (cfg.step() * cfg.pg_max_iter));

  Vector v;
  if (alpha <= 1e-12) {
    // Surrogate entirely inside span(basis); any unit vector of the
    // complement is as good as any other.
    v = fallback_complement_vector(basis);
  } else if (alpha <= alpha_min) {
    v = canonical_sign(e_perp / alpha);
  } else {
    v = orthogonalized(pg_unit_ball_minimize(top.vector, basis, cfg), basis);
    v = canonical_sign(v / v.norm());
  }
  return {v.dot(residual * v), v};
}

double cap_eigenvalue(double prev, double rayleigh, double kappa,
                      bool is_second_from_top) {
  if (!(kappa > 0.0)) throw InvalidInput("cap_eigenvalue: kappa must be positive");
  if (is_second_from_top) return std::min(prev, std::max(prev - kappa, rayleigh));
  return std::min(prev, rayleigh);
}

ProjectionResult project(const Matrix& cov, const Vector& u,
                         const ProjectionConfig& cfg) {
  cfg.validate();
  require_symmetric(cov, "project");
  const Index n = cov.rows();
  if (u.size() != n) throw InvalidInput("project: u dimension mismatch");
  require_unit(u, "project");
  require_psd_input(cov, "project");
  if (n < 2) throw InvalidInput("project: need at least 2 nodes");

  const double floor_hint = cfg.eig_floor >= 0.0 ? cfg.eig_floor : 0.0;
  LastEigen last = last_eigenpair(cov, u, floor_hint);
  const double floor =
      cfg.eig_floor >= 0.0 ? cfg.eig_floor : 1e-6 * last.lambda_n;

  Vector values(n);
  Matrix vectors(n, n);
  Matrix basis(n, n);  // grows column by column in fixing order
  values(n - 1) = last.lambda_n;
  vectors.col(n - 1) = u;
  basis.col(0) = u;

  Matrix residual = last.residual;
  const bool use_exact = n <= cfg.exact_threshold;

  for (Index i = n - 2; i >= 0; --i) {
    const auto fixed = basis.leftCols(n - 1 - i);
    EigenPair dir = use_exact ? solve_direction_exact(residual, fixed)
                              : solve_direction_pg(residual, fixed, cfg);
    // Keep the stored system orthonormal no matter which path produced it.
    Vector v = orthogonalized(dir.vector, fixed);
    const double vn = v.norm();
    v = vn > 1e-10 ? canonical_sign(v / vn) : fallback_complement_vector(fixed);
    const double rayleigh = v.dot(residual * v);

    const double lam =
        cap_eigenvalue(values(i + 1), rayleigh, cfg.kappa, i == n - 2);
    values(i) = lam;
    vectors.col(i) = v;
    basis.col(n - 1 - i) = v;
    if (i > 0) residual = symmetrized(residual - lam * (v * v.transpose()));
  }

  ProjectionResult out;
  out.decomp.values = values.cwiseMax(floor);
  out.decomp.vectors = vectors;
  out.decomp.accumulated_basis = basis;
  out.c = symmetrized(vectors * out.decomp.values.asDiagonal() * vectors.transpose());
  return out;
}

}  // namespace eigengap
