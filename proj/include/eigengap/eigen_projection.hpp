#pragma once

#include "eigengap/spectral_core.hpp"
#include "eigengap/types.hpp"

namespace eigengap {

/// Settings for projecting a covariance onto the cone of PSD matrices with a
/// prescribed last eigenvector and a capped gap between the top two
/// eigenvalues. kappa may be +infinity (no cap).
struct ProjectionConfig {
  double kappa = 1.0;
  double gamma = 5.0;        // orthogonality penalty weight in the PG direction solve
  double pg_step = 0.0;      // <= 0 selects 0.9 / (2 * gamma)
  double pg_tol = 1e-10;     // step-to-step change threshold
  int pg_max_iter = 5000;
  double eig_floor = -1.0;   // < 0 selects 1e-6 * lambda_N per projection
  int exact_threshold = 64;  // dense direction solver up to this dimension

  double step() const { return pg_step > 0.0 ? pg_step : 0.9 / (2.0 * gamma); }
  void validate() const;
};

/// Ordered eigen-pairs of a projected covariance. values are ascending and
/// already floored; the last column of vectors is the prescribed vector u.
/// accumulated_basis lists the vectors in the order they were fixed:
/// [u, v_{N-1}, ..., v_1].
struct SpectralDecomposition {
  Vector values;
  Matrix vectors;
  Matrix accumulated_basis;

  Index size() const { return values.size(); }
  double top_gap() const { return values(size() - 1) - values(size() - 2); }
};

/// Throws unless orthonormality, ordering and the gap cap hold.
void validate_decomposition(const SpectralDecomposition& d, double kappa);

struct LastEigen {
  double lambda_n = 0.0;  // u^T cov u
  Matrix residual;        // cov - lambda_n u u^T
};

/// Energy of cov along u and the deflated remainder. Throws when the energy
/// does not exceed energy_floor (u carries no energy in cov).
LastEigen last_eigenpair(const Matrix& cov, const Vector& u, double energy_floor = 0.0);

/// Maximizer of v^T residual v subject to basis^T v = 0, ||v|| = 1, computed
/// by dense eigendecomposition restricted to the orthogonal complement of
/// basis. Exact up to floating point; used below exact_threshold and as the
/// reference the proximal-gradient path is measured against.
EigenPair solve_direction_exact(const Matrix& residual, const Matrix& basis);

/// Proximal-gradient minimization of -e.v + gamma * v^T basis basis^T v over
/// the unit ball, started from e / ||e||^2. Returns the raw PG iterate
/// without re-orthogonalization.
Vector pg_unit_ball_minimize(const Vector& e, const Matrix& basis,
                             const ProjectionConfig& cfg);

/// Fast direction solve: rank-1 surrogate of the residual (its top
/// eigenvector e), PG on the penalized objective, then an explicit
/// Gram-Schmidt pass against basis so orthogonality holds exactly. Value is
/// the Rayleigh quotient of the returned vector.
EigenPair solve_direction_pg(const Matrix& residual, const Matrix& basis,
                             const ProjectionConfig& cfg);

/// Next eigenvalue from the previous one and the direction's Rayleigh
/// quotient. The second-from-top value is lifted to prev - kappa when needed
/// (the gap cap) and clamped so ordering survives inputs whose prescribed
/// vector is not dominant; later values only enforce ordering.
double cap_eigenvalue(double prev, double rayleigh, double kappa,
                      bool is_second_from_top);

struct ProjectionResult {
  Matrix c;  // projected covariance, positive definite
  SpectralDecomposition decomp;
};

/// Greedy eigen-pair projection of cov onto the cone: fixes u as the last
/// eigenvector, then extracts one direction at a time from the deflated
/// residual (dense below cfg.exact_threshold, PG above), capping the top gap
/// at kappa and flooring retained eigenvalues so the result is invertible.
ProjectionResult project(const Matrix& cov, const Vector& u,
                         const ProjectionConfig& cfg);

}  // namespace eigengap
