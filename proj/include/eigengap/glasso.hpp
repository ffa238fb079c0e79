#pragma once

#include <vector>

#include "eigengap/eigen_projection.hpp"
#include "eigengap/types.hpp"

namespace eigengap {

struct GlassoConfig {
  double rho = 1e-4;        // l1 shrinkage, i.e. half-width of the dual box
  int max_sweeps = 50;
  double outer_tol = 1e-6;  // relative Frobenius change between outer iterations
  double inner_tol = 1e-10;
  int inner_max_cycles = 1000;

  void validate() const {
    if (rho < 0.0) throw InvalidInput("GlassoConfig: rho must be >= 0");
    if (max_sweeps < 1) throw InvalidInput("GlassoConfig: max_sweeps must be >= 1");
    if (!(outer_tol > 0.0)) throw InvalidInput("GlassoConfig: outer_tol must be positive");
  }
};

/// Dual iterate: the working covariance c, the immutable empirical cov, and
/// the -log det trace recorded once per completed sweep.
struct GlassoState {
  Matrix c;
  Matrix cov;
  int sweep_count = 0;
  std::vector<double> objective_trace;
};

/// -log det c via Cholesky; throws NumericalFailure when c is not positive
/// definite.
double neg_log_det(const Matrix& c);

/// C = cov + rho * I. Feasible for the dual box and positive definite
/// whenever cov is PSD and rho > 0 (or cov itself is PD).
GlassoState init_dual(const Matrix& cov, double rho);

/// Replaces row/column j of state.c with the minimizer of -log det C over
/// the box |C_ij - cov_ij| <= rho (diagonal pinned at cov_jj + rho), by
/// cyclic coordinate descent with closed-form per-coordinate steps.
void bcd_column_update(GlassoState& state, Index j, double rho,
                       const GlassoConfig& cfg = {});

struct GlassoResult {
  Matrix laplacian;  // C^{-1}, assembled from the final decomposition
  SpectralDecomposition decomp;
  std::vector<double> objective_trace;
  bool converged = false;
  int sweeps = 0;
  int skipped_updates = 0;  // columns whose box slice admitted no PD point
  Matrix c;
};

/// Alternates one full BCD sweep with the eigen-gap projection until the
/// outer iterate stabilizes, then inverts through the decomposition.
/// Non-convergence returns the last iterate with converged = false.
GlassoResult glasso_learn(const Matrix& cov, const Vector& u,
                          const ProjectionConfig& proj_cfg,
                          const GlassoConfig& glasso_cfg);

}  // namespace eigengap
