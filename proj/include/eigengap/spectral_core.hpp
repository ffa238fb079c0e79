#pragma once

#include <vector>

#include "eigengap/types.hpp"

namespace eigengap {

struct EigenPair {
  double value = 0.0;
  Vector vector;
};

/// Trace inner product tr(B^T A) = sum_ij A_ij B_ij on the space of real
/// symmetric matrices. Accepts arbitrary Eigen expressions.
template <typename DerivedA, typename DerivedB>
double inner_product(const Eigen::MatrixBase<DerivedA>& a,
                     const Eigen::MatrixBase<DerivedB>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw InvalidInput("inner_product: dimension mismatch");
  return a.cwiseProduct(b).sum();
}

/// Flips the sign so the first component with |v_i| > 1e-12 is positive.
/// Makes eigenvector output reproducible across runs.
Vector canonical_sign(Vector v);

/// Eigen-pair of the algebraically largest eigenvalue, by shifted power
/// iteration (shift = max absolute row sum, which makes the iterated matrix
/// PSD so the largest eigenvalue dominates in magnitude). Convergence test:
/// ||Av - lambda v|| <= tol * max(1, |lambda|) with lambda the Rayleigh
/// quotient. A stalled iteration is polished with Rayleigh-shifted inverse
/// steps; clustered spectra otherwise exhaust the budget.
/// max_iter < 0 selects the default 100 * N.
EigenPair top_eigenpair(const Matrix& a, double tol = 1e-10, int max_iter = -1);

double min_eigenvalue(const Matrix& a, double tol = 1e-10, int max_iter = -1);

/// True iff the smallest eigenvalue is >= -tol.
bool is_psd(const Matrix& a, double tol);

/// A - sum_k lambda_k v_k v_k^T. Pairs must be mutually orthonormal
/// within 1e-8.
Matrix deflate(const Matrix& a, const std::vector<EigenPair>& pairs);

}  // namespace eigengap
