#pragma once

#include "eigengap/types.hpp"

namespace eigengap {

enum class EdgeMode { Clamp, Signed };

/// Graph view of a (generalized) Laplacian: off-diagonal weights with zero
/// diagonal, separately stored self-loops, degrees D_ii = sum_j W_ij +
/// self_loop_i, and the connected-component count over edges above 1e-10.
struct GraphLaplacian {
  Matrix laplacian;
  Matrix weights;
  Vector degrees;
  Vector self_loops;
  int components = 0;

  Index size() const { return weights.rows(); }
};

/// Rebuilds Laplacian, degrees and component count from weights/self-loops.
GraphLaplacian graph_from_weights(Matrix weights, Vector self_loops);

/// W_ij = -L_ij off-diagonal; self-loops absorb what the identity
/// L_ii = D_ii leaves over. Clamp mode zeroes negative weights (positive
/// off-diagonals of L) and negative self-loops so the normalized operator
/// below stays well defined; Signed keeps them for diagnostics.
GraphLaplacian laplacian_to_graph(const Matrix& l, EdgeMode mode = EdgeMode::Clamp);

/// Normalized propagation operator P = Dt^{-1/2} Wt Dt^{-1/2} with
/// Wt = W + diag(self_loops) + I and Dt = D + I, plus its full spectrum.
/// lambda_bound = max |lambda_n| over the N - M non-unit eigenvalues (0 for
/// an empty range); gap is measured over distinct eigenvalues.
struct GcnOperator {
  Matrix p;
  Vector eigenvalues;  // ascending
  Matrix eigenvectors;
  double lambda_bound = 0.0;
  double gap = 0.0;
  int components = 0;

  Index size() const { return p.rows(); }
};

GcnOperator build_operator(const GraphLaplacian& g);

/// Difference between the two smallest distinct eigenvalues of l, where
/// distinct means separated by more than distinct_tol. Throws when the whole
/// spectrum collapses within distinct_tol.
double measure_eigengap(const Matrix& l, double distinct_tol);

/// Same with the default tolerance 1e-6 relative to the spectral radius.
double measure_eigengap(const Matrix& l);

}  // namespace eigengap
