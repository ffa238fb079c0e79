#include "eigengap/graph_model.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace eigengap {

namespace {

constexpr double kEdgeThreshold = 1e-10;

int count_components(const Matrix& w) {
  const Index n = w.rows();
  std::vector<Index> parent(n);
  std::iota(parent.begin(), parent.end(), Index{0});
  auto find = [&](Index x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      if (std::abs(w(i, j)) > kEdgeThreshold) {
        const Index a = find(i), b = find(j);
        if (a != b) parent[a] = b;
      }
  int m = 0;
  for (Index i = 0; i < n; ++i)
    if (find(i) == i) ++m;
  return m;
}

}  // namespace

GraphLaplacian graph_from_weights(Matrix weights, Vector self_loops) {
  require_symmetric(weights, "graph_from_weights");
  const Index n = weights.rows();
  if (self_loops.size() != n)
    throw InvalidInput("graph_from_weights: self-loop dimension mismatch");
  weights.diagonal().setZero();

  GraphLaplacian g;
  g.degrees = weights.rowwise().sum() + self_loops;
  // Generalized Laplacian D - W + diag(W); the self-loop terms cancel off the
  // diagonal and leave L_ii = D_ii.
  g.laplacian = Matrix(-weights);
  g.laplacian.diagonal() = g.degrees;
  g.components = count_components(weights);
  g.weights = std::move(weights);
  g.self_loops = std::move(self_loops);
  return g;
}

GraphLaplacian laplacian_to_graph(const Matrix& l, EdgeMode mode) {
  require_symmetric(l, "laplacian_to_graph");

  Matrix w = Matrix(-l);
  w.diagonal().setZero();
  if (mode == EdgeMode::Clamp) w = w.cwiseMax(0.0);

  Vector self_loops = l.diagonal() - w.rowwise().sum();
  if (mode == EdgeMode::Clamp) self_loops = self_loops.cwiseMax(0.0);

  GraphLaplacian g = graph_from_weights(std::move(w), std::move(self_loops));
  if (mode == EdgeMode::Signed) g.laplacian = l;  // exact round trip
  return g;
}

GcnOperator build_operator(const GraphLaplacian& g) {
  const Index n = g.size();
  const Vector dt = g.degrees.array() + 1.0;
  if ((dt.array() <= 0.0).any())
    throw InvalidInput("build_operator: augmented degree is not positive (signed-mode graph)");

  const Vector dt_isqrt = dt.cwiseSqrt().cwiseInverse();
  Matrix wt = g.weights;
  wt.diagonal() += g.self_loops + Vector::Ones(n);
  GcnOperator op;
  op.p = symmetrized(dt_isqrt.asDiagonal() * wt * dt_isqrt.asDiagonal());
  op.components = g.components;

  Eigen::SelfAdjointEigenSolver<Matrix> es(op.p);
  if (es.info() != Eigen::Success)
    throw NumericalFailure("build_operator: eigendecomposition failed");
  op.eigenvalues = es.eigenvalues();
  op.eigenvectors = es.eigenvectors();

  const Index m = op.components;
  op.lambda_bound =
      n > m ? op.eigenvalues.head(n - m).cwiseAbs().maxCoeff() : 0.0;

  const double top = op.eigenvalues(n - 1);
  const double tol = 1e-6 * std::max(1.0, op.eigenvalues.cwiseAbs().maxCoeff());
  op.gap = 0.0;
  for (Index i = n - 1; i >= 0; --i)
    if (op.eigenvalues(i) < top - tol) {
      op.gap = top - op.eigenvalues(i);
      break;
    }
  return op;
}

double measure_eigengap(const Matrix& l, double distinct_tol) {
  require_symmetric(l, "measure_eigengap");
  Eigen::SelfAdjointEigenSolver<Matrix> es(l, Eigen::EigenvaluesOnly);
  const Vector& ev = es.eigenvalues();
  const double lowest = ev(0);
  for (Index i = 1; i < ev.size(); ++i)
    if (ev(i) - lowest > distinct_tol) return ev(i) - lowest;
  throw InvalidInput("measure_eigengap: no distinct gap in the spectrum");
}

double measure_eigengap(const Matrix& l) {
  require_symmetric(l, "measure_eigengap");
  Eigen::SelfAdjointEigenSolver<Matrix> es(l, Eigen::EigenvaluesOnly);
  const double radius = es.eigenvalues().cwiseAbs().maxCoeff();
  return measure_eigengap(l, 1e-6 * std::max(1.0, radius));
}

}  // namespace eigengap
