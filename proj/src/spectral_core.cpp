#include "eigengap/spectral_core.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace eigengap {

namespace {

constexpr std::uint64_t kRestartSeed = 0x9d2c5680a1f3ull;

double max_abs_row_sum(const Matrix& a) {
  return a.cwiseAbs().rowwise().sum().maxCoeff();
}

struct IterationOutcome {
  double value = 0.0;
  Vector vector;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Plain shifted power iteration on B = A + shift*I. Residuals for B and A
// coincide, so convergence is tested directly against A's contract.
IterationOutcome power_iterate(const Matrix& a, double shift, Vector v,
                               double tol, int max_iter) {
  IterationOutcome out;
  v.normalize();
  double lambda = 0.0;
  for (int k = 1; k <= max_iter; ++k) {
    Vector w = a * v + shift * v;
    const double lambda_b = v.dot(w);
    lambda = lambda_b - shift;
    out.residual = (w - lambda_b * v).norm();
    out.iterations = k;
    if (out.residual <= tol * std::max(1.0, std::abs(lambda))) {
      out.converged = true;
      break;
    }
    const double wn = w.norm();
    if (wn <= 0.0) {
      // v is an exact kernel vector of B, hence an exact eigenvector of A.
      lambda = -shift;
      out.residual = 0.0;
      out.converged = true;
      break;
    }
    v = w / wn;
  }
  out.value = lambda;
  out.vector = v;
  return out;
}

// Rayleigh-shifted inverse iteration. Cubically convergent once power
// iteration has placed the iterate near the dominant cluster; rescues
// spectra whose top eigenvalues are too close for plain iteration.
IterationOutcome rayleigh_polish(const Matrix& a, IterationOutcome cur, double tol) {
  const Index n = a.rows();
  const double scale = std::max(1.0, max_abs_row_sum(a));
  Vector v = cur.vector;
  for (int p = 0; p < 25; ++p) {
    double lambda = v.dot(a * v);
    Matrix shifted = a - lambda * Matrix::Identity(n, n);
    Eigen::LDLT<Matrix> ldlt(shifted);
    Vector x = ldlt.solve(v);
    if (!x.allFinite() || x.norm() <= 0.0) {
      // Exactly singular shift: nudge and retry once within this step.
      shifted.diagonal().array() += 1e-12 * scale;
      x = Eigen::LDLT<Matrix>(shifted).solve(v);
      if (!x.allFinite() || x.norm() <= 0.0) break;
    }
    v = x.normalized();
    lambda = v.dot(a * v);
    const double res = (a * v - lambda * v).norm();
    cur.iterations += 1;
    if (res <= tol * std::max(1.0, std::abs(lambda))) {
      cur.value = lambda;
      cur.vector = v;
      cur.residual = res;
      cur.converged = true;
      return cur;
    }
    if (res < cur.residual) {
      cur.value = lambda;
      cur.vector = v;
      cur.residual = res;
    }
  }
  return cur;
}

IterationOutcome solve_from(const Matrix& a, double shift, const Vector& start,
                            double tol, int max_iter) {
  IterationOutcome out = power_iterate(a, shift, start, tol, max_iter);
  if (!out.converged) out = rayleigh_polish(a, out, tol);
  return out;
}

}  // namespace

Vector canonical_sign(Vector v) {
  for (Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-12) {
      if (v(i) < 0.0) v = -v;
      break;
    }
  }
  return v;
}

EigenPair top_eigenpair(const Matrix& a, double tol, int max_iter) {
  require_symmetric(a, "top_eigenpair");
  if (tol <= 0.0) throw InvalidInput("top_eigenpair: tol must be positive");
  const Index n = a.rows();
  if (max_iter < 0) max_iter = static_cast<int>(100 * n);

  const double shift = max_abs_row_sum(a);
  const Vector ones_start = Vector::Ones(n) / std::sqrt(static_cast<double>(n));
  if (shift == 0.0) return {0.0, canonical_sign(ones_start)};

  IterationOutcome best = solve_from(a, shift, ones_start, tol, max_iter);

  // Instant convergence is the signature of a start vector lying inside an
  // invariant subspace (possibly the wrong one). One perturbed restart from
  // a fixed seeded direction resolves it; keep the larger eigenvalue.
  if (best.converged && best.iterations <= 2) {
    Rng rng(kRestartSeed);
    Vector perturbed = ones_start + 0.5 * rng.normal_vector(n);
    IterationOutcome alt = solve_from(a, shift, perturbed, tol, max_iter);
    if (alt.converged && alt.value > best.value) best = alt;
  }

  if (!best.converged)
    throw ConvergenceFailure("top_eigenpair: no convergence after " +
                                 std::to_string(best.iterations) +
                                 " iterations, residual " + std::to_string(best.residual),
                             best.residual, best.iterations);
  return {best.value, canonical_sign(best.vector)};
}

double min_eigenvalue(const Matrix& a, double tol, int max_iter) {
  return -top_eigenpair(Matrix(-a), tol, max_iter).value;
}

bool is_psd(const Matrix& a, double tol) {
  require_symmetric(a, "is_psd");
  try {
    return min_eigenvalue(a) >= -tol;
  } catch (const ConvergenceFailure&) {
    // Pathologically clustered spectrum; fall back to a dense solve so the
    // predicate itself never fails.
    Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff() >= -tol;
  }
}

Matrix deflate(const Matrix& a, const std::vector<EigenPair>& pairs) {
  require_symmetric(a, "deflate");
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (pairs[i].vector.size() != a.rows())
      throw InvalidInput("deflate: eigenvector dimension mismatch");
    if (std::abs(pairs[i].vector.norm() - 1.0) > 1e-8)
      throw InvalidInput("deflate: eigenvector is not unit norm");
    for (std::size_t j = i + 1; j < pairs.size(); ++j)
      if (std::abs(pairs[i].vector.dot(pairs[j].vector)) > 1e-8)
        throw InvalidInput("deflate: eigenvectors are not mutually orthogonal");
  }
  Matrix out = a;
  for (const auto& p : pairs)
    out.noalias() -= p.value * (p.vector * p.vector.transpose());
  return symmetrized(out);
}

}  // namespace eigengap
