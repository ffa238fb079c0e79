#pragma once

// Test-side reference implementations, kept independent of the library's
// solver paths on purpose: eigendecompositions here use cyclic Jacobi
// rotations, not power iteration and not Eigen's solvers.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "eigengap/types.hpp"

namespace oracle {

using eigengap::Index;
using eigengap::Matrix;
using eigengap::Rng;
using eigengap::Vector;

struct Eig {
  Vector values;   // ascending
  Matrix vectors;  // columns match values
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
inline Eig jacobi_eig(Matrix a, int max_sweeps = 200) {
  const Index n = a.rows();
  Matrix v = Matrix::Identity(n, n);
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (Index p = 0; p < n; ++p)
      for (Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) <= 1e-15 * scale * n) break;

    for (Index p = 0; p < n; ++p)
      for (Index q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) <= 1e-300) continue;
        const double tau = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
  }

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(),
            [&a](Index i, Index j) { return a(i, i) < a(j, j); });
  Eig out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Index i = 0; i < n; ++i) {
    out.values(i) = a(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)]);
    out.vectors.col(i) = v.col(order[static_cast<std::size_t>(i)]);
  }
  return out;
}

/// Random symmetric PSD matrix G^T G / n with seeded entries.
inline Matrix random_psd(Index n, std::uint64_t seed, Index rank_factor = 2) {
  Rng rng(seed);
  Matrix g(rank_factor * n, n);
  for (Index i = 0; i < g.rows(); ++i)
    for (Index j = 0; j < g.cols(); ++j) g(i, j) = rng.normal();
  return eigengap::symmetrized(g.transpose() * g / static_cast<double>(n));
}

/// Random symmetric (indefinite) matrix.
inline Matrix random_symmetric(Index n, std::uint64_t seed) {
  Rng rng(seed);
  Matrix a(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = i; j < n; ++j) {
      a(i, j) = rng.normal();
      a(j, i) = a(i, j);
    }
  return a;
}

inline Vector random_unit(Index n, std::uint64_t seed) {
  Rng rng(seed);
  Vector v = rng.normal_vector(n);
  return v / v.norm();
}

/// Projected gradient on x^T A x over the box |x - center| <= rho; the
/// independent reference for the closed-form coordinate-descent column solver.
inline Vector box_qp_pg_oracle(const Matrix& a, const Vector& center, double rho) {
  const double lmax = jacobi_eig(a).values(a.rows() - 1);
  const double eta = 0.45 / lmax;
  Vector x = center;
  for (int k = 0; k < 200000; ++k) {
    Vector next = x - eta * 2.0 * (a * x);
    for (Index i = 0; i < next.size(); ++i)
      next(i) = std::clamp(next(i), center(i) - rho, center(i) + rho);
    if ((next - x).norm() <= 1e-13) return next;
    x = next;
  }
  return x;
}

/// Orthonormal columns spanning a random k-dimensional subspace.
inline Matrix random_orthonormal(Index n, Index k, std::uint64_t seed) {
  Rng rng(seed);
  Matrix b(n, k);
  for (Index c = 0; c < k; ++c) {
    Vector v = rng.normal_vector(n);
    for (Index prev = 0; prev < c; ++prev) v -= b.col(prev).dot(v) * b.col(prev);
    b.col(c) = v / v.norm();
  }
  return b;
}

}  // namespace oracle
