#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace eigengap {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Validation failure on caller-supplied data (bad dimensions, malformed
/// files, config out of range). Maps to CLI exit code 1.
struct InvalidInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Failure inside a numerical routine (loss of positive definiteness,
/// singular factorization, divergence). Maps to CLI exit code 2.
struct NumericalFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Iterative solver ran out of budget. Carries the last residual (or step
/// change) and the iteration count at the point of giving up.
struct ConvergenceFailure : NumericalFailure {
  ConvergenceFailure(const std::string& what, double residual, int iterations)
      : NumericalFailure(what), last_residual(residual), iterations(iterations) {}
  double last_residual;
  int iterations;
};

inline bool all_finite(const Matrix& a) { return a.allFinite(); }

inline bool is_symmetric(const Matrix& a, double rel_tol = 1e-12) {
  if (a.rows() != a.cols()) return false;
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = i + 1; j < a.cols(); ++j) {
      const double scale = std::max(1.0, std::abs(a(i, j)));
      if (std::abs(a(i, j) - a(j, i)) > rel_tol * scale) return false;
    }
  return true;
}

inline void require_symmetric(const Matrix& a, const char* what) {
  if (!a.allFinite())
    throw InvalidInput(std::string(what) + ": matrix has non-finite entries");
  if (!is_symmetric(a))
    throw InvalidInput(std::string(what) + ": matrix is not symmetric");
}

inline void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw InvalidInput(std::string(what) + ": dimension mismatch");
}

inline Matrix symmetrized(const Matrix& a) { return 0.5 * (a + a.transpose()); }

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Order-sensitive seed combinator for deriving per-cell / per-epoch streams.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  return splitmix64(a ^ splitmix64(b + 0x632be59bd9b4e019ULL));
}

/// Deterministic random stream. mt19937_64 is bit-specified by the standard;
/// the uniform and normal transforms are hand-rolled so sequences do not
/// depend on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(splitmix64(seed)) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform double in (0, 1].
  double uniform01() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * (uniform01() - 0x1.0p-53); }

  /// Unbiased integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = n * (UINT64_MAX / n);
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  /// Standard normal via Box-Muller; second value of each pair is cached.
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    cached_ = r * std::sin(a);
    have_cached_ = true;
    return r * std::cos(a);
  }

  Vector normal_vector(Index n) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v(i) = normal();
    return v;
  }

 private:
  std::mt19937_64 gen_;
  bool have_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace eigengap
