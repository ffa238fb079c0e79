#include "eigengap/pipeline.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "eigengap/io.hpp"

namespace eigengap {

SignalDataset load_signals_csv(const std::string& path, bool has_header) {
  SignalDataset d;
  d.x = read_matrix_csv(path, has_header);
  d.t = d.x.rows();
  d.n = d.x.cols();
  if (d.t < 2) throw InvalidInput(path + ": need at least 2 observations");
  if (!d.x.allFinite()) throw InvalidInput(path + ": non-finite signal values");
  return d;
}

EmpiricalStats empirical_stats(const SignalDataset& data, bool centered) {
  if (data.t < 2) throw InvalidInput("empirical_stats: need at least 2 observations");
  EmpiricalStats s;
  s.mean = data.x.colwise().mean();
  const double norm = s.mean.norm();
  if (norm <= 1e-12) throw InvalidInput("empirical_stats: zero mean signal, u undefined");
  s.u = s.mean / norm;

  const double inv_t = 1.0 / static_cast<double>(data.t);
  if (centered) {
    Matrix xc = data.x.rowwise() - s.mean.transpose();
    s.cov = symmetrized(inv_t * (xc.transpose() * xc));
  } else {
    s.cov = symmetrized(inv_t * (data.x.transpose() * data.x));
  }
  return s;
}

namespace {

// Factor once; draws are mean + R^{-T} z with l = R R^T so the sample
// covariance is l^{-1}.
Eigen::LLT<Matrix> factor_precision(const Matrix& l_true) {
  require_symmetric(l_true, "synth_gmrf");
  Eigen::LLT<Matrix> llt(l_true);
  if (llt.info() != Eigen::Success)
    throw InvalidInput("synth_gmrf: precision matrix is not positive definite");
  return llt;
}

Vector gmrf_draw(const Eigen::LLT<Matrix>& llt, Rng& rng, Index n) {
  Vector z = rng.normal_vector(n);
  return llt.matrixU().solve(z);
}

}  // namespace

SignalDataset synth_gmrf(Index n, Index t, const Matrix& l_true, const Vector& mean,
                         std::uint64_t seed) {
  if (t < 1) throw InvalidInput("synth_gmrf: need at least 1 sample");
  if (l_true.rows() != n || mean.size() != n)
    throw InvalidInput("synth_gmrf: dimension mismatch");
  const auto llt = factor_precision(l_true);

  SignalDataset d;
  d.n = n;
  d.t = t;
  d.x.resize(t, n);
  Rng rng(seed);
  for (Index row = 0; row < t; ++row)
    d.x.row(row) = (mean + gmrf_draw(llt, rng, n)).transpose();
  return d;
}

SignalDataset synth_gmrf_ar(Index n, Index t, const Matrix& l_true, const Vector& mean,
                            double phi, double obs_noise, std::uint64_t seed) {
  if (t < 1) throw InvalidInput("synth_gmrf_ar: need at least 1 sample");
  if (l_true.rows() != n || mean.size() != n)
    throw InvalidInput("synth_gmrf_ar: dimension mismatch");
  if (phi < 0.0 || phi >= 1.0) throw InvalidInput("synth_gmrf_ar: phi must be in [0, 1)");
  if (obs_noise < 0.0) throw InvalidInput("synth_gmrf_ar: obs_noise must be >= 0");
  const auto llt = factor_precision(l_true);

  SignalDataset d;
  d.n = n;
  d.t = t;
  d.x.resize(t, n);
  Rng rng(seed);
  const double innovation = std::sqrt(1.0 - phi * phi);
  Vector state = gmrf_draw(llt, rng, n);
  for (Index row = 0; row < t; ++row) {
    if (row > 0) state = phi * state + innovation * gmrf_draw(llt, rng, n);
    Vector obs = mean + state;
    if (obs_noise > 0.0) obs += obs_noise * rng.normal_vector(n);
    d.x.row(row) = obs.transpose();
  }
  return d;
}

SignalDataset synth_gmrf_diffusion(Index n, Index t, const Matrix& l_true,
                                   const Vector& mean, double phi, double obs_noise,
                                   std::uint64_t seed) {
  if (t < 1) throw InvalidInput("synth_gmrf_diffusion: need at least 1 sample");
  if (l_true.rows() != n || mean.size() != n)
    throw InvalidInput("synth_gmrf_diffusion: dimension mismatch");
  if (phi < 0.0 || phi >= 1.0)
    throw InvalidInput("synth_gmrf_diffusion: phi must be in [0, 1)");
  if (obs_noise < 0.0) throw InvalidInput("synth_gmrf_diffusion: obs_noise must be >= 0");
  const auto llt = factor_precision(l_true);
  const Matrix p = build_operator(laplacian_to_graph(l_true)).p;

  SignalDataset d;
  d.n = n;
  d.t = t;
  d.x.resize(t, n);
  Rng rng(seed);
  const double innovation = std::sqrt(1.0 - phi * phi);
  Vector state = gmrf_draw(llt, rng, n);
  for (Index row = 0; row < t; ++row) {
    if (row > 0) state = phi * (p * state) + innovation * gmrf_draw(llt, rng, n);
    Vector obs = mean + state;
    if (obs_noise > 0.0) obs += obs_noise * rng.normal_vector(n);
    d.x.row(row) = obs.transpose();
  }
  return d;
}

Matrix random_sparse_laplacian(Index n, std::uint64_t seed,
                               const SparseLaplacianOptions& opts) {
  if (n < 3) throw InvalidInput("random_sparse_laplacian: need at least 3 nodes");
  if (!(opts.diag_load > 0.0))
    throw InvalidInput("random_sparse_laplacian: diag_load must be positive");

  Rng rng(seed);
  Matrix w = Matrix::Zero(n, n);
  auto add_edge = [&w](Index i, Index j, double weight) {
    w(i, j) = weight;
    w(j, i) = weight;
  };
  for (Index i = 0; i < n; ++i)
    add_edge(i, (i + 1) % n, rng.uniform(opts.weight_lo, opts.weight_hi));

  int placed = 0;
  int guard = 0;
  while (placed < opts.extra_edges && guard < 100 * opts.extra_edges + 100) {
    ++guard;
    const Index i = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
    const Index j = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
    if (i == j || w(i, j) != 0.0) continue;
    add_edge(i, j, rng.uniform(opts.weight_lo, opts.weight_hi));
    ++placed;
  }
  if (opts.backbone_weight > 0.0) add_edge(0, n / 2, opts.backbone_weight);

  Matrix l = Matrix(-w);
  l.diagonal() = w.rowwise().sum();
  l.diagonal().array() += opts.diag_load;
  return l;
}

SplitIndices split_indices(Index count, const std::array<double, 3>& ratios,
                           std::uint64_t seed) {
  if (count < 3) throw InvalidInput("split: need at least 3 samples");
  for (double r : ratios)
    if (!(r > 0.0)) throw InvalidInput("split: ratios must be positive");
  if (std::abs(ratios[0] + ratios[1] + ratios[2] - 1.0) > 1e-9)
    throw InvalidInput("split: ratios must sum to 1");

  std::vector<Index> perm(static_cast<std::size_t>(count));
  std::iota(perm.begin(), perm.end(), Index{0});
  Rng rng(seed);
  for (std::size_t i = perm.size(); i > 1; --i)
    std::swap(perm[i - 1], perm[rng.below(i)]);

  const auto n_train = static_cast<std::size_t>(std::floor(ratios[0] * count));
  const auto n_val = static_cast<std::size_t>(std::floor(ratios[1] * count));
  SplitIndices s;
  s.train.assign(perm.begin(), perm.begin() + n_train);
  s.val.assign(perm.begin() + n_train, perm.begin() + n_train + n_val);
  s.test.assign(perm.begin() + n_train + n_val, perm.end());
  return s;
}

std::tuple<SignalDataset, SignalDataset, SignalDataset> split(
    const SignalDataset& data, const std::array<double, 3>& ratios,
    std::uint64_t seed) {
  const SplitIndices idx = split_indices(data.t, ratios, seed);
  auto take = [&data](const std::vector<Index>& rows) {
    SignalDataset part;
    part.n = data.n;
    part.t = static_cast<Index>(rows.size());
    part.feature_window = data.feature_window;
    part.target_offset = data.target_offset;
    part.x.resize(part.t, part.n);
    for (Index i = 0; i < part.t; ++i)
      part.x.row(i) = data.x.row(rows[static_cast<std::size_t>(i)]);
    return part;
  };
  return {take(idx.train), take(idx.val), take(idx.test)};
}

std::vector<Sample> make_supervised(const SignalDataset& data) {
  if (data.feature_window < 1) throw InvalidInput("make_supervised: feature_window must be >= 1");
  if (data.target_offset < 1)
    throw InvalidInput("make_supervised: target_offset must be >= 1 (features precede the target)");
  const int c = data.feature_window;
  const Index first_target = c - 1 + data.target_offset;

  std::vector<Sample> out;
  for (Index t = first_target; t < data.t; ++t) {
    Sample s;
    s.features.resize(data.n, c);
    const Index window_start = t - data.target_offset - (c - 1);
    for (int k = 0; k < c; ++k)
      s.features.col(k) = data.x.row(window_start + k).transpose();
    s.target = data.x.row(t).transpose();
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace eigengap
