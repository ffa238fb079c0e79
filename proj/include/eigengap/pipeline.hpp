#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <tuple>
#include <vector>

#include "eigengap/gcn_lab.hpp"
#include "eigengap/types.hpp"

namespace eigengap {

/// Multivariate time series: T rows (time steps) by N columns (nodes), plus
/// the windowing parameters used to derive supervised samples. Each sample's
/// features are the feature_window values ending target_offset steps before
/// the target row.
struct SignalDataset {
  Index t = 0;
  Index n = 0;
  Matrix x;
  int feature_window = 10;
  int target_offset = 1;
};

SignalDataset load_signals_csv(const std::string& path, bool has_header);

struct EmpiricalStats {
  Matrix cov;
  Vector u;     // mean direction
  Vector mean;  // per-node mean signal
};

/// Uncentered second moment (1/T) sum x_t x_t^T by default; centered mode
/// subtracts the mean first. u is always the normalized mean signal.
EmpiricalStats empirical_stats(const SignalDataset& data, bool centered = false);

/// T independent draws x ~ N(mean, l_true^{-1}) via Cholesky of l_true and a
/// seeded normal stream.
SignalDataset synth_gmrf(Index n, Index t, const Matrix& l_true, const Vector& mean,
                         std::uint64_t seed);

/// Stationary AR(1) sequence with the same N(mean, l_true^{-1}) marginal:
/// x_{t+1} = mean + phi (x_t - mean) + sqrt(1 - phi^2) w_t. obs_noise adds
/// per-entry white measurement noise on top. phi = 0, obs_noise = 0
/// reproduces the independent sampler draw for draw.
SignalDataset synth_gmrf_ar(Index n, Index t, const Matrix& l_true, const Vector& mean,
                            double phi, double obs_noise, std::uint64_t seed);

/// Diffusion variant: the state propagates one hop per step through the
/// normalized operator of l_true's graph, x_{t+1} = mean + phi P (x_t - mean)
/// + sqrt(1 - phi^2) w_t with GMRF innovations w ~ N(0, l_true^{-1}).
/// Reading the state k steps back then takes k graph hops, which is what
/// makes convolution depth informative on this data.
SignalDataset synth_gmrf_diffusion(Index n, Index t, const Matrix& l_true,
                                   const Vector& mean, double phi, double obs_noise,
                                   std::uint64_t seed);

struct SparseLaplacianOptions {
  int extra_edges = 0;          // chords beyond the connecting ring
  double weight_lo = 0.8;
  double weight_hi = 1.6;
  double backbone_weight = 0.0; // when > 0, edge (0, n/2) gets this weight
  double diag_load = 0.3;       // added to the diagonal so the result is PD
};

/// Ring-plus-chords weighted graph Laplacian with a diagonal load; ground
/// truth for recovery experiments. Smallest eigenvector is exactly the
/// constant vector.
Matrix random_sparse_laplacian(Index n, std::uint64_t seed,
                               const SparseLaplacianOptions& opts = {});

struct SplitIndices {
  std::vector<Index> train, val, test;
};

/// Seeded permutation split into floor(r0*count) / floor(r1*count) /
/// remainder. Disjoint and exhaustive.
SplitIndices split_indices(Index count, const std::array<double, 3>& ratios,
                           std::uint64_t seed);

/// Row-level split of a dataset (keeps windowing parameters).
std::tuple<SignalDataset, SignalDataset, SignalDataset> split(
    const SignalDataset& data, const std::array<double, 3>& ratios,
    std::uint64_t seed);

/// Sliding-window samples; windows that would reach before time 0 are
/// dropped. Features are ordered oldest to newest along the channel axis.
std::vector<Sample> make_supervised(const SignalDataset& data);

}  // namespace eigengap
