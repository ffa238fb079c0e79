#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "eigengap/glasso.hpp"
#include "eigengap/pipeline.hpp"

namespace eigengap {

/// Everything a (kappa x layers x seed) experiment sweep needs. Parsed from a
/// key = value config file; unknown keys are rejected. kappa may be inf (no
/// gap cap), which doubles as the unmodified-gap baseline.
struct SweepConfig {
  // data source: a signals CSV, or the synthetic generator when path is empty
  std::string data_path;
  bool has_header = false;
  Index synth_nodes = 20;
  Index synth_samples = 1500;
  std::uint64_t synth_seed = 7;
  double synth_phi = 0.9;
  double synth_obs_noise = 0.5;
  double synth_mean = 1.0;
  bool synth_diffusion = false;
  int synth_extra_edges = 6;
  double synth_backbone = 0.0;

  std::vector<double> kappas{1.0};
  int layers_min = 1;
  int layers_max = 9;
  std::vector<std::uint64_t> seeds{1};
  std::array<double, 3> ratios{0.7, 0.2, 0.1};
  std::uint64_t split_seed = 12345;

  double rho = 1e-4;
  bool centered = false;
  int feature_window = 3;
  int target_offset = 1;

  int epochs = 200;
  int batch_size = 32;
  double step_size = 1e-2;
  int hidden = 0;  // 0 selects feature_window
  double leaky_slope = 0.01;
  bool batchnorm = false;

  double gamma = 5.0;
  int exact_threshold = 64;
  double eig_floor = -1.0;
  int max_sweeps = 50;
  double outer_tol = 1e-6;

  std::vector<double> dropedge_rates;  // empty disables the baseline series

  void validate() const;
  ProjectionConfig projection_config(double kappa) const;
  GlassoConfig glasso_config() const;
};

SweepConfig parse_sweep_config(const std::string& path);

/// Loads the configured CSV or synthesizes the AR-GMRF series.
SignalDataset sweep_dataset(const SweepConfig& cfg);

struct CellRecord {
  double kappa = 0.0;
  int layers = 0;
  std::uint64_t seed = 0;
  double val_mse = std::numeric_limits<double>::quiet_NaN();
  double test_mse = std::numeric_limits<double>::quiet_NaN();
  double gap_cov = std::numeric_limits<double>::quiet_NaN();
  double gap_laplacian = std::numeric_limits<double>::quiet_NaN();
  bool optimal = false;
  std::string status = "ok";
};

struct DropEdgeRecord {
  double rate = 0.0;
  int layers = 0;
  std::uint64_t seed = 0;
  double val_mse = std::numeric_limits<double>::quiet_NaN();
  double test_mse = std::numeric_limits<double>::quiet_NaN();
  std::string status = "ok";
};

struct ExperimentResult {
  std::vector<CellRecord> records;
  std::vector<DropEdgeRecord> dropedge_records;
};

struct PreparedData {
  std::vector<Sample> train, val, test;
  EmpiricalStats stats;  // from the training targets
};

PreparedData prepare_sweep_data(const SweepConfig& cfg, const SignalDataset& data);

struct LearnedGraph {
  GlassoResult learned;
  GraphLaplacian graph;
  GcnOperator op;
  double gap_cov = 0.0;
  double gap_laplacian = 0.0;
};

LearnedGraph learn_graph(const SweepConfig& cfg, const EmpiricalStats& stats,
                         double kappa);

/// One training cell. The RNG stream is derived from (seed, kappa_index,
/// layers) only, so any cell re-run standalone reproduces its sweep value.
CellRecord run_cell(const SweepConfig& cfg, const PreparedData& data,
                    const LearnedGraph& graph, std::size_t kappa_index,
                    int layers, std::uint64_t seed);

/// Full sweep: learns one graph per kappa, trains each (layers, seed) cell,
/// flags the optimal layer count per (kappa, seed), runs the DropEdge series
/// when configured, and writes results.csv, plot_gaps.csv and (when enabled)
/// dropedge_results.csv / plot_dropedge.csv under out_dir, plus one graph
/// export per kappa.
ExperimentResult run_sweep(const SweepConfig& cfg, const SignalDataset& data,
                           const std::string& out_dir);

}  // namespace eigengap
