#pragma once

#include <string>

#include "eigengap/gcn_lab.hpp"
#include "eigengap/graph_model.hpp"
#include "eigengap/types.hpp"

namespace eigengap {

/// Shortest decimal form that round-trips a double exactly (up to 17
/// significant digits).
std::string format_g17(double v);

/// Headerless comma-separated numeric matrix, one row per line. Ragged rows
/// and non-numeric fields are reported with their line number. skip_header
/// drops the first line.
Matrix read_matrix_csv(const std::string& path, bool skip_header = false);

void write_matrix_csv(const std::string& path, const Matrix& m);

/// All numbers in a file, any whitespace/comma separation; used for vector
/// inputs.
Vector read_vector(const std::string& path);

/// Learned-Laplacian container: the matrix plus the run metadata needed to
/// reuse or audit it.
struct LaplacianFile {
  Index n = 0;
  double kappa = 0.0;
  double rho = 0.0;
  double gap_cov = 0.0;  // achieved covariance-domain eigen-gap
  bool converged = false;
  int sweeps = 0;
  Vector u;
  Matrix laplacian;
};

void write_laplacian_file(const std::string& path, const LaplacianFile& f);
LaplacianFile read_laplacian_file(const std::string& path);

/// Structured-text graph export: node/component counts, self-loops, the
/// propagation operator's spectrum, and the weighted edge list.
void write_graph_export(const std::string& path, const GraphLaplacian& g,
                        const GcnOperator& op);

/// Structured-text over-smoothing report: s, lambda, regime flags and one
/// line per layer with the measured distance next to the envelope.
void write_oversmooth_report(const std::string& path, const OversmoothReport& r);

}  // namespace eigengap
