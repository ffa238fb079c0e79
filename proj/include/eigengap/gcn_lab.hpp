#pragma once

#include <cstdint>
#include <vector>

#include "eigengap/graph_model.hpp"
#include "eigengap/types.hpp"

namespace eigengap {

/// Stack of graph-convolution blocks (X -> act(P X Theta), optional
/// per-channel batch normalization over the nodes) followed by a two-layer
/// per-node head C -> H -> 1. leaky_slope 0 gives plain ReLU, 1 the identity.
struct GcnModel {
  int layers = 1;
  int channels = 1;
  int hidden = 1;
  double leaky_slope = 0.01;
  bool batchnorm = false;

  std::vector<Matrix> theta;  // layers blocks, each channels x channels
  std::vector<Vector> bn_scale, bn_shift;
  Matrix head_w1;  // channels x hidden
  Vector head_b1;  // hidden
  Vector head_w2;  // hidden
  double head_b2 = 0.0;

  /// sup over blocks of the largest singular value of theta.
  double max_singular_value() const;
};

/// Seeded init: weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases
/// zero, batch-norm scale 1 / shift 0.
GcnModel make_gcn_model(int layers, int channels, int hidden, std::uint64_t seed,
                        double leaky_slope = 0.01, bool batchnorm = false);

/// Rescales every block weight by a common factor so max_singular_value()
/// becomes target_s.
void scale_weights_to(GcnModel& model, double target_s);

/// Forward pass with everything backprop and the over-smoothing measurements
/// need: per-block outputs (conv_out[0] is the input), activation inputs,
/// propagated P X, batch-norm caches and the head intermediates.
struct Forward {
  std::vector<Matrix> conv_out;
  std::vector<Matrix> propagated;
  std::vector<Matrix> act_input;
  std::vector<Matrix> bn_norm;
  std::vector<Vector> bn_istd;
  Matrix head_z1;
  Matrix head_h;
  Vector prediction;
};

Forward gcn_forward(const GcnModel& model, const Matrix& p, const Matrix& x);

struct Gradients {
  std::vector<Matrix> theta;
  std::vector<Vector> bn_scale, bn_shift;
  Matrix head_w1;
  Vector head_b1;
  Vector head_w2;
  double head_b2 = 0.0;
};

Gradients zero_gradients(const GcnModel& model);

/// Accumulates d(MSE)/d(params) for one sample into grads and returns the
/// sample's MSE.
double gcn_backward(const GcnModel& model, const Matrix& p, const Forward& fwd,
                    const Vector& target, Gradients& grads);

/// Mean squared error sum (x_i - xhat_i)^2 / N.
double mse(const Vector& truth, const Vector& prediction);

struct Sample {
  Matrix features;  // nodes x channels
  Vector target;    // nodes
};

struct TrainConfig {
  double step_size = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int epochs = 100;
  int batch_size = 32;
  std::uint64_t seed = 0;
  double dropedge_p = 0.0;

  void validate() const {
    if (!(step_size > 0.0)) throw InvalidInput("TrainConfig: step_size must be positive");
    if (dropedge_p < 0.0 || dropedge_p > 1.0)
      throw InvalidInput("TrainConfig: dropedge_p must be within [0, 1]");
    if (epochs < 1 || batch_size < 1)
      throw InvalidInput("TrainConfig: epochs and batch_size must be >= 1");
  }
};

struct TrainResult {
  GcnModel model;
  std::vector<double> loss_trace;  // one mean batch loss per epoch
};

/// Adam on the full parameter set with analytic gradients, seeded shuffling,
/// and per-epoch edge resampling when dropedge_p > 0 (graph required then).
TrainResult train(const GcnModel& model, const GcnOperator& op,
                  const std::vector<Sample>& data, const TrainConfig& cfg,
                  const GraphLaplacian* graph = nullptr);

/// Mean per-sample MSE of the model over a sample set.
double evaluate_mse(const GcnModel& model, const GcnOperator& op,
                    const std::vector<Sample>& data);

/// Frobenius distance from x to the span of op's eigenvalue-1 eigenvectors,
/// applied column-wise.
double distance_to_invariant(const Matrix& x, const GcnOperator& op);

/// Per-layer distances to the invariant subspace next to the geometric
/// envelope (s * lambda)^l * d(X0). strict records whether the model is in
/// the regime the envelope is stated for (plain ReLU, no batch norm).
struct OversmoothReport {
  std::vector<double> distances;  // layer 1..L
  std::vector<double> bounds;
  double initial_distance = 0.0;
  double lambda_bound = 0.0;
  double s = 0.0;
  bool bound_satisfied = false;
  bool strict = false;
};

OversmoothReport oversmoothing_check(const GcnModel& model, const GcnOperator& op,
                                     const Matrix& x0);

/// Independently removes each undirected edge with probability p using the
/// seeded stream, then rebuilds degrees, Laplacian and components. p = 0
/// returns the input unchanged.
GraphLaplacian drop_edges(const GraphLaplacian& g, double p, std::uint64_t seed);

}  // namespace eigengap
