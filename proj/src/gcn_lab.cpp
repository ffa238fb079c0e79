#include "eigengap/gcn_lab.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace eigengap {

namespace {

constexpr double kBnEps = 1e-5;

Matrix act(const Matrix& z, double slope) {
  return z.unaryExpr([slope](double v) { return v > 0.0 ? v : slope * v; });
}

Matrix act_grad(const Matrix& z, double slope) {
  return z.unaryExpr([slope](double v) { return v > 0.0 ? 1.0 : slope; });
}

void check_dims(const GcnModel& m, const Matrix& p, const Matrix& x) {
  if (p.rows() != p.cols()) throw InvalidInput("gcn_forward: operator is not square");
  if (x.rows() != p.rows()) throw InvalidInput("gcn_forward: feature row count != node count");
  if (x.cols() != m.channels) throw InvalidInput("gcn_forward: feature channels mismatch");
  if (static_cast<int>(m.theta.size()) != m.layers)
    throw InvalidInput("gcn_forward: model weight count mismatch");
}

struct AdamState {
  Gradients m, v;
  int t = 0;
};

void adam_tensor(Matrix& param, const Matrix& g, Matrix& m, Matrix& v,
                 const TrainConfig& cfg, double bc1, double bc2) {
  m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
  v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
  param.array() -=
      cfg.step_size * (m.array() / bc1) / ((v.array() / bc2).sqrt() + cfg.eps);
}

void adam_tensor(Vector& param, const Vector& g, Vector& m, Vector& v,
                 const TrainConfig& cfg, double bc1, double bc2) {
  m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
  v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
  param.array() -=
      cfg.step_size * (m.array() / bc1) / ((v.array() / bc2).sqrt() + cfg.eps);
}

void adam_scalar(double& param, double g, double& m, double& v,
                 const TrainConfig& cfg, double bc1, double bc2) {
  m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
  v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
  param -= cfg.step_size * (m / bc1) / (std::sqrt(v / bc2) + cfg.eps);
}

void adam_step(GcnModel& model, const Gradients& g, AdamState& st,
               const TrainConfig& cfg) {
  st.t += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, st.t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, st.t);
  for (int l = 0; l < model.layers; ++l)
    adam_tensor(model.theta[l], g.theta[l], st.m.theta[l], st.v.theta[l], cfg, bc1, bc2);
  if (model.batchnorm)
    for (int l = 0; l < model.layers; ++l) {
      adam_tensor(model.bn_scale[l], g.bn_scale[l], st.m.bn_scale[l], st.v.bn_scale[l], cfg, bc1, bc2);
      adam_tensor(model.bn_shift[l], g.bn_shift[l], st.m.bn_shift[l], st.v.bn_shift[l], cfg, bc1, bc2);
    }
  adam_tensor(model.head_w1, g.head_w1, st.m.head_w1, st.v.head_w1, cfg, bc1, bc2);
  adam_tensor(model.head_b1, g.head_b1, st.m.head_b1, st.v.head_b1, cfg, bc1, bc2);
  adam_tensor(model.head_w2, g.head_w2, st.m.head_w2, st.v.head_w2, cfg, bc1, bc2);
  adam_scalar(model.head_b2, g.head_b2, st.m.head_b2, st.v.head_b2, cfg, bc1, bc2);
}

}  // namespace

double GcnModel::max_singular_value() const {
  double s = 0.0;
  for (const auto& th : theta) {
    Eigen::JacobiSVD<Matrix> svd(th);
    s = std::max(s, svd.singularValues()(0));
  }
  return s;
}

GcnModel make_gcn_model(int layers, int channels, int hidden, std::uint64_t seed,
                        double leaky_slope, bool batchnorm) {
  if (layers < 1) throw InvalidInput("make_gcn_model: layers must be >= 1");
  if (channels < 1 || hidden < 1)
    throw InvalidInput("make_gcn_model: channels and hidden must be >= 1");

  GcnModel m;
  m.layers = layers;
  m.channels = channels;
  m.hidden = hidden;
  m.leaky_slope = leaky_slope;
  m.batchnorm = batchnorm;

  Rng rng(seed);
  auto fill = [&rng](Matrix& w, double bound) {
    for (Index c = 0; c < w.cols(); ++c)
      for (Index r = 0; r < w.rows(); ++r) w(r, c) = rng.uniform(-bound, bound);
  };
  const double bc = 1.0 / std::sqrt(static_cast<double>(channels));
  const double bh = 1.0 / std::sqrt(static_cast<double>(hidden));

  m.theta.resize(layers);
  for (auto& th : m.theta) {
    th.resize(channels, channels);
    fill(th, bc);
  }
  if (batchnorm) {
    m.bn_scale.assign(layers, Vector::Ones(channels));
    m.bn_shift.assign(layers, Vector::Zero(channels));
  }
  m.head_w1.resize(channels, hidden);
  fill(m.head_w1, bc);
  m.head_b1 = Vector::Zero(hidden);
  Matrix w2(hidden, 1);
  fill(w2, bh);
  m.head_w2 = w2.col(0);
  m.head_b2 = 0.0;
  return m;
}

void scale_weights_to(GcnModel& model, double target_s) {
  const double s = model.max_singular_value();
  if (!(s > 0.0)) throw InvalidInput("scale_weights_to: all block weights are zero");
  const double factor = target_s / s;
  for (auto& th : model.theta) th *= factor;
}

Forward gcn_forward(const GcnModel& model, const Matrix& p, const Matrix& x) {
  check_dims(model, p, x);
  Forward f;
  f.conv_out.reserve(model.layers + 1);
  f.conv_out.push_back(x);
  f.propagated.resize(model.layers);
  f.act_input.resize(model.layers);
  if (model.batchnorm) {
    f.bn_norm.resize(model.layers);
    f.bn_istd.resize(model.layers);
  }

  for (int l = 0; l < model.layers; ++l) {
    f.propagated[l].noalias() = p * f.conv_out.back();
    Matrix z = f.propagated[l] * model.theta[l];
    if (model.batchnorm) {
      const double n = static_cast<double>(z.rows());
      Matrix norm(z.rows(), z.cols());
      Vector istd(z.cols());
      for (Index c = 0; c < z.cols(); ++c) {
        const double mean = z.col(c).mean();
        const double var = (z.col(c).array() - mean).square().sum() / n;
        istd(c) = 1.0 / std::sqrt(var + kBnEps);
        norm.col(c) = (z.col(c).array() - mean) * istd(c);
        z.col(c) = model.bn_scale[l](c) * norm.col(c).array() + model.bn_shift[l](c);
      }
      f.bn_norm[l] = std::move(norm);
      f.bn_istd[l] = std::move(istd);
    }
    f.act_input[l] = std::move(z);
    f.conv_out.push_back(act(f.act_input[l], model.leaky_slope));
  }

  f.head_z1 = (f.conv_out.back() * model.head_w1).rowwise() + model.head_b1.transpose();
  f.head_h = act(f.head_z1, model.leaky_slope);
  f.prediction = f.head_h * model.head_w2 + Vector::Constant(x.rows(), model.head_b2);
  return f;
}

Gradients zero_gradients(const GcnModel& model) {
  Gradients g;
  g.theta.assign(model.layers, Matrix::Zero(model.channels, model.channels));
  if (model.batchnorm) {
    g.bn_scale.assign(model.layers, Vector::Zero(model.channels));
    g.bn_shift.assign(model.layers, Vector::Zero(model.channels));
  }
  g.head_w1 = Matrix::Zero(model.channels, model.hidden);
  g.head_b1 = Vector::Zero(model.hidden);
  g.head_w2 = Vector::Zero(model.hidden);
  g.head_b2 = 0.0;
  return g;
}

double gcn_backward(const GcnModel& model, const Matrix& p, const Forward& fwd,
                    const Vector& target, Gradients& grads) {
  const Index n = fwd.prediction.size();
  if (target.size() != n) throw InvalidInput("gcn_backward: target dimension mismatch");

  const Vector err = fwd.prediction - target;
  const double loss = err.squaredNorm() / static_cast<double>(n);
  const Vector dpred = (2.0 / static_cast<double>(n)) * err;

  grads.head_b2 += dpred.sum();
  grads.head_w2.noalias() += fwd.head_h.transpose() * dpred;
  Matrix dh = dpred * model.head_w2.transpose();
  Matrix dz1 = dh.cwiseProduct(act_grad(fwd.head_z1, model.leaky_slope));
  grads.head_w1.noalias() += fwd.conv_out.back().transpose() * dz1;
  grads.head_b1.noalias() += dz1.colwise().sum().transpose();
  Matrix g = dz1 * model.head_w1.transpose();

  for (int l = model.layers - 1; l >= 0; --l) {
    Matrix dz = g.cwiseProduct(act_grad(fwd.act_input[l], model.leaky_slope));
    if (model.batchnorm) {
      const double rows = static_cast<double>(dz.rows());
      for (Index c = 0; c < dz.cols(); ++c) {
        const Eigen::ArrayXd norm = fwd.bn_norm[l].col(c).array();
        const Eigen::ArrayXd dout = dz.col(c).array();
        grads.bn_scale[l](c) += (dout * norm).sum();
        grads.bn_shift[l](c) += dout.sum();
        const Eigen::ArrayXd dnorm = dout * model.bn_scale[l](c);
        const double mean_dnorm = dnorm.sum() / rows;
        const double mean_dnorm_norm = (dnorm * norm).sum() / rows;
        dz.col(c) = fwd.bn_istd[l](c) * (dnorm - mean_dnorm - norm * mean_dnorm_norm);
      }
    }
    grads.theta[l].noalias() += fwd.propagated[l].transpose() * dz;
    g.noalias() = p * (dz * model.theta[l].transpose());
  }
  return loss;
}

double mse(const Vector& truth, const Vector& prediction) {
  if (truth.size() == 0) throw InvalidInput("mse: empty input");
  if (truth.size() != prediction.size()) throw InvalidInput("mse: length mismatch");
  return (truth - prediction).squaredNorm() / static_cast<double>(truth.size());
}

TrainResult train(const GcnModel& model, const GcnOperator& op,
                  const std::vector<Sample>& data, const TrainConfig& cfg,
                  const GraphLaplacian* graph) {
  cfg.validate();
  if (data.empty()) throw InvalidInput("train: empty data");
  if (cfg.dropedge_p > 0.0 && graph == nullptr)
    throw InvalidInput("train: DropEdge requires the graph");

  TrainResult out;
  out.model = model;
  AdamState st;
  st.m = zero_gradients(model);
  st.v = zero_gradients(model);

  Rng rng(cfg.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const GcnOperator* epoch_op = &op;
    GcnOperator resampled;
    if (cfg.dropedge_p > 0.0) {
      resampled = build_operator(
          drop_edges(*graph, cfg.dropedge_p, mix_seed(cfg.seed, 0xD20Eull + epoch)));
      epoch_op = &resampled;
    }

    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[rng.below(i)]);

    double epoch_loss = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      Gradients grads = zero_gradients(out.model);
      double batch_loss = 0.0;
      for (std::size_t i = start; i < stop; ++i) {
        const Sample& s = data[order[i]];
        Forward fwd = gcn_forward(out.model, epoch_op->p, s.features);
        batch_loss += gcn_backward(out.model, epoch_op->p, fwd, s.target, grads);
      }
      const double inv = 1.0 / static_cast<double>(stop - start);
      batch_loss *= inv;
      for (auto& th : grads.theta) th *= inv;
      for (auto& v : grads.bn_scale) v *= inv;
      for (auto& v : grads.bn_shift) v *= inv;
      grads.head_w1 *= inv;
      grads.head_b1 *= inv;
      grads.head_w2 *= inv;
      grads.head_b2 *= inv;
      adam_step(out.model, grads, st, cfg);
      epoch_loss += batch_loss;
      ++batches;
    }
    epoch_loss /= static_cast<double>(batches);
    if (!std::isfinite(epoch_loss))
      throw NumericalFailure("train: loss diverged at epoch " + std::to_string(epoch));
    out.loss_trace.push_back(epoch_loss);
  }
  return out;
}

double evaluate_mse(const GcnModel& model, const GcnOperator& op,
                    const std::vector<Sample>& data) {
  if (data.empty()) throw InvalidInput("evaluate_mse: empty data");
  double sum = 0.0;
  for (const Sample& s : data)
    sum += mse(s.target, gcn_forward(model, op.p, s.features).prediction);
  return sum / static_cast<double>(data.size());
}

double distance_to_invariant(const Matrix& x, const GcnOperator& op) {
  if (x.rows() != op.size()) throw InvalidInput("distance_to_invariant: dimension mismatch");
  std::vector<Index> cols;
  for (Index i = 0; i < op.size(); ++i)
    if (std::abs(op.eigenvalues(i) - 1.0) <= 1e-8) cols.push_back(i);
  if (cols.empty()) return x.norm();
  Matrix v1(op.size(), static_cast<Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k)
    v1.col(static_cast<Index>(k)) = op.eigenvectors.col(cols[k]);
  return (x - v1 * (v1.transpose() * x)).norm();
}

OversmoothReport oversmoothing_check(const GcnModel& model, const GcnOperator& op,
                                     const Matrix& x0) {
  OversmoothReport r;
  r.s = model.max_singular_value();
  r.lambda_bound = op.lambda_bound;
  r.strict = model.leaky_slope == 0.0 && !model.batchnorm;
  r.initial_distance = distance_to_invariant(x0, op);

  const double rate = r.s * r.lambda_bound;
  Forward fwd = gcn_forward(model, op.p, x0);
  r.bound_satisfied = true;
  for (int l = 1; l <= model.layers; ++l) {
    const double d = distance_to_invariant(fwd.conv_out[l], op);
    const double bound = std::pow(rate, l) * r.initial_distance;
    r.distances.push_back(d);
    r.bounds.push_back(bound);
    if (d > bound + 1e-9) r.bound_satisfied = false;
  }
  return r;
}

GraphLaplacian drop_edges(const GraphLaplacian& g, double p, std::uint64_t seed) {
  if (p < 0.0 || p > 1.0) throw InvalidInput("drop_edges: p must be within [0, 1]");
  if (p == 0.0) return g;

  Rng rng(seed);
  Matrix w = g.weights;
  for (Index i = 0; i < w.rows(); ++i)
    for (Index j = i + 1; j < w.cols(); ++j) {
      if (std::abs(w(i, j)) <= 1e-10) continue;
      if (rng.uniform01() <= p) {
        w(i, j) = 0.0;
        w(j, i) = 0.0;
      }
    }
  return graph_from_weights(std::move(w), g.self_loops);
}

}  // namespace eigengap
