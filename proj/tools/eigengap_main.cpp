#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <limits>
#include <string>

#include "eigengap/glasso.hpp"
#include "eigengap/io.hpp"
#include "eigengap/pipeline.hpp"
#include "eigengap/sweep.hpp"

namespace eg = eigengap;

namespace {

struct LearnArgs {
  std::string signals, out, graph_out;
  bool has_header = false;
  bool centered = false;
  double rho = 1e-4;
  double kappa = 1.0;
  double gamma = 5.0;
  double eig_floor = -1.0;
  double outer_tol = 1e-6;
  int max_sweeps = 50;
  int exact_threshold = 64;
  std::uint64_t seed = 0;  // accepted for interface stability; learning is deterministic
};

int cmd_learn(const LearnArgs& a) {
  const eg::SignalDataset data = eg::load_signals_csv(a.signals, a.has_header);
  const eg::EmpiricalStats stats = eg::empirical_stats(data, a.centered);

  eg::ProjectionConfig pc;
  pc.kappa = a.kappa;
  pc.gamma = a.gamma;
  pc.eig_floor = a.eig_floor;
  pc.exact_threshold = a.exact_threshold;
  eg::GlassoConfig gc;
  gc.rho = a.rho;
  gc.max_sweeps = a.max_sweeps;
  gc.outer_tol = a.outer_tol;

  const eg::GlassoResult res = eg::glasso_learn(stats.cov, stats.u, pc, gc);

  eg::LaplacianFile f;
  f.n = data.n;
  f.kappa = a.kappa;
  f.rho = a.rho;
  f.gap_cov = res.decomp.top_gap();
  f.converged = res.converged;
  f.sweeps = res.sweeps;
  f.u = stats.u;
  f.laplacian = res.laplacian;
  eg::write_laplacian_file(a.out, f);

  if (!a.graph_out.empty()) {
    const eg::GraphLaplacian g = eg::laplacian_to_graph(res.laplacian);
    eg::write_graph_export(a.graph_out, g, eg::build_operator(g));
  }
  std::cout << "learned n=" << data.n << " sweeps=" << res.sweeps
            << " converged=" << (res.converged ? 1 : 0)
            << " gap_cov=" << eg::format_g17(f.gap_cov) << '\n';
  if (!res.converged)
    std::cout << "warning: alternation did not reach outer_tol within max_sweeps\n";
  return 0;
}

struct ProjectArgs {
  std::string cov, u, out;
  double kappa = 1.0;
  double gamma = 5.0;
  double eig_floor = -1.0;
  int exact_threshold = 64;
};

int cmd_project(const ProjectArgs& a) {
  const eg::Matrix cov = eg::read_matrix_csv(a.cov);
  eg::Vector u = eg::read_vector(a.u);
  eg::ProjectionConfig pc;
  pc.kappa = a.kappa;
  pc.gamma = a.gamma;
  pc.eig_floor = a.eig_floor;
  pc.exact_threshold = a.exact_threshold;
  const eg::ProjectionResult res = eg::project(cov, u, pc);
  eg::write_matrix_csv(a.out, res.c);
  std::cout << "projected n=" << cov.rows()
            << " lambda_n=" << eg::format_g17(res.decomp.values(res.decomp.size() - 1))
            << " gap=" << eg::format_g17(res.decomp.top_gap()) << '\n';
  return 0;
}

struct TrainArgs {
  std::string laplacian, signals, out, oversmooth_out;
  bool has_header = false;
  int layers = 2;
  int window = 10;
  int offset = 1;
  int hidden = 0;
  int epochs = 100;
  int batch = 32;
  double step = 1e-3;
  double dropedge = 0.0;
  std::uint64_t seed = 0;
};

int cmd_gcn_train(const TrainArgs& a) {
  const eg::LaplacianFile lf = eg::read_laplacian_file(a.laplacian);
  eg::SignalDataset data = eg::load_signals_csv(a.signals, a.has_header);
  if (data.n != lf.n)
    throw eg::InvalidInput("gcn-train: signals and Laplacian disagree on node count");
  data.feature_window = a.window;
  data.target_offset = a.offset;

  const eg::GraphLaplacian graph = eg::laplacian_to_graph(lf.laplacian);
  const eg::GcnOperator op = eg::build_operator(graph);

  const std::vector<eg::Sample> samples = eg::make_supervised(data);
  const eg::SplitIndices idx = eg::split_indices(
      static_cast<eg::Index>(samples.size()), {0.7, 0.2, 0.1}, a.seed);
  auto take = [&samples](const std::vector<eg::Index>& which) {
    std::vector<eg::Sample> part;
    part.reserve(which.size());
    for (eg::Index i : which) part.push_back(samples[static_cast<std::size_t>(i)]);
    return part;
  };
  const auto train_set = take(idx.train);
  const auto val_set = take(idx.val);
  const auto test_set = take(idx.test);

  const int hidden = a.hidden > 0 ? a.hidden : a.window;
  eg::GcnModel model = eg::make_gcn_model(a.layers, a.window, hidden, a.seed);
  eg::TrainConfig tc;
  tc.step_size = a.step;
  tc.epochs = a.epochs;
  tc.batch_size = a.batch;
  tc.seed = a.seed;
  tc.dropedge_p = a.dropedge;
  const eg::TrainResult res = eg::train(model, op, train_set, tc, &graph);

  std::ofstream out(a.out);
  if (!out) throw eg::InvalidInput("cannot write trace file: " + a.out);
  out << "epoch,loss\n";
  for (std::size_t e = 0; e < res.loss_trace.size(); ++e)
    out << e << ',' << eg::format_g17(res.loss_trace[e]) << '\n';

  if (!a.oversmooth_out.empty() && !train_set.empty())
    eg::write_oversmooth_report(
        a.oversmooth_out,
        eg::oversmoothing_check(res.model, op, train_set.front().features));

  std::cout << "val_mse=" << eg::format_g17(eg::evaluate_mse(res.model, op, val_set))
            << " test_mse=" << eg::format_g17(eg::evaluate_mse(res.model, op, test_set))
            << '\n';
  return 0;
}

struct SynthArgs {
  std::string laplacian, out, laplacian_out;
  eg::Index nodes = 20;
  eg::Index samples = 1000;
  std::uint64_t seed = 7;
  double phi = 0.0;
  double noise = 0.0;
  bool diffusion = false;
  double mean = 5.0;
  int extra_edges = 6;
  double backbone = 0.0;
};

int cmd_synth(const SynthArgs& a) {
  eg::Matrix l_true;
  if (!a.laplacian.empty()) {
    l_true = eg::read_matrix_csv(a.laplacian);
    if (l_true.rows() != a.nodes)
      throw eg::InvalidInput("synth: --nodes disagrees with the provided Laplacian");
  } else {
    eg::SparseLaplacianOptions opts;
    opts.extra_edges = a.extra_edges;
    opts.backbone_weight = a.backbone;
    l_true = eg::random_sparse_laplacian(a.nodes, a.seed, opts);
  }
  const eg::Vector mean = eg::Vector::Constant(a.nodes, a.mean);
  const std::uint64_t stream = eg::mix_seed(a.seed, 1);
  eg::SignalDataset data;
  if (a.diffusion)
    data = eg::synth_gmrf_diffusion(a.nodes, a.samples, l_true, mean, a.phi, a.noise, stream);
  else if (a.phi > 0.0 || a.noise > 0.0)
    data = eg::synth_gmrf_ar(a.nodes, a.samples, l_true, mean, a.phi, a.noise, stream);
  else
    data = eg::synth_gmrf(a.nodes, a.samples, l_true, mean, stream);
  eg::write_matrix_csv(a.out, data.x);
  if (!a.laplacian_out.empty()) eg::write_matrix_csv(a.laplacian_out, l_true);
  std::cout << "synthesized t=" << a.samples << " n=" << a.nodes << '\n';
  return 0;
}

struct SweepArgs {
  std::string config, out;
};

int cmd_sweep(const SweepArgs& a) {
  const eg::SweepConfig cfg = eg::parse_sweep_config(a.config);
  const eg::SignalDataset data = eg::sweep_dataset(cfg);
  const eg::ExperimentResult res = eg::run_sweep(cfg, data, a.out);
  int ok = 0, failed = 0;
  for (const auto& r : res.records) (r.status == "ok" ? ok : failed) += 1;
  std::cout << "sweep cells ok=" << ok << " failed=" << failed << " out=" << a.out << '\n';
  return failed == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse graph learning with a capped eigen-gap, plus a GCN depth lab"};
  app.require_subcommand(1);

  LearnArgs learn;
  auto* cl = app.add_subcommand("learn", "Learn a Laplacian from a signals CSV");
  cl->add_option("--signals", learn.signals, "signals CSV (rows = time, cols = nodes)")->required();
  cl->add_flag("--has-header", learn.has_header, "skip the first CSV line");
  cl->add_option("--rho", learn.rho, "l1 shrinkage (dual box half-width)");
  cl->add_option("--kappa", learn.kappa, "eigen-gap cap (inf for none)")->required();
  cl->add_flag("--centered", learn.centered, "use the centered covariance");
  cl->add_option("--seed", learn.seed, "accepted for interface stability; learning is deterministic");
  cl->add_option("--gamma", learn.gamma, "orthogonality penalty of the fast direction solver");
  cl->add_option("--eig-floor", learn.eig_floor, "minimum retained eigenvalue (<0: 1e-6 * lambda_N)");
  cl->add_option("--exact-threshold", learn.exact_threshold, "dense direction solver up to this N");
  cl->add_option("--max-sweeps", learn.max_sweeps, "outer iteration budget");
  cl->add_option("--outer-tol", learn.outer_tol, "relative Frobenius stop threshold");
  cl->add_option("--out", learn.out, "Laplacian output file")->required();
  cl->add_option("--graph-out", learn.graph_out, "optional graph export file");

  ProjectArgs project;
  auto* cp = app.add_subcommand("project", "Project a covariance CSV onto the constraint cone");
  cp->add_option("--cov", project.cov, "covariance CSV")->required();
  cp->add_option("--u", project.u, "prescribed last eigenvector (one value per line)")->required();
  cp->add_option("--kappa", project.kappa, "eigen-gap cap (inf for none)")->required();
  cp->add_option("--gamma", project.gamma, "orthogonality penalty of the fast direction solver");
  cp->add_option("--eig-floor", project.eig_floor, "minimum retained eigenvalue (<0: 1e-6 * lambda_N)");
  cp->add_option("--exact-threshold", project.exact_threshold, "dense direction solver up to this N");
  cp->add_option("--out", project.out, "projected covariance CSV")->required();

  TrainArgs traina;
  auto* ct = app.add_subcommand("gcn-train", "Train the GCN on a learned Laplacian");
  ct->add_option("--laplacian", traina.laplacian, "Laplacian file from 'learn'")->required();
  ct->add_option("--signals", traina.signals, "signals CSV")->required();
  ct->add_flag("--has-header", traina.has_header, "skip the first CSV line");
  ct->add_option("--layers", traina.layers, "graph-conv blocks")->required();
  ct->add_option("--window", traina.window, "past steps per node used as channels");
  ct->add_option("--offset", traina.offset, "steps between window end and target");
  ct->add_option("--hidden", traina.hidden, "head hidden width (0: same as window)");
  ct->add_option("--epochs", traina.epochs, "training epochs");
  ct->add_option("--batch", traina.batch, "batch size");
  ct->add_option("--step", traina.step, "Adam step size");
  ct->add_option("--dropedge", traina.dropedge, "edge drop probability per epoch");
  ct->add_option("--seed", traina.seed, "split/init/shuffle seed");
  ct->add_option("--out", traina.out, "loss trace CSV")->required();
  ct->add_option("--oversmooth-out", traina.oversmooth_out,
                 "write the per-layer invariant-subspace distance report here");

  SynthArgs synth;
  auto* cs = app.add_subcommand("synth", "Generate synthetic GMRF signals");
  cs->add_option("--nodes", synth.nodes, "node count")->required();
  cs->add_option("--samples", synth.samples, "observation count")->required();
  cs->add_option("--seed", synth.seed, "generator seed");
  cs->add_option("--laplacian", synth.laplacian, "ground-truth precision CSV (default: random sparse)");
  cs->add_option("--phi", synth.phi, "temporal AR(1) coefficient (0: independent draws)");
  cs->add_flag("--diffusion", synth.diffusion,
               "propagate the state one graph hop per step instead of per-node AR");
  cs->add_option("--noise", synth.noise, "observation noise level");
  cs->add_option("--mean", synth.mean, "mean signal level (constant across nodes)");
  cs->add_option("--extra-edges", synth.extra_edges, "chords beyond the ring (random Laplacian)");
  cs->add_option("--backbone", synth.backbone, "strong-edge weight (random Laplacian, 0: none)");
  cs->add_option("--out", synth.out, "signals CSV output")->required();
  cs->add_option("--laplacian-out", synth.laplacian_out, "write the ground-truth Laplacian here");

  SweepArgs sweep;
  auto* cw = app.add_subcommand("sweep", "Run the (kappa x layers x seed) experiment sweep");
  cw->add_option("--config", sweep.config, "sweep config file (key = value lines)")->required();
  cw->add_option("--out", sweep.out, "output directory")->required();

  try {
    app.parse(argc, argv);
    if (cl->parsed()) return cmd_learn(learn);
    if (cp->parsed()) return cmd_project(project);
    if (ct->parsed()) return cmd_gcn_train(traina);
    if (cs->parsed()) return cmd_synth(synth);
    if (cw->parsed()) return cmd_sweep(sweep);
    return 1;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const eg::NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const eg::InvalidInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
