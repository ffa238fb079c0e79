#include "eigengap/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "eigengap/io.hpp"

namespace eigengap {

namespace {

namespace fs = std::filesystem;

std::vector<double> parse_double_list(const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string field;
  while (std::getline(ss, field, ',')) {
    std::erase_if(field, [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
    if (field.empty()) continue;
    out.push_back(std::stod(field));
  }
  return out;
}

bool parse_bool(const std::string& value, const std::string& key) {
  if (value == "0" || value == "false") return false;
  if (value == "1" || value == "true") return true;
  throw InvalidInput("sweep config: key '" + key + "' expects 0/1/true/false");
}

std::string trimmed(std::string s) {
  const auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && is_space(s.front())) s.erase(s.begin());
  while (!s.empty() && is_space(s.back())) s.pop_back();
  return s;
}

std::uint64_t cell_seed(std::uint64_t seed, std::uint64_t series, int layers) {
  return mix_seed(mix_seed(seed, series), static_cast<std::uint64_t>(layers));
}

double mean_or_nan(const std::vector<double>& values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

}  // namespace

void SweepConfig::validate() const {
  if (kappas.empty()) throw InvalidInput("sweep config: kappas must not be empty");
  for (double k : kappas)
    if (!(k > 0.0)) throw InvalidInput("sweep config: every kappa must be positive");
  if (seeds.empty()) throw InvalidInput("sweep config: seeds must not be empty");
  if (layers_min < 1 || layers_max > 9 || layers_min > layers_max)
    throw InvalidInput("sweep config: layer range must lie within [1, 9]");
  for (double r : ratios)
    if (!(r > 0.0)) throw InvalidInput("sweep config: split ratios must be positive");
  if (std::abs(ratios[0] + ratios[1] + ratios[2] - 1.0) > 1e-9)
    throw InvalidInput("sweep config: split ratios must sum to 1");
  for (double p : dropedge_rates)
    if (p < 0.0 || p > 1.0)
      throw InvalidInput("sweep config: dropedge rates must lie within [0, 1]");
  if (feature_window < 1) throw InvalidInput("sweep config: feature_window must be >= 1");
  projection_config(kappas.front()).validate();
  glasso_config().validate();
}

ProjectionConfig SweepConfig::projection_config(double kappa) const {
  ProjectionConfig p;
  p.kappa = kappa;
  p.gamma = gamma;
  p.exact_threshold = exact_threshold;
  p.eig_floor = eig_floor;
  return p;
}

GlassoConfig SweepConfig::glasso_config() const {
  GlassoConfig g;
  g.rho = rho;
  g.max_sweeps = max_sweeps;
  g.outer_tol = outer_tol;
  return g;
}

SweepConfig parse_sweep_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open sweep config: " + path);

  SweepConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trimmed(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidInput(path + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trimmed(line.substr(0, eq));
    const std::string value = trimmed(line.substr(eq + 1));
    try {
      if (key == "data") cfg.data_path = value;
      else if (key == "has_header") cfg.has_header = parse_bool(value, key);
      else if (key == "synth_nodes") cfg.synth_nodes = std::stoll(value);
      else if (key == "synth_samples") cfg.synth_samples = std::stoll(value);
      else if (key == "synth_seed") cfg.synth_seed = std::stoull(value);
      else if (key == "synth_phi") cfg.synth_phi = std::stod(value);
      else if (key == "synth_obs_noise") cfg.synth_obs_noise = std::stod(value);
      else if (key == "synth_mean") cfg.synth_mean = std::stod(value);
      else if (key == "synth_diffusion") cfg.synth_diffusion = parse_bool(value, key);
      else if (key == "synth_extra_edges") cfg.synth_extra_edges = std::stoi(value);
      else if (key == "synth_backbone") cfg.synth_backbone = std::stod(value);
      else if (key == "kappas") cfg.kappas = parse_double_list(value);
      else if (key == "layers_min") cfg.layers_min = std::stoi(value);
      else if (key == "layers_max") cfg.layers_max = std::stoi(value);
      else if (key == "seeds") {
        cfg.seeds.clear();
        for (double v : parse_double_list(value))
          cfg.seeds.push_back(static_cast<std::uint64_t>(v));
      } else if (key == "train_ratio") cfg.ratios[0] = std::stod(value);
      else if (key == "val_ratio") cfg.ratios[1] = std::stod(value);
      else if (key == "test_ratio") cfg.ratios[2] = std::stod(value);
      else if (key == "split_seed") cfg.split_seed = std::stoull(value);
      else if (key == "rho") cfg.rho = std::stod(value);
      else if (key == "centered") cfg.centered = parse_bool(value, key);
      else if (key == "feature_window") cfg.feature_window = std::stoi(value);
      else if (key == "target_offset") cfg.target_offset = std::stoi(value);
      else if (key == "epochs") cfg.epochs = std::stoi(value);
      else if (key == "batch_size") cfg.batch_size = std::stoi(value);
      else if (key == "step_size") cfg.step_size = std::stod(value);
      else if (key == "hidden") cfg.hidden = std::stoi(value);
      else if (key == "leaky_slope") cfg.leaky_slope = std::stod(value);
      else if (key == "batchnorm") cfg.batchnorm = parse_bool(value, key);
      else if (key == "gamma") cfg.gamma = std::stod(value);
      else if (key == "exact_threshold") cfg.exact_threshold = std::stoi(value);
      else if (key == "eig_floor") cfg.eig_floor = std::stod(value);
      else if (key == "max_sweeps") cfg.max_sweeps = std::stoi(value);
      else if (key == "outer_tol") cfg.outer_tol = std::stod(value);
      else if (key == "dropedge_rates") cfg.dropedge_rates = parse_double_list(value);
      else
        throw InvalidInput(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    } catch (const InvalidInput&) {
      throw;
    } catch (const std::exception&) {
      throw InvalidInput(path + ":" + std::to_string(lineno) + ": bad value for '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

SignalDataset sweep_dataset(const SweepConfig& cfg) {
  SignalDataset data;
  if (!cfg.data_path.empty()) {
    data = load_signals_csv(cfg.data_path, cfg.has_header);
  } else {
    SparseLaplacianOptions opts;
    opts.extra_edges = cfg.synth_extra_edges;
    opts.backbone_weight = cfg.synth_backbone;
    const Matrix l_true = random_sparse_laplacian(cfg.synth_nodes, cfg.synth_seed, opts);
    const Vector mean = Vector::Constant(cfg.synth_nodes, cfg.synth_mean);
    data = cfg.synth_diffusion
               ? synth_gmrf_diffusion(cfg.synth_nodes, cfg.synth_samples, l_true, mean,
                                      cfg.synth_phi, cfg.synth_obs_noise,
                                      mix_seed(cfg.synth_seed, 1))
               : synth_gmrf_ar(cfg.synth_nodes, cfg.synth_samples, l_true, mean,
                               cfg.synth_phi, cfg.synth_obs_noise,
                               mix_seed(cfg.synth_seed, 1));
  }
  data.feature_window = cfg.feature_window;
  data.target_offset = cfg.target_offset;
  return data;
}

PreparedData prepare_sweep_data(const SweepConfig& cfg, const SignalDataset& data) {
  std::vector<Sample> samples = make_supervised(data);
  const SplitIndices idx =
      split_indices(static_cast<Index>(samples.size()), cfg.ratios, cfg.split_seed);

  PreparedData out;
  auto take = [&samples](const std::vector<Index>& which) {
    std::vector<Sample> part;
    part.reserve(which.size());
    for (Index i : which) part.push_back(samples[static_cast<std::size_t>(i)]);
    return part;
  };
  out.train = take(idx.train);
  out.val = take(idx.val);
  out.test = take(idx.test);

  SignalDataset train_targets;
  train_targets.n = data.n;
  train_targets.t = static_cast<Index>(out.train.size());
  train_targets.x.resize(train_targets.t, train_targets.n);
  for (Index i = 0; i < train_targets.t; ++i)
    train_targets.x.row(i) = out.train[static_cast<std::size_t>(i)].target.transpose();
  out.stats = empirical_stats(train_targets, cfg.centered);
  return out;
}

LearnedGraph learn_graph(const SweepConfig& cfg, const EmpiricalStats& stats,
                         double kappa) {
  LearnedGraph out;
  out.learned = glasso_learn(stats.cov, stats.u, cfg.projection_config(kappa),
                             cfg.glasso_config());
  out.graph = laplacian_to_graph(out.learned.laplacian, EdgeMode::Clamp);
  out.op = build_operator(out.graph);
  out.gap_cov = out.learned.decomp.top_gap();
  const Vector& vals = out.learned.decomp.values;
  const Index n = vals.size();
  out.gap_laplacian = 1.0 / vals(n - 2) - 1.0 / vals(n - 1);
  return out;
}

CellRecord run_cell(const SweepConfig& cfg, const PreparedData& data,
                    const LearnedGraph& graph, std::size_t kappa_index,
                    int layers, std::uint64_t seed) {
  CellRecord rec;
  rec.kappa = cfg.kappas.at(kappa_index);
  rec.layers = layers;
  rec.seed = seed;
  rec.gap_cov = graph.gap_cov;
  rec.gap_laplacian = graph.gap_laplacian;

  const std::uint64_t stream = cell_seed(seed, 1000 + kappa_index, layers);
  const int hidden = cfg.hidden > 0 ? cfg.hidden : cfg.feature_window;
  GcnModel model = make_gcn_model(layers, cfg.feature_window, hidden, stream,
                                  cfg.leaky_slope, cfg.batchnorm);
  TrainConfig tc;
  tc.step_size = cfg.step_size;
  tc.epochs = cfg.epochs;
  tc.batch_size = cfg.batch_size;
  tc.seed = stream;
  TrainResult trained = train(model, graph.op, data.train, tc);
  rec.val_mse = evaluate_mse(trained.model, graph.op, data.val);
  rec.test_mse = evaluate_mse(trained.model, graph.op, data.test);
  return rec;
}

ExperimentResult run_sweep(const SweepConfig& cfg, const SignalDataset& data,
                           const std::string& out_dir) {
  cfg.validate();
  fs::create_directories(out_dir);

  const PreparedData prepared = prepare_sweep_data(cfg, data);
  ExperimentResult result;

  for (std::size_t ki = 0; ki < cfg.kappas.size(); ++ki) {
    const double kappa = cfg.kappas[ki];
    LearnedGraph graph;
    std::string learn_error;
    try {
      graph = learn_graph(cfg, prepared.stats, kappa);
      std::ostringstream name;
      name << "graph_kappa_" << format_g17(kappa) << ".txt";
      write_graph_export((fs::path(out_dir) / name.str()).string(), graph.graph, graph.op);
    } catch (const std::exception& e) {
      learn_error = std::string("error: ") + e.what();
    }

    for (int layers = cfg.layers_min; layers <= cfg.layers_max; ++layers)
      for (std::uint64_t seed : cfg.seeds) {
        if (!learn_error.empty()) {
          CellRecord rec;
          rec.kappa = kappa;
          rec.layers = layers;
          rec.seed = seed;
          rec.status = learn_error;
          result.records.push_back(std::move(rec));
          continue;
        }
        try {
          result.records.push_back(run_cell(cfg, prepared, graph, ki, layers, seed));
        } catch (const std::exception& e) {
          CellRecord rec;
          rec.kappa = kappa;
          rec.layers = layers;
          rec.seed = seed;
          rec.gap_cov = graph.gap_cov;
          rec.gap_laplacian = graph.gap_laplacian;
          rec.status = std::string("error: ") + e.what();
          result.records.push_back(std::move(rec));
        }
      }
  }

  // Flag the optimal layer count per (kappa, seed): smallest val MSE, ties
  // resolved toward fewer layers.
  for (std::size_t ki = 0; ki < cfg.kappas.size(); ++ki)
    for (std::uint64_t seed : cfg.seeds) {
      CellRecord* best = nullptr;
      for (auto& rec : result.records) {
        if (rec.kappa != cfg.kappas[ki] || rec.seed != seed || rec.status != "ok") continue;
        if (!best || rec.val_mse < best->val_mse ||
            (rec.val_mse == best->val_mse && rec.layers < best->layers))
          best = &rec;
      }
      if (best) best->optimal = true;
    }

  // DropEdge baseline on the uncapped graph.
  if (!cfg.dropedge_rates.empty()) {
    LearnedGraph base;
    std::string learn_error;
    try {
      base = learn_graph(cfg, prepared.stats, std::numeric_limits<double>::infinity());
    } catch (const std::exception& e) {
      learn_error = std::string("error: ") + e.what();
    }
    for (std::size_t ri = 0; ri < cfg.dropedge_rates.size(); ++ri)
      for (int layers = cfg.layers_min; layers <= cfg.layers_max; ++layers)
        for (std::uint64_t seed : cfg.seeds) {
          DropEdgeRecord rec;
          rec.rate = cfg.dropedge_rates[ri];
          rec.layers = layers;
          rec.seed = seed;
          if (!learn_error.empty()) {
            rec.status = learn_error;
          } else {
            try {
              const std::uint64_t stream = cell_seed(seed, 5000 + ri, layers);
              const int hidden = cfg.hidden > 0 ? cfg.hidden : cfg.feature_window;
              GcnModel model = make_gcn_model(layers, cfg.feature_window, hidden, stream,
                                              cfg.leaky_slope, cfg.batchnorm);
              TrainConfig tc;
              tc.step_size = cfg.step_size;
              tc.epochs = cfg.epochs;
              tc.batch_size = cfg.batch_size;
              tc.seed = stream;
              tc.dropedge_p = rec.rate;
              TrainResult trained =
                  train(model, base.op, prepared.train, tc, &base.graph);
              rec.val_mse = evaluate_mse(trained.model, base.op, prepared.val);
              rec.test_mse = evaluate_mse(trained.model, base.op, prepared.test);
            } catch (const std::exception& e) {
              rec.status = std::string("error: ") + e.what();
            }
          }
          result.dropedge_records.push_back(std::move(rec));
        }
  }

  // results.csv
  {
    std::ofstream out(fs::path(out_dir) / "results.csv");
    out << "kappa,layers,seed,val_mse,test_mse,achieved_gap_cov_domain,"
           "achieved_gap_laplacian_domain,optimal_layer_flag,status\n";
    for (const auto& r : result.records)
      out << format_g17(r.kappa) << ',' << r.layers << ',' << r.seed << ','
          << format_g17(r.val_mse) << ',' << format_g17(r.test_mse) << ','
          << format_g17(r.gap_cov) << ',' << format_g17(r.gap_laplacian) << ','
          << (r.optimal ? 1 : 0) << ',' << r.status << '\n';
  }

  // plot_gaps.csv: one mean-test-MSE series per kappa.
  {
    std::ofstream out(fs::path(out_dir) / "plot_gaps.csv");
    out << "layers";
    for (double k : cfg.kappas) out << ",kappa_" << format_g17(k);
    out << '\n';
    for (int layers = cfg.layers_min; layers <= cfg.layers_max; ++layers) {
      out << layers;
      for (double k : cfg.kappas) {
        std::vector<double> vals;
        for (const auto& r : result.records)
          if (r.kappa == k && r.layers == layers && r.status == "ok")
            vals.push_back(r.test_mse);
        out << ',' << format_g17(mean_or_nan(vals));
      }
      out << '\n';
    }
  }

  if (!cfg.dropedge_rates.empty()) {
    std::ofstream out(fs::path(out_dir) / "dropedge_results.csv");
    out << "rate,layers,seed,val_mse,test_mse,status\n";
    for (const auto& r : result.dropedge_records)
      out << format_g17(r.rate) << ',' << r.layers << ',' << r.seed << ','
          << format_g17(r.val_mse) << ',' << format_g17(r.test_mse) << ',' << r.status
          << '\n';

    const double kappa_ref = *std::min_element(cfg.kappas.begin(), cfg.kappas.end());
    std::ofstream plot(fs::path(out_dir) / "plot_dropedge.csv");
    plot << "layers";
    for (double p : cfg.dropedge_rates) plot << ",dropedge_" << format_g17(p);
    plot << ",kappa_" << format_g17(kappa_ref) << '\n';
    for (int layers = cfg.layers_min; layers <= cfg.layers_max; ++layers) {
      plot << layers;
      for (double p : cfg.dropedge_rates) {
        std::vector<double> vals;
        for (const auto& r : result.dropedge_records)
          if (r.rate == p && r.layers == layers && r.status == "ok")
            vals.push_back(r.test_mse);
        plot << ',' << format_g17(mean_or_nan(vals));
      }
      std::vector<double> ref;
      for (const auto& r : result.records)
        if (r.kappa == kappa_ref && r.layers == layers && r.status == "ok")
          ref.push_back(r.test_mse);
      plot << ',' << format_g17(mean_or_nan(ref)) << '\n';
    }
  }

  return result;
}

}  // namespace eigengap
