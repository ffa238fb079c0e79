#include "eigengap/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace eigengap {

namespace {

struct IoError : InvalidInput {
  using InvalidInput::InvalidInput;
};

double parse_field(const std::string& field, const std::string& path, std::size_t line) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(field, &pos);
  } catch (const std::exception&) {
    throw IoError(path + ":" + std::to_string(line) + ": non-numeric field '" + field + "'");
  }
  while (pos < field.size() && std::isspace(static_cast<unsigned char>(field[pos]))) ++pos;
  if (pos != field.size())
    throw IoError(path + ":" + std::to_string(line) + ": non-numeric field '" + field + "'");
  return v;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open file: " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write file: " + path);
  return out;
}

std::string expect_keyword_line(std::istream& in, const std::string& key,
                                const std::string& path) {
  std::string line;
  if (!std::getline(in, line)) throw IoError(path + ": truncated file, expected '" + key + "'");
  std::istringstream ss(line);
  std::string word;
  ss >> word;
  if (word != key) throw IoError(path + ": expected '" + key + "', found '" + word + "'");
  std::string rest;
  std::getline(ss, rest);
  return rest;
}

}  // namespace

std::string format_g17(double v) {
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::stod(buf) == v) return buf;
  }
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Matrix read_matrix_csv(const std::string& path, bool skip_header) {
  std::ifstream in = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (skip_header && lineno == 1) continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) row.push_back(parse_field(field, path, lineno));
    if (!rows.empty() && row.size() != rows.front().size())
      throw IoError(path + ":" + std::to_string(lineno) + ": ragged row, expected " +
                    std::to_string(rows.front().size()) + " fields, found " +
                    std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError(path + ": empty matrix");

  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j)
      m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return m;
}

void write_matrix_csv(const std::string& path, const Matrix& m) {
  std::ofstream out = open_out(path);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_g17(m(i, j));
    }
    out << '\n';
  }
}

Vector read_vector(const std::string& path) {
  std::ifstream in = open_in(path);
  std::vector<double> vals;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    for (char& ch : line)
      if (ch == ',') ch = ' ';
    std::istringstream ss(line);
    std::string field;
    while (ss >> field) vals.push_back(parse_field(field, path, lineno));
  }
  if (vals.empty()) throw IoError(path + ": empty vector");
  Vector v(static_cast<Index>(vals.size()));
  for (Index i = 0; i < v.size(); ++i) v(i) = vals[static_cast<std::size_t>(i)];
  return v;
}

void write_laplacian_file(const std::string& path, const LaplacianFile& f) {
  std::ofstream out = open_out(path);
  out << "n " << f.n << '\n';
  out << "kappa " << format_g17(f.kappa) << '\n';
  out << "rho " << format_g17(f.rho) << '\n';
  out << "gap_cov " << format_g17(f.gap_cov) << '\n';
  out << "converged " << (f.converged ? 1 : 0) << '\n';
  out << "sweeps " << f.sweeps << '\n';
  out << "u";
  for (Index i = 0; i < f.u.size(); ++i) out << ' ' << format_g17(f.u(i));
  out << '\n';
  for (Index i = 0; i < f.laplacian.rows(); ++i) {
    out << "row";
    for (Index j = 0; j < f.laplacian.cols(); ++j)
      out << ' ' << format_g17(f.laplacian(i, j));
    out << '\n';
  }
}

LaplacianFile read_laplacian_file(const std::string& path) {
  std::ifstream in = open_in(path);
  LaplacianFile f;
  f.n = static_cast<Index>(std::stoll(expect_keyword_line(in, "n", path)));
  if (f.n <= 0) throw IoError(path + ": invalid node count");
  f.kappa = std::stod(expect_keyword_line(in, "kappa", path));
  f.rho = std::stod(expect_keyword_line(in, "rho", path));
  f.gap_cov = std::stod(expect_keyword_line(in, "gap_cov", path));
  f.converged = std::stoi(expect_keyword_line(in, "converged", path)) != 0;
  f.sweeps = std::stoi(expect_keyword_line(in, "sweeps", path));

  {
    std::istringstream ss(expect_keyword_line(in, "u", path));
    f.u.resize(f.n);
    for (Index i = 0; i < f.n; ++i)
      if (!(ss >> f.u(i))) throw IoError(path + ": truncated u vector");
  }
  f.laplacian.resize(f.n, f.n);
  for (Index i = 0; i < f.n; ++i) {
    std::istringstream ss(expect_keyword_line(in, "row", path));
    for (Index j = 0; j < f.n; ++j)
      if (!(ss >> f.laplacian(i, j)))
        throw IoError(path + ": truncated matrix row " + std::to_string(i));
  }
  return f;
}

void write_oversmooth_report(const std::string& path, const OversmoothReport& r) {
  std::ofstream out = open_out(path);
  out << "layers " << r.distances.size() << '\n';
  out << "s " << format_g17(r.s) << '\n';
  out << "lambda " << format_g17(r.lambda_bound) << '\n';
  out << "initial_distance " << format_g17(r.initial_distance) << '\n';
  out << "strict " << (r.strict ? 1 : 0) << '\n';
  out << "bound_satisfied " << (r.bound_satisfied ? 1 : 0) << '\n';
  for (std::size_t l = 0; l < r.distances.size(); ++l)
    out << "layer " << (l + 1) << ' ' << format_g17(r.distances[l]) << ' '
        << format_g17(r.bounds[l]) << '\n';
}

void write_graph_export(const std::string& path, const GraphLaplacian& g,
                        const GcnOperator& op) {
  std::ofstream out = open_out(path);
  out << "nodes " << g.size() << '\n';
  out << "components " << g.components << '\n';
  out << "self_loops";
  for (Index i = 0; i < g.self_loops.size(); ++i) out << ' ' << format_g17(g.self_loops(i));
  out << '\n';
  out << "p_eigenvalues";
  for (Index i = 0; i < op.eigenvalues.size(); ++i)
    out << ' ' << format_g17(op.eigenvalues(i));
  out << '\n';
  std::size_t count = 0;
  for (Index i = 0; i < g.size(); ++i)
    for (Index j = i + 1; j < g.size(); ++j)
      if (std::abs(g.weights(i, j)) > 1e-10) ++count;
  out << "edges " << count << '\n';
  for (Index i = 0; i < g.size(); ++i)
    for (Index j = i + 1; j < g.size(); ++j)
      if (std::abs(g.weights(i, j)) > 1e-10)
        out << i << ' ' << j << ' ' << format_g17(g.weights(i, j)) << '\n';
}

}  // namespace eigengap
