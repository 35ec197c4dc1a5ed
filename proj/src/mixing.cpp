#include "gtopt/mixing.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "gtopt/format.hpp"

namespace gtopt {

MixingMatrix::MixingMatrix(const Topology& t, Matrix w) : w_(std::move(w)) {
  if (static_cast<std::size_t>(w_.rows()) != t.size())
    throw DimensionError("weight matrix size differs from node count");
  validate();
  for (std::size_t i = 0; i < t.size(); ++i)
    for (std::size_t r = 0; r < t.size(); ++r)
      if (i != r && (*this)(i, r) != 0.0 && !t.has_edge(i, r))
        throw ParameterError("nonzero weight on non-edge (" + std::to_string(i) + "," +
                             std::to_string(r) + ")");
}

MixingMatrix::MixingMatrix(Matrix w) : w_(std::move(w)) { validate(); }

void MixingMatrix::validate() {
  if (w_.rows() == 0 || w_.rows() != w_.cols()) throw DimensionError("weight matrix must be square");
  if ((w_.array() < 0.0).any()) throw ParameterError("weight matrix has negative entries");
  if (w_ != w_.transpose()) throw ParameterError("weight matrix is not symmetric");
  const double row_dev = (w_.rowwise().sum().array() - 1.0).abs().maxCoeff();
  const double col_dev = (w_.colwise().sum().array() - 1.0).abs().maxCoeff();
  if (std::max(row_dev, col_dev) >= kStochasticTolerance)
    throw ParameterError("weight matrix is not doubly stochastic");
  lambda_ = spectral_gap(w_);
  if (!(lambda_ < 1.0)) throw ParameterError("weight matrix is not primitive (lambda >= 1)");
}

MixingMatrix metropolis_weights(const Topology& t) {
  const auto n = static_cast<Eigen::Index>(t.size());
  Matrix w = Matrix::Zero(n, n);
  for (auto [i, r] : t.edges()) {
    const double v = 1.0 / (1.0 + static_cast<double>(std::max(t.degree(i), t.degree(r))));
    w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(r)) = v;
    w(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)) = v;
  }
  for (Eigen::Index i = 0; i < n; ++i) w(i, i) = 1.0 - w.row(i).sum();
  return MixingMatrix(t, std::move(w));
}

MixingMatrix lazy_laplacian_weights(const Topology& t, double eps) {
  const double ceiling = 1.0 / static_cast<double>(t.max_degree());
  if (!(eps > 0.0 && eps < ceiling))
    throw ParameterError("laplacian eps must lie in (0, 1/deg_max)");
  const auto n = static_cast<Eigen::Index>(t.size());
  Matrix w = Matrix::Zero(n, n);
  for (auto [i, r] : t.edges()) {
    w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(r)) = eps;
    w(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)) = eps;
  }
  for (Eigen::Index i = 0; i < n; ++i)
    w(i, i) = 1.0 - eps * static_cast<double>(t.degree(static_cast<std::size_t>(i)));
  return MixingMatrix(t, std::move(w));
}

double spectral_gap(const Matrix& w) {
  if (w.rows() == 1) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(w, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw SolverError("eigendecomposition failed");
  std::vector<double> mod(static_cast<std::size_t>(w.rows()));
  for (Eigen::Index i = 0; i < w.rows(); ++i) mod[static_cast<std::size_t>(i)] = std::abs(eig.eigenvalues()(i));
  // The Perron eigenvalue 1 is the largest modulus; drop one copy of it.
  std::sort(mod.begin(), mod.end(), std::greater<>());
  return mod[1];
}

namespace {

void check_stack(const MixingMatrix& m, const Matrix& s, const char* what) {
  if (static_cast<std::size_t>(s.rows()) != m.size())
    throw DimensionError(std::string(what) + ": expected " + std::to_string(m.size()) +
                         " stacked rows, got " + std::to_string(s.rows()));
}

}  // namespace

Matrix consensus_step(const MixingMatrix& m, const Matrix& states) {
  check_stack(m, states, "consensus_step");
  return m.weights() * states;
}

Matrix dac_step(const MixingMatrix& m, const Matrix& trackers, const Matrix& signal_new,
                const Matrix& signal_old) {
  check_stack(m, trackers, "dac_step");
  check_stack(m, signal_new, "dac_step");
  check_stack(m, signal_old, "dac_step");
  if (signal_new.cols() != trackers.cols() || signal_old.cols() != trackers.cols())
    throw DimensionError("dac_step: state dimension mismatch");
  return m.weights() * trackers + (signal_new - signal_old);
}

void write_matrix_csv(std::ostream& out, const Matrix& w) {
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      if (j) out << ',';
      out << format_double(w(i, j));
    }
    out << '\n';
  }
}

Matrix read_matrix_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(parse_double(cell));
    if (!rows.empty() && row.size() != rows.front().size())
      throw IoError("matrix csv: ragged row " + std::to_string(rows.size() + 1));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError("matrix csv: empty input");
  Matrix w(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return w;
}

}  // namespace gtopt
