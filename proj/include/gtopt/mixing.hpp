#pragma once

#include <iosfwd>

#include "gtopt/core.hpp"
#include "gtopt/topology.hpp"

namespace gtopt {

/// Symmetric doubly-stochastic weight matrix conforming to a graph.
///
/// Construction checks nonnegativity, symmetry, unit row/column sums
/// (to kStochasticTolerance), the sparsity pattern, and primitivity
/// (second-largest eigenvalue modulus below one). The modulus is cached.
class MixingMatrix {
 public:
  static constexpr double kStochasticTolerance = 1e-12;

  /// Validates w against the topology. Throws ParameterError on violation.
  MixingMatrix(const Topology& t, Matrix w);

  /// Validates w without a sparsity pattern (e.g. a matrix read from CSV).
  explicit MixingMatrix(Matrix w);

  std::size_t size() const { return static_cast<std::size_t>(w_.rows()); }
  const Matrix& weights() const { return w_; }
  double operator()(std::size_t i, std::size_t r) const {
    return w_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(r));
  }
  double lambda() const { return lambda_; }

 private:
  void validate();

  Matrix w_;
  double lambda_ = 0.0;
};

/// w_ir = 1 / (1 + max(deg_i, deg_r)) on edges, diagonal absorbs the rest.
MixingMatrix metropolis_weights(const Topology& t);

/// W = I - eps * L, 0 < eps < 1 / deg_max.
MixingMatrix lazy_laplacian_weights(const Topology& t, double eps);

/// Second-largest eigenvalue modulus of a symmetric matrix.
double spectral_gap(const Matrix& w);
inline double spectral_gap(const MixingMatrix& m) { return m.lambda(); }

/// One round of average consensus on stacked states (row i = node i).
Matrix consensus_step(const MixingMatrix& m, const Matrix& states);

/// One round of dynamic average consensus:
/// d_{k+1} = W d_k + r_{k+1} - r_k.
Matrix dac_step(const MixingMatrix& m, const Matrix& trackers, const Matrix& signal_new,
                const Matrix& signal_old);

/// Row-major CSV, shortest round-trip decimal representation.
void write_matrix_csv(std::ostream& out, const Matrix& w);
Matrix read_matrix_csv(std::istream& in);

}  // namespace gtopt
