#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gtopt/core.hpp"
#include "gtopt/dataset.hpp"

namespace gtopt {

struct ComponentIndex {
  std::size_t node;
  std::size_t component;
};

/// Smoothness and strong-convexity moduli. `exact` is false when only
/// bounds are available.
struct Curvature {
  double mu;
  double L;
  bool exact;
};

/// F(theta) = (1/n) sum_i f_i(theta), f_i = (1/m_i) sum_j f_ij(theta).
///
/// Subclasses provide per-component values and gradients; the averages and
/// the global component indexing live here. Instances are immutable and
/// safe to evaluate concurrently.
class FiniteSumObjective {
 public:
  virtual ~FiniteSumObjective() = default;

  std::size_t nodes() const { return counts_.size(); }
  std::size_t components(std::size_t node) const { return counts_.at(node); }
  const std::vector<std::size_t>& component_counts() const { return counts_; }
  std::size_t total_components() const { return offsets_.back(); }
  std::size_t dim() const { return dim_; }

  /// Node and local index of global component s in [0, N).
  ComponentIndex locate(std::size_t s) const;

  Vector component_gradient(std::size_t node, std::size_t j, const Vector& theta) const;
  double component_value(std::size_t node, std::size_t j, const Vector& theta) const;

  Vector local_batch_gradient(std::size_t node, const Vector& theta) const;
  double local_value(std::size_t node, const Vector& theta) const;
  Vector global_gradient(const Vector& theta) const;
  double value(const Vector& theta) const;

  /// Gradient of the s-th term of F written as a plain N-term average,
  /// F = (1/N) sum_s F_s with F_s = N / (n m_i) f_ij. The weight is exactly
  /// one when every node holds the same number of components.
  Vector sample_gradient(std::size_t s, const Vector& theta) const;

  virtual Curvature curvature() const = 0;
  virtual std::optional<Vector> closed_form_minimizer() const { return std::nullopt; }

 protected:
  FiniteSumObjective(std::vector<std::size_t> counts, std::size_t dim);

  virtual Vector gradient_impl(std::size_t node, std::size_t j, const Vector& theta) const = 0;
  virtual double value_impl(std::size_t node, std::size_t j, const Vector& theta) const = 0;

 private:
  void check(std::size_t node, std::size_t j, const Vector& theta) const;

  std::vector<std::size_t> counts_;
  std::vector<std::size_t> offsets_;
  std::size_t dim_;
};

/// f_ij(theta) = 1/2 ||A_ij theta - b_ij||^2.
class QuadraticObjective final : public FiniteSumObjective {
 public:
  struct Component {
    Matrix A;
    Vector b;
  };

  explicit QuadraticObjective(std::vector<std::vector<Component>> nodes);

  const Component& component(std::size_t node, std::size_t j) const { return nodes_.at(node).at(j); }

  /// Average Hessian (1/n) sum_i (1/m_i) sum_j A_ij^T A_ij.
  const Matrix& average_hessian() const { return hessian_; }

  Curvature curvature() const override;
  std::optional<Vector> closed_form_minimizer() const override;

 private:
  Vector gradient_impl(std::size_t node, std::size_t j, const Vector& theta) const override;
  double value_impl(std::size_t node, std::size_t j, const Vector& theta) const override;

  std::vector<std::vector<Component>> nodes_;
  Matrix hessian_;
  Vector rhs_;
};

/// f_ij(b, c) = ln(1 + exp(-(b^T x_ij + c) y_ij)) + (reg/2) ||b||^2.
/// theta stacks the weights b followed by the intercept c.
class LogisticObjective final : public FiniteSumObjective {
 public:
  LogisticObjective(std::vector<Dataset> shards, double reg);

  const Dataset& shard(std::size_t node) const { return shards_.at(node); }
  double regularization() const { return reg_; }

  /// mu >= reg (weights block), L <= reg + max_ij ||(x_ij, 1)||^2 / 4.
  Curvature curvature() const override;

 private:
  Vector gradient_impl(std::size_t node, std::size_t j, const Vector& theta) const override;
  double value_impl(std::size_t node, std::size_t j, const Vector& theta) const override;

  std::vector<Dataset> shards_;
  double reg_;
};

/// Shards a dataset and wraps it as a logistic objective. reg <= 0 selects
/// the default 1 / (total samples held by the nodes).
LogisticObjective make_logistic(const Dataset& data, std::size_t n, std::size_t per_node,
                                PartitionMode mode, std::uint64_t seed, double reg);

struct QuadraticFixtureSpec {
  std::size_t nodes = 20;
  std::size_t per_node = 5;
  std::size_t dim = 5;
  double hessian_spread = 0.3;  ///< A_ij = I + spread * G / sqrt(dim); 0 gives A_ij = I
  double node_spread = 5.0;     ///< scale of the per-node target centers
  double noise = 0.5;           ///< within-node target scatter
  std::uint64_t seed = 1;
};

/// Random quadratic finite sum with heterogeneous node targets.
QuadraticObjective make_quadratic_fixture(const QuadraticFixtureSpec& spec);

struct ObjectiveStats {
  double mu;
  double L;
  double kappa;
  double sigma_sq;  ///< exact sampling variance at the probe point
  double b;         ///< (1/n) sum_i ||grad f_i(theta*)||^2
  bool exact_curvature;
};

ObjectiveStats estimate_stats(const FiniteSumObjective& obj, const Vector& theta_star,
                              const Vector& theta_probe);

}  // namespace gtopt
