#include "gtopt/objectives.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace gtopt {

FiniteSumObjective::FiniteSumObjective(std::vector<std::size_t> counts, std::size_t dim)
    : counts_(std::move(counts)), offsets_{0}, dim_(dim) {
  if (counts_.empty()) throw ParameterError("objective needs at least one node");
  if (dim_ == 0) throw ParameterError("objective dimension must be positive");
  for (auto m : counts_) {
    if (m == 0) throw ParameterError("every node needs at least one component");
    offsets_.push_back(offsets_.back() + m);
  }
}

ComponentIndex FiniteSumObjective::locate(std::size_t s) const {
  if (s >= total_components()) throw ParameterError("global component index out of range");
  const auto it = std::upper_bound(offsets_.begin(), offsets_.end(), s);
  const auto node = static_cast<std::size_t>(it - offsets_.begin()) - 1;
  return {node, s - offsets_[node]};
}

void FiniteSumObjective::check(std::size_t node, std::size_t j, const Vector& theta) const {
  if (node >= nodes()) throw ParameterError("node index out of range");
  if (j >= counts_[node]) throw ParameterError("component index out of range");
  if (static_cast<std::size_t>(theta.size()) != dim_) throw DimensionError("parameter dimension mismatch");
}

Vector FiniteSumObjective::component_gradient(std::size_t node, std::size_t j, const Vector& theta) const {
  check(node, j, theta);
  return gradient_impl(node, j, theta);
}

double FiniteSumObjective::component_value(std::size_t node, std::size_t j, const Vector& theta) const {
  check(node, j, theta);
  return value_impl(node, j, theta);
}

Vector FiniteSumObjective::local_batch_gradient(std::size_t node, const Vector& theta) const {
  check(node, 0, theta);
  Vector g = Vector::Zero(static_cast<Eigen::Index>(dim_));
  for (std::size_t j = 0; j < counts_[node]; ++j) g += gradient_impl(node, j, theta);
  return g / static_cast<double>(counts_[node]);
}

double FiniteSumObjective::local_value(std::size_t node, const Vector& theta) const {
  check(node, 0, theta);
  double v = 0.0;
  for (std::size_t j = 0; j < counts_[node]; ++j) v += value_impl(node, j, theta);
  return v / static_cast<double>(counts_[node]);
}

Vector FiniteSumObjective::global_gradient(const Vector& theta) const {
  Vector g = Vector::Zero(static_cast<Eigen::Index>(dim_));
  for (std::size_t i = 0; i < nodes(); ++i) g += local_batch_gradient(i, theta);
  return g / static_cast<double>(nodes());
}

double FiniteSumObjective::value(const Vector& theta) const {
  double v = 0.0;
  for (std::size_t i = 0; i < nodes(); ++i) v += local_value(i, theta);
  return v / static_cast<double>(nodes());
}

Vector FiniteSumObjective::sample_gradient(std::size_t s, const Vector& theta) const {
  const auto [node, j] = locate(s);
  const double weight = static_cast<double>(total_components()) /
                        (static_cast<double>(nodes()) * static_cast<double>(counts_[node]));
  Vector g = component_gradient(node, j, theta);
  if (weight != 1.0) g *= weight;
  return g;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::size_t> count_components(const std::vector<std::vector<QuadraticObjective::Component>>& nodes) {
  std::vector<std::size_t> counts;
  for (const auto& n : nodes) counts.push_back(n.size());
  return counts;
}

std::size_t quadratic_dim(const std::vector<std::vector<QuadraticObjective::Component>>& nodes) {
  if (nodes.empty() || nodes.front().empty()) throw ParameterError("quadratic objective has no components");
  return static_cast<std::size_t>(nodes.front().front().A.cols());
}

}  // namespace

QuadraticObjective::QuadraticObjective(std::vector<std::vector<Component>> nodes)
    : FiniteSumObjective(count_components(nodes), quadratic_dim(nodes)), nodes_(std::move(nodes)) {
  const auto p = static_cast<Eigen::Index>(dim());
  hessian_ = Matrix::Zero(p, p);
  rhs_ = Vector::Zero(p);
  for (const auto& node : nodes_) {
    Matrix h = Matrix::Zero(p, p);
    Vector r = Vector::Zero(p);
    for (const auto& c : node) {
      if (c.A.cols() != p || c.A.rows() != c.b.size())
        throw DimensionError("quadratic component shapes are inconsistent");
      h += c.A.transpose() * c.A;
      r += c.A.transpose() * c.b;
    }
    hessian_ += h / static_cast<double>(node.size());
    rhs_ += r / static_cast<double>(node.size());
  }
  hessian_ /= static_cast<double>(nodes_.size());
  rhs_ /= static_cast<double>(nodes_.size());
}

Vector QuadraticObjective::gradient_impl(std::size_t node, std::size_t j, const Vector& theta) const {
  const auto& c = nodes_[node][j];
  return c.A.transpose() * (c.A * theta - c.b);
}

double QuadraticObjective::value_impl(std::size_t node, std::size_t j, const Vector& theta) const {
  const auto& c = nodes_[node][j];
  return 0.5 * (c.A * theta - c.b).squaredNorm();
}

Curvature QuadraticObjective::curvature() const {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(hessian_, Eigen::EigenvaluesOnly);
  const auto& ev = eig.eigenvalues();
  return {ev.minCoeff(), ev.maxCoeff(), true};
}

std::optional<Vector> QuadraticObjective::closed_form_minimizer() const {
  Eigen::LDLT<Matrix> ldlt(hessian_);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
    throw SolverError("average Hessian is not positive definite");
  return Vector(ldlt.solve(rhs_));
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::size_t> shard_counts(const std::vector<Dataset>& shards) {
  std::vector<std::size_t> counts;
  for (const auto& s : shards) counts.push_back(s.size());
  return counts;
}

std::size_t shard_dim(const std::vector<Dataset>& shards) {
  if (shards.empty()) throw ParameterError("logistic objective needs at least one shard");
  return shards.front().dim() + 1;
}

// ln(1 + exp(-t)) without overflow.
double softplus_neg(double t) { return t > 0 ? std::log1p(std::exp(-t)) : -t + std::log1p(std::exp(t)); }

// 1 / (1 + exp(t)) without overflow.
double sigmoid_neg(double t) {
  if (t >= 0) {
    const double e = std::exp(-t);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(t));
}

}  // namespace

LogisticObjective::LogisticObjective(std::vector<Dataset> shards, double reg)
    : FiniteSumObjective(shard_counts(shards), shard_dim(shards)), shards_(std::move(shards)), reg_(reg) {
  if (!(reg_ > 0.0)) throw ParameterError("logistic regularization must be positive");
  for (const auto& s : shards_) {
    if (s.dim() + 1 != dim()) throw DimensionError("shards disagree on feature dimension");
    for (int y : s.labels)
      if (y != -1 && y != 1) throw ParameterError("logistic labels must be -1 or +1");
  }
}

Vector LogisticObjective::gradient_impl(std::size_t node, std::size_t j, const Vector& theta) const {
  const auto& s = shards_[node];
  const auto d = static_cast<Eigen::Index>(s.dim());
  const auto x = s.features.row(static_cast<Eigen::Index>(j));
  const double y = s.labels[j];
  const double margin = y * (x.dot(theta.head(d)) + theta(d));
  const double coef = -y * sigmoid_neg(margin);
  Vector g(theta.size());
  g.head(d) = coef * x.transpose() + reg_ * theta.head(d);
  g(d) = coef;
  return g;
}

double LogisticObjective::value_impl(std::size_t node, std::size_t j, const Vector& theta) const {
  const auto& s = shards_[node];
  const auto d = static_cast<Eigen::Index>(s.dim());
  const auto x = s.features.row(static_cast<Eigen::Index>(j));
  const double margin = s.labels[j] * (x.dot(theta.head(d)) + theta(d));
  return softplus_neg(margin) + 0.5 * reg_ * theta.head(d).squaredNorm();
}

Curvature LogisticObjective::curvature() const {
  double max_sq = 0.0;
  for (const auto& s : shards_)
    for (Eigen::Index r = 0; r < s.features.rows(); ++r)
      max_sq = std::max(max_sq, s.features.row(r).squaredNorm() + 1.0);
  return {reg_, reg_ + 0.25 * max_sq, false};
}

LogisticObjective make_logistic(const Dataset& data, std::size_t n, std::size_t per_node,
                                PartitionMode mode, std::uint64_t seed, double reg) {
  auto shards = partition_dataset(data, n, per_node, mode, seed);
  if (!(reg > 0.0)) {
    std::size_t total = 0;
    for (const auto& s : shards) total += s.size();
    reg = 1.0 / static_cast<double>(total);
  }
  return LogisticObjective(std::move(shards), reg);
}

QuadraticObjective make_quadratic_fixture(const QuadraticFixtureSpec& spec) {
  if (spec.nodes == 0 || spec.per_node == 0 || spec.dim == 0)
    throw ParameterError("quadratic fixture sizes must be positive");
  Rng rng(spec.seed, 0);
  const auto p = static_cast<Eigen::Index>(spec.dim);
  const double scale = spec.hessian_spread / std::sqrt(static_cast<double>(spec.dim));
  std::vector<std::vector<QuadraticObjective::Component>> nodes(spec.nodes);
  for (auto& node : nodes) {
    Vector center(p);
    for (auto& v : center) v = spec.node_spread * rng.normal();
    for (std::size_t j = 0; j < spec.per_node; ++j) {
      QuadraticObjective::Component c{Matrix::Identity(p, p), Vector(p)};
      if (scale != 0.0)
        for (Eigen::Index r = 0; r < p; ++r)
          for (Eigen::Index k = 0; k < p; ++k) c.A(r, k) += scale * rng.normal();
      for (Eigen::Index r = 0; r < p; ++r) c.b(r) = center(r) + spec.noise * rng.normal();
      node.push_back(std::move(c));
    }
  }
  return QuadraticObjective(std::move(nodes));
}

ObjectiveStats estimate_stats(const FiniteSumObjective& obj, const Vector& theta_star,
                              const Vector& theta_probe) {
  const auto curv = obj.curvature();
  double sigma_sq = 0.0;
  double bias = 0.0;
  for (std::size_t i = 0; i < obj.nodes(); ++i) {
    const Vector local = obj.local_batch_gradient(i, theta_probe);
    double spread = 0.0;
    for (std::size_t j = 0; j < obj.components(i); ++j)
      spread += (obj.component_gradient(i, j, theta_probe) - local).squaredNorm();
    sigma_sq += spread / static_cast<double>(obj.components(i));
    bias += obj.local_batch_gradient(i, theta_star).squaredNorm();
  }
  const double n = static_cast<double>(obj.nodes());
  return {curv.mu, curv.L, curv.L / curv.mu, sigma_sq / n, bias / n, curv.exact};
}

}  // namespace gtopt
