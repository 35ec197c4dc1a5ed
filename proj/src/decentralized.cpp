#include "gtopt/decentralized.hpp"

namespace gtopt {

Method parse_method(const std::string& s) {
  if (s == "dgd") return Method::dgd;
  if (s == "dsgd") return Method::dsgd;
  if (s == "gt-dgd") return Method::gt_dgd;
  if (s == "gt-dsgd") return Method::gt_dsgd;
  if (s == "gt-saga") return Method::gt_saga;
  if (s == "gt-svrg") return Method::gt_svrg;
  throw ConfigError("unknown decentralized method '" + s + "'");
}

std::string to_string(Method m) {
  switch (m) {
    case Method::dgd: return "dgd";
    case Method::dsgd: return "dsgd";
    case Method::gt_dgd: return "gt-dgd";
    case Method::gt_dsgd: return "gt-dsgd";
    case Method::gt_saga: return "gt-saga";
    case Method::gt_svrg: return "gt-svrg";
  }
  return "?";
}

bool uses_tracking(Method m) { return m != Method::dgd && m != Method::dsgd; }

SvrgAnchor parse_svrg_anchor(const std::string& s) {
  if (s == "refresh") return SvrgAnchor::refresh;
  if (s == "carry") return SvrgAnchor::carry;
  throw ConfigError("unknown GT-SVRG anchor mode '" + s + "'");
}

std::string to_string(SvrgAnchor a) { return a == SvrgAnchor::refresh ? "refresh" : "carry"; }

NodeState NetworkState::node(std::size_t i) const {
  const auto r = static_cast<Eigen::Index>(i);
  NodeState s;
  s.theta = theta.row(r).transpose();
  if (tracker.rows()) s.tracker = tracker.row(r).transpose();
  if (estimate.rows()) s.estimate = estimate.row(r).transpose();
  if (!tables.empty()) s.table = &tables.at(i);
  if (anchor.rows()) s.anchor = anchor.row(r).transpose();
  if (anchor_grad.rows()) s.anchor_grad = anchor_grad.row(r).transpose();
  s.evals = evals.at(i);
  return s;
}

std::size_t NetworkState::total_evals() const {
  std::size_t total = 0;
  for (auto e : evals) total += e;
  return total;
}

namespace {

Eigen::Index row(std::size_t i) { return static_cast<Eigen::Index>(i); }

Vector row_of(const Matrix& m, std::size_t i) { return m.row(row(i)).transpose(); }

void check_alpha(double alpha) {
  if (!(alpha > 0.0)) throw ParameterError("step size must be positive");
}

void check_method(const NetworkState& net, Method expected) {
  if (net.method != expected)
    throw ParameterError("network state was initialized for " + to_string(net.method) + ", not " +
                         to_string(expected));
}

// One uniformly sampled local component gradient per node.
Matrix sampled_gradients(NetworkState& net, const FiniteSumObjective& obj, const Matrix& at) {
  Matrix g(at.rows(), at.cols());
  for (std::size_t i = 0; i < net.nodes(); ++i) {
    const auto s = net.rngs[i].index(obj.components(i));
    g.row(row(i)) = obj.component_gradient(i, s, row_of(at, i)).transpose();
    net.evals[i] += 1;
  }
  return g;
}

Matrix batch_gradients(NetworkState& net, const FiniteSumObjective& obj, const Matrix& at) {
  Matrix g(at.rows(), at.cols());
  for (std::size_t i = 0; i < net.nodes(); ++i) {
    g.row(row(i)) = obj.local_batch_gradient(i, row_of(at, i)).transpose();
    net.evals[i] += obj.components(i);
  }
  return g;
}

// Draws a local sample per node and forms its SVRG estimator at `at`.
Matrix svrg_estimates(NetworkState& net, const FiniteSumObjective& obj, const Matrix& at) {
  Matrix v(at.rows(), at.cols());
  for (std::size_t i = 0; i < net.nodes(); ++i) {
    const auto s = net.rngs[i].index(obj.components(i));
    v.row(row(i)) =
        node_svrg_estimate(obj, i, s, row_of(at, i), row_of(net.anchor, i), row_of(net.anchor_grad, i)).transpose();
    net.evals[i] += 2;
  }
  return v;
}

}  // namespace

NetworkState initialize(Method method, const FiniteSumObjective& obj, const Matrix& theta0,
                        std::uint64_t master_seed, SvrgAnchor anchor) {
  const std::size_t n = obj.nodes();
  if (static_cast<std::size_t>(theta0.rows()) != n || static_cast<std::size_t>(theta0.cols()) != obj.dim())
    throw DimensionError("initial state must be nodes x dim");

  NetworkState net;
  net.method = method;
  net.svrg_anchor = anchor;
  net.theta = theta0;
  net.evals.assign(n, 0);
  net.rngs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) net.rngs.emplace_back(master_seed, i);

  switch (method) {
    case Method::dgd:
    case Method::dsgd:
      break;
    case Method::gt_dgd:
      net.estimate = batch_gradients(net, obj, net.theta);
      net.tracker = net.estimate;
      break;
    case Method::gt_dsgd:
      net.estimate = sampled_gradients(net, obj, net.theta);
      net.tracker = net.estimate;
      break;
    case Method::gt_saga: {
      net.estimate.resize(theta0.rows(), theta0.cols());
      net.tables.reserve(n);
      for (std::size_t i = 0; i < n; ++i) {
        const Vector th = row_of(net.theta, i);
        net.tables.push_back(GradientTable::build(obj.components(i), [&](std::size_t j) {
          return obj.component_gradient(i, j, th);
        }));
        net.evals[i] += obj.components(i);
        // The drawn entry was evaluated at theta_0 when the table was built,
        // so the estimator is exactly the table mean.
        const auto s = net.rngs[i].index(obj.components(i));
        net.estimate.row(row(i)) = saga_estimate(net.tables[i].entry(s), net.tables[i], s).transpose();
      }
      net.tracker = net.estimate;
      break;
    }
    case Method::gt_svrg:
      net.estimate = Matrix::Zero(theta0.rows(), theta0.cols());
      net.tracker = net.estimate;
      net.anchor = net.theta;
      net.anchor_grad = Matrix::Zero(theta0.rows(), theta0.cols());
      break;
  }
  return net;
}

void dgd_round(NetworkState& net, const MixingMatrix& w, const FiniteSumObjective& obj, double alpha) {
  check_method(net, Method::dgd);
  check_alpha(alpha);
  const Matrix g = batch_gradients(net, obj, net.theta);
  net.theta = consensus_step(w, net.theta) - alpha * g;
  net.exchanges += 1;
  net.round += 1;
}

void dsgd_round(NetworkState& net, const MixingMatrix& w, const FiniteSumObjective& obj, double alpha) {
  check_method(net, Method::dsgd);
  check_alpha(alpha);
  const Matrix g = sampled_gradients(net, obj, net.theta);
  net.theta = consensus_step(w, net.theta) - alpha * g;
  net.exchanges += 1;
  net.round += 1;
}

void gt_dgd_round(NetworkState& net, const MixingMatrix& w, const FiniteSumObjective& obj, double alpha) {
  check_method(net, Method::gt_dgd);
  check_alpha(alpha);
  net.theta = consensus_step(w, net.theta) - alpha * net.tracker;
  Matrix g = batch_gradients(net, obj, net.theta);
  net.tracker = dac_step(w, net.tracker, g, net.estimate);
  net.estimate = std::move(g);
  net.exchanges += 2;
  net.round += 1;
}

void gt_dsgd_round(NetworkState& net, const MixingMatrix& w, const FiniteSumObjective& obj, double alpha) {
  check_method(net, Method::gt_dsgd);
  check_alpha(alpha);
  net.theta = consensus_step(w, net.theta) - alpha * net.tracker;
  Matrix g = sampled_gradients(net, obj, net.theta);
  net.tracker = dac_step(w, net.tracker, g, net.estimate);
  net.estimate = std::move(g);
  net.exchanges += 2;
  net.round += 1;
}

void gt_saga_round(NetworkState& net, const MixingMatrix& w, const FiniteSumObjective& obj, double alpha) {
  check_method(net, Method::gt_saga);
  check_alpha(alpha);
  net.theta = consensus_step(w, net.theta) - alpha * net.tracker;
  Matrix g(net.theta.rows(), net.theta.cols());
  for (std::size_t i = 0; i < net.nodes(); ++i) {
    const auto s = net.rngs[i].index(obj.components(i));
    Vector fresh = obj.component_gradient(i, s, row_of(net.theta, i));
    g.row(row(i)) = saga_estimate(fresh, net.tables[i], s).transpose();
    net.tables[i].replace(s, std::move(fresh));
    net.evals[i] += 1;
  }
  net.tracker = dac_step(w, net.tracker, g, net.estimate);
  net.estimate = std::move(g);
  net.exchanges += 2;
  net.round += 1;
}

void gt_svrg_outer(NetworkState& net, const MixingMatrix& w, const FiniteSumObjective& obj, double alpha,
                   std::size_t T, SvrgOption option, const InnerObserver& on_inner) {
  check_method(net, Method::gt_svrg);
  check_alpha(alpha);
  if (T == 0) throw ParameterError("GT-SVRG inner loop length must be positive");
  const std::size_t n = net.nodes();

  net.anchor = net.theta;
  net.anchor_grad = batch_gradients(net, obj, net.anchor);

  // Option (c) draws each node's inner index before the loop, so the
  // iterate history need not be stored.
  std::vector<std::size_t> pick(n, T);
  if (option == SvrgOption::random)
    for (std::size_t i = 0; i < n; ++i) pick[i] = net.rngs[i].index(T);

  if (net.svrg_anchor == SvrgAnchor::refresh) {
    Matrix v = svrg_estimates(net, obj, net.anchor);
    net.tracker += v - net.estimate;
    net.estimate = std::move(v);
  }

  Matrix inner = net.anchor;
  Matrix kept = Matrix::Zero(inner.rows(), inner.cols());
  for (std::size_t t = 0; t < T; ++t) {
    if (option == SvrgOption::average) kept += inner;
    for (std::size_t i = 0; i < n; ++i)
      if (pick[i] == t) kept.row(row(i)) = inner.row(row(i));

    inner = consensus_step(w, inner) - alpha * net.tracker;
    const bool last = t + 1 == T;
    if (net.svrg_anchor == SvrgAnchor::refresh && last) {
      // The estimator at the final inner iterate is superseded by the
      // refresh at the next anchor; only the tracker mixes.
      net.tracker = consensus_step(w, net.tracker);
    } else {
      Matrix v = svrg_estimates(net, obj, inner);
      net.tracker = dac_step(w, net.tracker, v, net.estimate);
      net.estimate = std::move(v);
    }
    net.exchanges += 2;
    if (on_inner) on_inner(net);
  }

  switch (option) {
    case SvrgOption::last: net.theta = std::move(inner); break;
    case SvrgOption::average: net.theta = kept / static_cast<double>(T); break;
    case SvrgOption::random: net.theta = std::move(kept); break;
  }
  net.round += 1;
}

Vector node_saga_estimate(const FiniteSumObjective& obj, std::size_t i, std::size_t j, const Vector& theta_i,
                          const GradientTable& table) {
  return saga_estimate(obj.component_gradient(i, j, theta_i), table, j);
}

Vector node_svrg_estimate(const FiniteSumObjective& obj, std::size_t i, std::size_t j, const Vector& theta_i,
                          const Vector& anchor_i, const Vector& anchor_grad_i) {
  return svrg_estimate(obj.component_gradient(i, j, theta_i), obj.component_gradient(i, j, anchor_i),
                       anchor_grad_i);
}

double consensus_error(const NetworkState& net) {
  const Eigen::RowVectorXd mean = net.theta.colwise().mean();
  return (net.theta.rowwise() - mean).squaredNorm() / static_cast<double>(net.nodes());
}

std::optional<double> tracking_error(const NetworkState& net) {
  if (!uses_tracking(net.method)) return std::nullopt;
  const Eigen::RowVectorXd mean = net.estimate.colwise().mean();
  return (net.tracker.rowwise() - mean).squaredNorm() / static_cast<double>(net.nodes());
}

std::optional<double> tracking_gap(const NetworkState& net) {
  if (!uses_tracking(net.method)) return std::nullopt;
  return (net.tracker.colwise().mean() - net.estimate.colwise().mean()).norm();
}

double evals_per_iteration(Method method, std::size_t m_i, std::size_t T) {
  switch (method) {
    case Method::dgd:
    case Method::gt_dgd: return static_cast<double>(m_i);
    case Method::dsgd:
    case Method::gt_dsgd:
    case Method::gt_saga: return 1.0;
    case Method::gt_svrg: return static_cast<double>(m_i + 2 * T);
  }
  return 1.0;
}

}  // namespace gtopt
