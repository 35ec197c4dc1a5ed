#include "gtopt/simulator.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <future>
#include <map>
#include <mutex>
#include <ostream>

#include "gtopt/decentralized.hpp"
#include "gtopt/format.hpp"
#include "gtopt/reference_opt.hpp"

namespace gtopt {

Topology build_topology(const GraphSpec& spec) {
  if (spec.kind == "geometric") return random_geometric(spec.n, spec.radius, spec.seed);
  if (spec.kind == "ring") return ring_graph(spec.n);
  if (spec.kind == "path") return path_graph(spec.n);
  if (spec.kind == "complete") return complete_graph(spec.n);
  if (spec.kind == "file") {
    std::ifstream in(spec.path);
    if (!in) throw IoError("file not found: " + spec.path);
    Topology t = read_edge_list(in);
    if (t.size() != spec.n)
      throw ConfigError("edge list has " + std::to_string(t.size()) + " nodes, graph.n is " + std::to_string(spec.n));
    if (!is_connected(t)) throw ConnectivityError("edge list graph is not connected");
    return t;
  }
  throw ConfigError("unknown graph kind '" + spec.kind + "'");
}

MixingMatrix build_mixing(const Topology& t, const WeightSpec& spec) {
  if (t.size() == 1) return MixingMatrix(Matrix::Ones(1, 1));
  if (spec.rule == "metropolis") return metropolis_weights(t);
  if (spec.rule == "laplacian") return lazy_laplacian_weights(t, spec.eps);
  throw ConfigError("unknown weight rule '" + spec.rule + "'");
}

std::unique_ptr<FiniteSumObjective> build_objective(const ObjectiveSpec& spec, std::size_t nodes) {
  if (spec.kind == "quadratic") {
    QuadraticFixtureSpec q;
    q.nodes = nodes;
    q.per_node = spec.per_node;
    q.dim = spec.dim;
    q.hessian_spread = spec.hessian_spread;
    q.node_spread = spec.node_spread;
    q.noise = spec.noise;
    q.seed = spec.data_seed;
    return std::make_unique<QuadraticObjective>(make_quadratic_fixture(q));
  }
  Dataset data;
  if (spec.source == "csv") {
    data = ingest_dataset(spec.path, parse_label_map(spec.label_map), spec.normalize);
  } else {
    // With one class per node, the larger class fills ceil(n/2) nodes.
    const std::size_t slots = spec.partition == PartitionMode::one_class_per_node && nodes > 1 ? nodes + nodes % 2 : nodes;
    const std::size_t samples = spec.samples ? spec.samples : slots * spec.per_node;
    data = synthetic_two_gaussian(samples, spec.dim, spec.separation, spec.data_seed);
    if (spec.normalize) standardize(data);
  }
  return std::make_unique<LogisticObjective>(
      make_logistic(data, nodes, spec.per_node, spec.partition, spec.partition_seed, spec.lambda_reg));
}

namespace {

// Problems keyed by their graph/weights/objective sections.
class ProblemCache {
 public:
  std::shared_ptr<const Problem> get(const ExperimentConfig& config) {
    const std::string key = problem_key(to_map(config));
    std::lock_guard lock(mutex_);
    auto it = entries_.find(key);
    if (it == entries_.end()) it = entries_.emplace(key, build(config)).first;
    return it->second;
  }

 private:
  static std::shared_ptr<const Problem> build(const ExperimentConfig& config) {
    auto p = std::make_shared<Problem>();
    p->topology = std::make_unique<Topology>(
        config.graph.n == 1 ? Topology(1, {}) : build_topology(config.graph));
    p->mixing = std::make_unique<MixingMatrix>(build_mixing(*p->topology, config.weights));
    p->objective = build_objective(config.objective, config.graph.n);
    p->theta_star = solve_reference(*p->objective);
    return p;
  }

  std::mutex mutex_;
  std::map<std::string, std::shared_ptr<const Problem>> entries_;
};

ProblemCache& cache() {
  static ProblemCache instance;
  return instance;
}

}  // namespace

std::shared_ptr<const Problem> build_problem(const ExperimentConfig& config) { return cache().get(config); }

Matrix initial_iterates(const ExperimentConfig& config, std::size_t nodes, std::size_t dim) {
  Matrix theta = Matrix::Zero(static_cast<Eigen::Index>(nodes), static_cast<Eigen::Index>(dim));
  if (config.init == "random") {
    for (std::size_t i = 0; i < nodes; ++i) {
      Rng rng(config.init_seed, i);
      for (std::size_t c = 0; c < dim; ++c)
        theta(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = config.init_scale * rng.normal();
    }
  }
  return theta;
}

namespace {

// Iterations needed to spend the budget, for the automatic metric cadence.
std::size_t estimated_iterations(const ExperimentConfig& config, const FiniteSumObjective& obj) {
  if (config.rounds > 0) return config.rounds;
  if (config.epochs <= 0.0) return 0;
  double per_iter = 0.0;  // epochs per iteration, averaged over nodes
  if (is_centralized(config.algorithm)) {
    const double N = static_cast<double>(obj.total_components());
    switch (config.algorithm) {
      case Algorithm::gd: per_iter = 1.0; break;
      case Algorithm::svrg: per_iter = (N + 2.0 * static_cast<double>(config.inner_loop)) / N; break;
      default: per_iter = 1.0 / N; break;
    }
  } else {
    for (std::size_t i = 0; i < obj.nodes(); ++i)
      per_iter += evals_per_iteration(to_method(config.algorithm), obj.components(i), config.inner_loop) /
                  static_cast<double>(obj.components(i));
    per_iter /= static_cast<double>(obj.nodes());
  }
  return static_cast<std::size_t>(std::ceil(config.epochs / per_iter));
}

std::size_t cadence(const ExperimentConfig& config, const FiniteSumObjective& obj) {
  if (config.metrics_every > 0) return config.metrics_every;
  const std::size_t iters = estimated_iterations(config, obj);
  constexpr std::size_t kMaxRecords = 10000;
  return iters <= kMaxRecords ? 1 : (iters + kMaxRecords - 1) / kMaxRecords;
}

struct Driver {
  std::function<void(std::size_t)> step;
  std::function<TraceRecord()> snapshot;
};

Trace drive(const ExperimentConfig& config, const FiniteSumObjective& obj, Driver d) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  const std::size_t every = cadence(config, obj);
  auto record = [&](std::size_t round) {
    TraceRecord r = d.snapshot();
    r.round = round;
    r.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    return r;
  };

  Trace trace{record(0)};
  double epochs = trace.back().epochs;
  std::size_t k = 0;
  for (;; ++k) {
    if (config.rounds > 0) {
      if (k >= config.rounds) break;
    } else if (config.epochs > 0.0) {
      if (epochs >= config.epochs) break;
    } else {
      break;
    }
    d.step(k);
    const bool due = (k + 1) % every == 0;
    if (due || config.epochs > 0.0) {
      TraceRecord r = record(k + 1);
      epochs = r.epochs;
      if (due) trace.push_back(std::move(r));
      else if (epochs >= config.epochs) trace.push_back(std::move(r));
    }
  }
  if (trace.back().round != k) trace.push_back(record(k));
  return trace;
}

Trace run_centralized(const ExperimentConfig& config, const Problem& problem) {
  const auto& obj = *problem.objective;
  const double N = static_cast<double>(obj.total_components());
  const StepSchedule schedule = config.schedule();
  Vector theta = initial_iterates(config, 1, obj.dim()).row(0).transpose();
  Rng rng(config.master_seed, 0);
  GradientTable table;
  std::size_t evals = 0;
  if (config.algorithm == Algorithm::saga) {
    table = saga_table(obj, theta);
    evals += obj.total_components();
  }

  Driver d;
  d.step = [&](std::size_t k) {
    const double alpha = schedule(k);
    switch (config.algorithm) {
      case Algorithm::gd:
        theta -= alpha * obj.global_gradient(theta);
        evals += obj.total_components();
        break;
      case Algorithm::sgd:
        theta = sgd_step(obj, theta, alpha, rng);
        evals += 1;
        break;
      case Algorithm::saga:
        theta = saga_step(obj, theta, table, alpha, rng);
        evals += 1;
        break;
      case Algorithm::svrg:
        theta = svrg_outer(obj, theta, alpha, config.inner_loop, *config.svrg_option, rng);
        evals += obj.total_components() + 2 * config.inner_loop;
        break;
      default: break;
    }
    check_divergence(theta, k + 1);
  };
  d.snapshot = [&] {
    TraceRecord r;
    r.epochs = static_cast<double>(evals) / N;
    r.avg_residual = (theta - problem.theta_star).squaredNorm();
    r.consensus_error = 0.0;
    r.grad_evals = evals;
    return r;
  };
  return drive(config, obj, std::move(d));
}

Trace run_decentralized(const ExperimentConfig& config, const Problem& problem) {
  const auto& obj = *problem.objective;
  const auto& w = *problem.mixing;
  const Method method = to_method(config.algorithm);
  const StepSchedule schedule = config.schedule();
  NetworkState net = initialize(method, obj, initial_iterates(config, obj.nodes(), obj.dim()), config.master_seed,
                                config.svrg_anchor);
  const Eigen::RowVectorXd star = problem.theta_star.transpose();
  const double n = static_cast<double>(obj.nodes());

  Driver d;
  d.step = [&](std::size_t k) {
    const double alpha = schedule(k);
    switch (method) {
      case Method::dgd: dgd_round(net, w, obj, alpha); break;
      case Method::dsgd: dsgd_round(net, w, obj, alpha); break;
      case Method::gt_dgd: gt_dgd_round(net, w, obj, alpha); break;
      case Method::gt_dsgd: gt_dsgd_round(net, w, obj, alpha); break;
      case Method::gt_saga: gt_saga_round(net, w, obj, alpha); break;
      case Method::gt_svrg: gt_svrg_outer(net, w, obj, alpha, config.inner_loop, *config.svrg_option); break;
    }
    check_divergence(net.theta, k + 1);
  };
  d.snapshot = [&] {
    TraceRecord r;
    double epochs = 0.0;
    for (std::size_t i = 0; i < obj.nodes(); ++i)
      epochs += static_cast<double>(net.evals[i]) / static_cast<double>(obj.components(i));
    r.epochs = epochs / n;
    r.avg_residual = (net.theta.rowwise() - star).squaredNorm() / n;
    r.consensus_error = consensus_error(net);
    r.tracking_error = tracking_error(net);
    r.grad_evals = net.total_evals();
    return r;
  };
  return drive(config, obj, std::move(d));
}

}  // namespace

ExperimentConfig resolve_method_defaults(const ExperimentConfig& config, const FiniteSumObjective& obj) {
  ExperimentConfig c = config;
  const bool svrg = c.algorithm == Algorithm::svrg;
  const bool gt_svrg = c.algorithm == Algorithm::gt_svrg;
  const Curvature curv = obj.curvature();
  if (c.inner_loop == 0) {
    if (svrg) c.inner_loop = static_cast<std::size_t>(std::ceil(50.0 * curv.L / curv.mu));
    if (gt_svrg) c.inner_loop = 10;
  }
  if (!c.svrg_option) c.svrg_option = svrg ? SvrgOption::average : SvrgOption::last;
  if (c.schedule_kind == "constant" && c.alpha == 0.0) {
    if (c.algorithm == Algorithm::saga) c.alpha = 1.0 / (3.0 * curv.L);
    if (svrg) c.alpha = 1.0 / (10.0 * curv.L);
  }
  return c;
}

Trace run_experiment(const ExperimentConfig& config, const Problem& problem) {
  const ExperimentConfig c = resolve_method_defaults(config, *problem.objective);
  if (is_centralized(c.algorithm)) return run_centralized(c, problem);
  return run_decentralized(c, problem);
}

Trace run_experiment(const ExperimentConfig& config) { return run_experiment(config, *build_problem(config)); }

Comparison compare_experiments(const std::vector<std::pair<std::string, ExperimentConfig>>& configs,
                               std::size_t grid_points) {
  if (configs.empty()) throw ConfigError("comparison needs at least one experiment");
  if (grid_points < 2) throw ParameterError("comparison grid needs at least two points");
  const std::string key = problem_key(to_map(configs.front().second));
  for (const auto& [name, c] : configs)
    if (problem_key(to_map(c)) != key)
      throw ConfigError("comparison member '" + name + "' uses a different graph, weights or objective");

  const auto problem = build_problem(configs.front().second);
  std::vector<std::future<Trace>> jobs;
  for (const auto& [name, c] : configs)
    jobs.push_back(std::async(std::launch::async, [&problem, c = c] { return run_experiment(c, *problem); }));

  Comparison cmp;
  for (std::size_t m = 0; m < configs.size(); ++m) {
    cmp.names.push_back(configs[m].first);
    cmp.traces.push_back(jobs[m].get());
  }

  double horizon = cmp.traces.front().back().epochs;
  for (const auto& t : cmp.traces) horizon = std::min(horizon, t.back().epochs);
  for (std::size_t g = 0; g < grid_points; ++g)
    cmp.epochs.push_back(horizon * static_cast<double>(g) / static_cast<double>(grid_points - 1));
  for (const auto& t : cmp.traces) {
    std::vector<double> col;
    std::size_t at = 0;
    for (double e : cmp.epochs) {
      while (at + 1 < t.size() && t[at + 1].epochs <= e) ++at;
      col.push_back(t[at].avg_residual);
    }
    cmp.residuals.push_back(std::move(col));
  }
  return cmp;
}

void write_trace_csv(std::ostream& out, const Trace& trace) {
  out << kTraceHeader << '\n';
  for (const auto& r : trace) {
    out << r.round << ',' << format_double(r.epochs) << ',' << format_double(r.avg_residual) << ','
        << format_double(r.consensus_error) << ',';
    if (r.tracking_error) out << format_double(*r.tracking_error);
    out << ',' << r.grad_evals << '\n';
  }
}

void write_comparison_csv(std::ostream& out, const Comparison& cmp) {
  out << "epochs";
  for (const auto& n : cmp.names) out << ',' << n;
  out << '\n';
  for (std::size_t g = 0; g < cmp.epochs.size(); ++g) {
    out << format_double(cmp.epochs[g]);
    for (const auto& col : cmp.residuals) out << ',' << format_double(col[g]);
    out << '\n';
  }
}

}  // namespace gtopt
