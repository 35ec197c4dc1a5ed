#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gtopt/config.hpp"
#include "gtopt/mixing.hpp"
#include "gtopt/objectives.hpp"
#include "gtopt/topology.hpp"

namespace gtopt {

/// Metrics of one recorded round.
struct TraceRecord {
  std::size_t round = 0;
  double epochs = 0.0;        ///< mean over nodes of evals_i / m_i
  double avg_residual = 0.0;  ///< (1/n) sum_i ||theta_i - theta*||^2
  double consensus_error = 0.0;
  std::optional<double> tracking_error;
  std::size_t grad_evals = 0;  ///< cumulative over all nodes
  double wall_seconds = 0.0;   ///< informational only, never written to CSV
};

using Trace = std::vector<TraceRecord>;

/// Problem instance shared by every experiment with the same graph, weights
/// and objective sections.
struct Problem {
  std::unique_ptr<Topology> topology;
  std::unique_ptr<MixingMatrix> mixing;
  std::unique_ptr<FiniteSumObjective> objective;
  Vector theta_star;
};

Topology build_topology(const GraphSpec& spec);
MixingMatrix build_mixing(const Topology& t, const WeightSpec& spec);
std::unique_ptr<FiniteSumObjective> build_objective(const ObjectiveSpec& spec, std::size_t nodes);

/// Builds the instance and its reference minimizer. The minimizer is
/// memoised per problem key, so compared runs share one theta*.
std::shared_ptr<const Problem> build_problem(const ExperimentConfig& config);

/// Fills the method-dependent defaults left unset in the config: SAGA step
/// 1/(3L), SVRG step 1/(10L), SVRG inner loop ceil(50 kappa) and averaged
/// output, GT-SVRG inner loop 10 and last-iterate output. Curvature bounds
/// stand in for exact constants where only bounds are known.
ExperimentConfig resolve_method_defaults(const ExperimentConfig& config, const FiniteSumObjective& obj);

/// Initial stacked iterates (zero, or N(0, scale^2) per coordinate from the
/// init seed).
Matrix initial_iterates(const ExperimentConfig& config, std::size_t nodes, std::size_t dim);

/// Runs one experiment; the trace is fully determined by the config.
/// DivergenceError carries the offending round.
Trace run_experiment(const ExperimentConfig& config);
Trace run_experiment(const ExperimentConfig& config, const Problem& problem);

/// Traces of several experiments on one problem, sampled on a common epoch
/// grid (step interpolation: the last record at or before each grid point).
struct Comparison {
  std::vector<std::string> names;
  std::vector<Trace> traces;
  std::vector<double> epochs;
  std::vector<std::vector<double>> residuals;  ///< residuals[member][grid point]
};

/// Throws ConfigError when the members disagree on graph, weights or objective.
Comparison compare_experiments(const std::vector<std::pair<std::string, ExperimentConfig>>& configs,
                               std::size_t grid_points = 200);

inline constexpr const char* kTraceHeader = "round,epochs,avg_residual,consensus_error,tracking_error,grad_evals";

void write_trace_csv(std::ostream& out, const Trace& trace);
void write_comparison_csv(std::ostream& out, const Comparison& cmp);

}  // namespace gtopt
