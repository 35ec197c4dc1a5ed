#include "gtopt/cli.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>

#include <CLI11.hpp>

#include "gtopt/config.hpp"
#include "gtopt/dataset.hpp"
#include "gtopt/format.hpp"
#include "gtopt/simulator.hpp"

namespace gtopt {

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config;
  std::string out_dir = "out";
  std::vector<std::string> overrides;
  // gen-graph / gen-data flags; empty means "take it from the config".
  std::string n, radius, seed, kind, rule, eps;
  std::string samples, dim, separation;
};

ConfigMap assemble(const Options& o) {
  ConfigMap map;
  if (!o.config.empty()) {
    ConfigFile file = load_config(o.config);
    map = std::move(file.base);
  }
  apply_overrides(map, o.overrides);
  return map;
}

std::ofstream open_output(const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream f(dir / name);
  if (!f) throw IoError("cannot write " + (dir / name).string());
  return f;
}

void gen_graph(const Options& o, std::ostream& out) {
  ConfigMap map = assemble(o);
  if (!o.n.empty()) map["graph.n"] = o.n;
  if (!o.radius.empty()) map["graph.radius"] = o.radius;
  if (!o.seed.empty()) map["graph.seed"] = o.seed;
  if (!o.kind.empty()) map["graph.kind"] = o.kind;
  if (!o.rule.empty()) map["weights.rule"] = o.rule;
  if (!o.eps.empty()) map["weights.eps"] = o.eps;
  const auto full = with_defaults(map);
  const ExperimentConfig c = to_experiment(full);
  const Topology t = build_topology(c.graph);
  const MixingMatrix w = build_mixing(t, c.weights);

  auto edges = open_output(o.out_dir, "graph.txt");
  write_edge_list(edges, t);
  auto weights = open_output(o.out_dir, "weights.csv");
  write_matrix_csv(weights, w.weights());
  if (!t.coordinates().empty()) {
    auto coords = open_output(o.out_dir, "coords.csv");
    coords << "node,x,y\n";
    for (std::size_t i = 0; i < t.size(); ++i)
      coords << i << ',' << format_double(t.coordinates()[i].first) << ','
             << format_double(t.coordinates()[i].second) << '\n';
  }
  out << "nodes=" << t.size() << " edges=" << t.edges().size() << " lambda=" << format_double(w.lambda())
      << '\n';
}

void gen_data(const Options& o, std::ostream& out) {
  ConfigMap map = assemble(o);
  if (!o.samples.empty()) map["objective.samples"] = o.samples;
  if (!o.dim.empty()) map["objective.dim"] = o.dim;
  if (!o.separation.empty()) map["objective.separation"] = o.separation;
  if (!o.seed.empty()) map["objective.data_seed"] = o.seed;
  const ExperimentConfig c = to_experiment(map);
  const std::size_t samples = c.objective.samples ? c.objective.samples : c.graph.n * c.objective.per_node;
  const Dataset data = synthetic_two_gaussian(samples, c.objective.dim, c.objective.separation, c.objective.data_seed);
  auto f = open_output(o.out_dir, "data.csv");
  write_dataset_csv(f, data);
  out << "samples=" << data.size() << " dim=" << data.dim() << '\n';
}

void solve_ref(const Options& o, std::ostream& out) {
  const ExperimentConfig c = to_experiment(assemble(o));
  const auto problem = build_problem(c);
  const auto& obj = *problem->objective;
  const Vector probe = initial_iterates(c, 1, obj.dim()).row(0).transpose();
  const ObjectiveStats stats = estimate_stats(obj, problem->theta_star, probe);

  auto f = open_output(o.out_dir, "theta_star.csv");
  for (double v : problem->theta_star) f << format_double(v) << '\n';
  auto s = open_output(o.out_dir, "stats.txt");
  s << "mu=" << format_double(stats.mu) << '\n'
    << "L=" << format_double(stats.L) << '\n'
    << "kappa=" << format_double(stats.kappa) << '\n'
    << "curvature=" << (stats.exact_curvature ? "exact" : "bound") << '\n'
    << "sigma_sq_at_init=" << format_double(stats.sigma_sq) << '\n'
    << "b=" << format_double(stats.b) << '\n'
    << "lambda=" << format_double(problem->mixing->lambda()) << '\n'
    << "grad_norm=" << format_double(obj.global_gradient(problem->theta_star).norm()) << '\n';
  out << "dim=" << obj.dim() << " grad_norm=" << format_double(obj.global_gradient(problem->theta_star).norm())
      << '\n';
}

void run(const Options& o, std::ostream& out) {
  const ExperimentConfig c = to_experiment(assemble(o));
  const Trace trace = run_experiment(c);
  auto f = open_output(o.out_dir, "trace.csv");
  write_trace_csv(f, trace);
  out << "records=" << trace.size() << " final_residual=" << format_double(trace.back().avg_residual) << '\n';
}

void compare(const Options& o, std::ostream& out) {
  if (o.config.empty()) throw ConfigError("compare needs --config");
  ConfigFile file = load_config(o.config);
  if (file.members.empty()) throw ConfigError("compare config declares no [compare.<name>] sections");
  std::vector<std::pair<std::string, ExperimentConfig>> configs;
  for (const auto& [name, member] : file.members) {
    ConfigMap map = file.base;
    for (const auto& [k, v] : member) map[k] = v;
    apply_overrides(map, o.overrides);
    configs.emplace_back(name, to_experiment(map));
  }
  const Comparison cmp = compare_experiments(configs);
  for (std::size_t m = 0; m < cmp.names.size(); ++m) {
    auto f = open_output(o.out_dir, cmp.names[m] + ".csv");
    write_trace_csv(f, cmp.traces[m]);
    out << cmp.names[m] << ": final_residual=" << format_double(cmp.traces[m].back().avg_residual)
        << " epochs=" << format_double(cmp.traces[m].back().epochs) << '\n';
  }
  auto f = open_output(o.out_dir, "aligned.csv");
  write_comparison_csv(f, cmp);
}

std::string one_line(std::string s) {
  for (auto& ch : s)
    if (ch == '\n' || ch == '\r') ch = ' ';
  return s;
}

}  // namespace

int parse_and_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Decentralized stochastic optimization with gradient tracking", "gtopt"};
  app.require_subcommand(1);
  Options o;

  auto common = [&o](CLI::App* sub) {
    sub->add_option("--config", o.config, "Config file");
    sub->add_option("--out", o.out_dir, "Output directory");
    sub->add_option("--set", o.overrides, "Override, section.key=value (repeatable)");
  };
  auto* graph = app.add_subcommand("gen-graph", "Generate a graph and its weight matrix");
  common(graph);
  graph->add_option("--n", o.n, "Node count");
  graph->add_option("--radius", o.radius, "Connection radius");
  graph->add_option("--seed", o.seed, "Graph seed");
  graph->add_option("--kind", o.kind, "geometric | ring | path | complete");
  graph->add_option("--weights", o.rule, "metropolis | laplacian");
  graph->add_option("--eps", o.eps, "Laplacian step");
  auto* data = app.add_subcommand("gen-data", "Generate a synthetic two-Gaussian dataset");
  common(data);
  data->add_option("--samples", o.samples, "Sample count");
  data->add_option("--dim", o.dim, "Feature dimension");
  data->add_option("--separation", o.separation, "Distance between class means");
  data->add_option("--seed", o.seed, "Data seed");
  auto* ref = app.add_subcommand("solve-ref", "Solve for the reference minimizer");
  common(ref);
  auto* runner = app.add_subcommand("run", "Run one experiment and write its trace");
  common(runner);
  auto* cmp = app.add_subcommand("compare", "Run the experiments of a comparison config");
  common(cmp);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: usage: " << one_line(e.what()) << '\n';
    return kExitValidation;
  }

  try {
    if (*graph) gen_graph(o, out);
    else if (*data) gen_data(o, out);
    else if (*ref) solve_ref(o, out);
    else if (*runner) run(o, out);
    else if (*cmp) compare(o, out);
    return kExitOk;
  } catch (const IoError& e) {
    err << "error: io: " << one_line(e.what()) << '\n';
    return kExitValidation;
  } catch (const ConfigError& e) {
    err << "error: config: " << one_line(e.what()) << '\n';
    return kExitValidation;
  } catch (const ParameterError& e) {
    err << "error: parameter: " << one_line(e.what()) << '\n';
    return kExitValidation;
  } catch (const PartitionError& e) {
    err << "error: partition: " << one_line(e.what()) << '\n';
    return kExitValidation;
  } catch (const DivergenceError& e) {
    err << "error: divergence: " << one_line(e.what()) << '\n';
    return kExitRuntime;
  } catch (const ConnectivityError& e) {
    err << "error: connectivity: " << one_line(e.what()) << '\n';
    return kExitRuntime;
  } catch (const SolverError& e) {
    err << "error: solver: " << one_line(e.what()) << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: runtime: " << one_line(e.what()) << '\n';
    return kExitRuntime;
  }
}

}  // namespace gtopt
