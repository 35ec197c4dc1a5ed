#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gtopt/dataset.hpp"
#include "gtopt/decentralized.hpp"
#include "gtopt/reference_opt.hpp"

namespace gtopt {

/// Flat dotted-key view of a configuration ("graph.n" -> "100").
using ConfigMap = std::map<std::string, std::string>;

/// Every recognised key with its default value.
const ConfigMap& config_defaults();

/// A config file: base keys plus optional named comparison members, each a
/// set of dotted overrides applied on top of the base.
struct ConfigFile {
  ConfigMap base;
  std::vector<std::pair<std::string, ConfigMap>> members;
};

/// INI-style text: [section] headers, key = value lines, '#' or ';'
/// comments. Sections named compare.<name> declare comparison members.
/// Unknown keys raise ConfigError.
ConfigFile parse_config(std::istream& in);
ConfigFile load_config(const std::string& path);

/// Applies "section.key=value" overrides; unknown keys raise ConfigError.
void apply_overrides(ConfigMap& map, const std::vector<std::string>& overrides);

enum class Algorithm { dgd, dsgd, gt_dgd, gt_dsgd, gt_saga, gt_svrg, gd, sgd, saga, svrg };

Algorithm parse_algorithm(const std::string& s);
std::string to_string(Algorithm a);
bool is_centralized(Algorithm a);
Method to_method(Algorithm a);

struct GraphSpec {
  std::string kind = "geometric";  ///< geometric | ring | path | complete | file
  std::size_t n = 100;
  double radius = 0.25;
  std::uint64_t seed = 1;
  std::string path;
};

struct WeightSpec {
  std::string rule = "metropolis";  ///< metropolis | laplacian
  double eps = 0.0;
};

struct ObjectiveSpec {
  std::string kind = "logistic";  ///< logistic | quadratic
  std::string source = "synthetic";  ///< synthetic | csv
  std::string path;
  std::string label_map;
  bool normalize = true;
  std::size_t samples = 0;  ///< synthetic sample count; 0 means enough to fill every node
  std::size_t dim = 20;
  double separation = 2.0;
  std::uint64_t data_seed = 1;
  std::size_t per_node = 10;
  PartitionMode partition = PartitionMode::one_class_per_node;
  std::uint64_t partition_seed = 1;
  double lambda_reg = 0.0;  ///< <= 0 selects 1 / N
  double hessian_spread = 0.3;
  double node_spread = 5.0;
  double noise = 0.5;
};

struct ExperimentConfig {
  GraphSpec graph;
  WeightSpec weights;
  ObjectiveSpec objective;
  Algorithm algorithm = Algorithm::gt_saga;
  std::size_t inner_loop = 0;             ///< 0: 50 kappa for SVRG, 10 for GT-SVRG
  std::optional<SvrgOption> svrg_option;  ///< unset: average for SVRG, last for GT-SVRG
  SvrgAnchor svrg_anchor = SvrgAnchor::carry;
  std::string schedule_kind = "constant";  ///< constant | harmonic
  double alpha = 0.0;  ///< 0: 1/(3L) for SAGA, 1/(10L) for SVRG, otherwise required
  double harmonic_scale = 1.0;
  double harmonic_offset = 1.0;
  std::size_t rounds = 0;
  double epochs = 0.0;
  std::size_t metrics_every = 0;  ///< 0 selects the automatic cadence
  std::string init = "zero";      ///< zero | random
  double init_scale = 1.0;
  std::uint64_t init_seed = 1;
  std::uint64_t master_seed = 1;

  StepSchedule schedule() const;
};

/// Canonical key map of a config (inverse of to_experiment).
ConfigMap to_map(const ExperimentConfig& config);

/// Validates and converts a key map (defaults filled in for missing keys).
ExperimentConfig to_experiment(const ConfigMap& map);

/// Canonical "key=value" lines for the keys that determine the problem
/// instance (graph, weights, objective).
std::string problem_key(const ConfigMap& map);

ConfigMap with_defaults(const ConfigMap& map);

}  // namespace gtopt
