#include "gtopt/config.hpp"

#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "gtopt/format.hpp"

namespace gtopt {

const ConfigMap& config_defaults() {
  static const ConfigMap defaults = [] {
    return to_map(ExperimentConfig{});
  }();
  return defaults;
}

namespace {

void check_known(const std::string& key) {
  if (!config_defaults().count(key)) throw ConfigError("unknown config key '" + key + "'");
}

constexpr std::string_view kMemberPrefix = "compare.";

}  // namespace

ConfigFile parse_config(std::istream& in) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }
  ConfigFile file;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError("key '" + section + "' outside any section");
    if (section.rfind(kMemberPrefix, 0) == 0) {
      ConfigMap member;
      for (const auto& [key, value] : body) {
        check_known(key);
        member[key] = value.data();
      }
      file.members.emplace_back(section.substr(kMemberPrefix.size()), std::move(member));
      continue;
    }
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      check_known(full);
      file.base[full] = value.data();
    }
  }
  return file;
}

ConfigFile load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("file not found: " + path);
  return parse_config(in);
}

void apply_overrides(ConfigMap& map, const std::vector<std::string>& overrides) {
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + o + "' is not key=value");
    const std::string key = o.substr(0, eq);
    check_known(key);
    map[key] = o.substr(eq + 1);
  }
}

Algorithm parse_algorithm(const std::string& s) {
  static const std::map<std::string, Algorithm> names{
      {"dgd", Algorithm::dgd},         {"dsgd", Algorithm::dsgd},     {"gt-dgd", Algorithm::gt_dgd},
      {"gt-dsgd", Algorithm::gt_dsgd}, {"gt-saga", Algorithm::gt_saga}, {"gt-svrg", Algorithm::gt_svrg},
      {"gd", Algorithm::gd},           {"sgd", Algorithm::sgd},       {"saga", Algorithm::saga},
      {"svrg", Algorithm::svrg}};
  auto it = names.find(s);
  if (it == names.end()) throw ConfigError("unknown algorithm id '" + s + "'");
  return it->second;
}

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::gd: return "gd";
    case Algorithm::sgd: return "sgd";
    case Algorithm::saga: return "saga";
    case Algorithm::svrg: return "svrg";
    default: return to_string(to_method(a));
  }
}

bool is_centralized(Algorithm a) {
  return a == Algorithm::gd || a == Algorithm::sgd || a == Algorithm::saga || a == Algorithm::svrg;
}

Method to_method(Algorithm a) {
  switch (a) {
    case Algorithm::dgd: return Method::dgd;
    case Algorithm::dsgd: return Method::dsgd;
    case Algorithm::gt_dgd: return Method::gt_dgd;
    case Algorithm::gt_dsgd: return Method::gt_dsgd;
    case Algorithm::gt_saga: return Method::gt_saga;
    case Algorithm::gt_svrg: return Method::gt_svrg;
    default: throw ParameterError(to_string(a) + " is a centralized method");
  }
}

StepSchedule ExperimentConfig::schedule() const {
  if (schedule_kind == "constant") return StepSchedule::constant(alpha);
  if (schedule_kind == "harmonic") return StepSchedule::harmonic(harmonic_scale, harmonic_offset);
  throw ConfigError("unknown schedule kind '" + schedule_kind + "'");
}

namespace {

std::string str(double v) { return format_double(v); }
std::string str(std::size_t v) { return std::to_string(v); }
std::string str(std::uint64_t v, int) { return std::to_string(v); }
std::string str(bool v) { return v ? "true" : "false"; }

class Reader {
 public:
  explicit Reader(const ConfigMap& map) : map_(map) {}

  const std::string& text(const std::string& key) const {
    auto it = map_.find(key);
    if (it == map_.end()) throw ConfigError("missing config key '" + key + "'");
    return it->second;
  }

  double real(const std::string& key) const {
    try {
      return parse_double(text(key));
    } catch (const IoError&) {
      throw ConfigError("config key '" + key + "' expects a number, got '" + text(key) + "'");
    }
  }

  std::uint64_t integer(const std::string& key) const {
    const auto& s = text(key);
    std::uint64_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
      throw ConfigError("config key '" + key + "' expects a non-negative integer, got '" + s + "'");
    return v;
  }

  std::size_t count(const std::string& key) const { return static_cast<std::size_t>(integer(key)); }

  bool flag(const std::string& key) const {
    const auto& s = text(key);
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError("config key '" + key + "' expects true/false, got '" + s + "'");
  }

  std::string choice(const std::string& key, std::initializer_list<const char*> allowed) const {
    const auto& s = text(key);
    for (const char* a : allowed)
      if (s == a) return s;
    throw ConfigError("config key '" + key + "' has invalid value '" + s + "'");
  }

 private:
  const ConfigMap& map_;
};

}  // namespace

ConfigMap to_map(const ExperimentConfig& c) {
  return {
      {"graph.kind", c.graph.kind},
      {"graph.n", str(c.graph.n)},
      {"graph.radius", str(c.graph.radius)},
      {"graph.seed", str(c.graph.seed, 0)},
      {"graph.path", c.graph.path},
      {"weights.rule", c.weights.rule},
      {"weights.eps", str(c.weights.eps)},
      {"objective.kind", c.objective.kind},
      {"objective.source", c.objective.source},
      {"objective.path", c.objective.path},
      {"objective.label_map", c.objective.label_map},
      {"objective.normalize", str(c.objective.normalize)},
      {"objective.samples", str(c.objective.samples)},
      {"objective.dim", str(c.objective.dim)},
      {"objective.separation", str(c.objective.separation)},
      {"objective.data_seed", str(c.objective.data_seed, 0)},
      {"objective.per_node", str(c.objective.per_node)},
      {"objective.partition", to_string(c.objective.partition)},
      {"objective.partition_seed", str(c.objective.partition_seed, 0)},
      {"objective.lambda_reg", str(c.objective.lambda_reg)},
      {"objective.hessian_spread", str(c.objective.hessian_spread)},
      {"objective.node_spread", str(c.objective.node_spread)},
      {"objective.noise", str(c.objective.noise)},
      {"algorithm.id", to_string(c.algorithm)},
      {"algorithm.inner_loop", str(c.inner_loop)},
      {"algorithm.option", c.svrg_option ? to_string(*c.svrg_option) : "auto"},
      {"algorithm.svrg_anchor", to_string(c.svrg_anchor)},
      {"schedule.kind", c.schedule_kind},
      {"schedule.alpha", str(c.alpha)},
      {"schedule.scale", str(c.harmonic_scale)},
      {"schedule.offset", str(c.harmonic_offset)},
      {"budget.rounds", str(c.rounds)},
      {"budget.epochs", str(c.epochs)},
      {"metrics.every", str(c.metrics_every)},
      {"init.mode", c.init},
      {"init.scale", str(c.init_scale)},
      {"init.seed", str(c.init_seed, 0)},
      {"seeds.master", str(c.master_seed, 0)},
  };
}

ConfigMap with_defaults(const ConfigMap& map) {
  ConfigMap full = config_defaults();
  for (const auto& [k, v] : map) {
    check_known(k);
    full[k] = v;
  }
  return full;
}

ExperimentConfig to_experiment(const ConfigMap& partial) {
  const ConfigMap map = with_defaults(partial);
  const Reader r(map);
  ExperimentConfig c;
  c.graph.kind = r.choice("graph.kind", {"geometric", "ring", "path", "complete", "file"});
  c.graph.n = r.count("graph.n");
  c.graph.radius = r.real("graph.radius");
  c.graph.seed = r.integer("graph.seed");
  c.graph.path = r.text("graph.path");
  if (c.graph.n == 0) throw ConfigError("graph.n must be positive");
  if (c.graph.kind == "file" && c.graph.path.empty()) throw ConfigError("graph.kind=file needs graph.path");

  c.weights.rule = r.choice("weights.rule", {"metropolis", "laplacian"});
  c.weights.eps = r.real("weights.eps");

  auto& o = c.objective;
  o.kind = r.choice("objective.kind", {"logistic", "quadratic"});
  o.source = r.choice("objective.source", {"synthetic", "csv"});
  o.path = r.text("objective.path");
  o.label_map = r.text("objective.label_map");
  o.normalize = r.flag("objective.normalize");
  o.samples = r.count("objective.samples");
  o.dim = r.count("objective.dim");
  o.separation = r.real("objective.separation");
  o.data_seed = r.integer("objective.data_seed");
  o.per_node = r.count("objective.per_node");
  o.partition = parse_partition_mode(r.text("objective.partition"));
  o.partition_seed = r.integer("objective.partition_seed");
  o.lambda_reg = r.real("objective.lambda_reg");
  o.hessian_spread = r.real("objective.hessian_spread");
  o.node_spread = r.real("objective.node_spread");
  o.noise = r.real("objective.noise");
  if (o.source == "csv" && o.path.empty()) throw ConfigError("objective.source=csv needs objective.path");
  if (o.dim == 0) throw ConfigError("objective.dim must be positive");
  if (o.per_node == 0) throw ConfigError("objective.per_node must be positive");

  c.algorithm = parse_algorithm(r.text("algorithm.id"));
  c.inner_loop = r.count("algorithm.inner_loop");
  if (r.text("algorithm.option") != "auto") c.svrg_option = parse_svrg_option(r.text("algorithm.option"));
  c.svrg_anchor = parse_svrg_anchor(r.text("algorithm.svrg_anchor"));

  c.schedule_kind = r.choice("schedule.kind", {"constant", "harmonic"});
  c.alpha = r.real("schedule.alpha");
  c.harmonic_scale = r.real("schedule.scale");
  c.harmonic_offset = r.real("schedule.offset");

  c.rounds = r.count("budget.rounds");
  c.epochs = r.real("budget.epochs");
  if (c.epochs < 0.0) throw ConfigError("budget.epochs must be non-negative");
  if (c.rounds > 0 && c.epochs > 0.0) throw ConfigError("set budget.rounds or budget.epochs, not both");
  c.metrics_every = r.count("metrics.every");

  c.init = r.choice("init.mode", {"zero", "random"});
  c.init_scale = r.real("init.scale");
  c.init_seed = r.integer("init.seed");
  c.master_seed = r.integer("seeds.master");
  return c;
}

std::string problem_key(const ConfigMap& partial) {
  const ConfigMap map = with_defaults(partial);
  std::string key;
  for (const auto& [k, v] : map)
    if (k.rfind("graph.", 0) == 0 || k.rfind("weights.", 0) == 0 || k.rfind("objective.", 0) == 0)
      key += k + "=" + v + "\n";
  return key;
}

}  // namespace gtopt
