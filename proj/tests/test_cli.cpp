#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gtopt/cli.hpp"

using namespace gtopt;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = parse_and_dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("gtopt_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("gen-graph writes edges, weights and coordinates") {
  const auto dir = scratch("graph");
  const auto r = cli({"gen-graph", "--n", "20", "--radius", "0.5", "--seed", "3", "--out", dir.string()});
  CHECK(r.code == kExitOk);
  CHECK(fs::exists(dir / "graph.txt"));
  CHECK(fs::exists(dir / "weights.csv"));
  CHECK(fs::exists(dir / "coords.csv"));
  CHECK(slurp(dir / "graph.txt").rfind("20\n", 0) == 0);

  const auto bad = cli({"gen-graph", "--n", "8", "--radius", "0.0001", "--out", dir.string()});
  CHECK(bad.code == kExitRuntime);
  CHECK(bad.err.rfind("error: ", 0) == 0);

  const auto eps = cli({"gen-graph", "--kind", "ring", "--n", "4", "--weights", "laplacian", "--eps", "0.5", "--out",
                        dir.string()});
  CHECK(eps.code == kExitValidation);
}

TEST_CASE("gen-graph reruns are byte identical") {
  const auto a = scratch("graph_a");
  const auto b = scratch("graph_b");
  CHECK(cli({"gen-graph", "--n", "100", "--radius", "0.25", "--seed", "7", "--out", a.string()}).code == kExitOk);
  CHECK(cli({"gen-graph", "--n", "100", "--radius", "0.25", "--seed", "7", "--out", b.string()}).code == kExitOk);
  CHECK(slurp(a / "graph.txt") == slurp(b / "graph.txt"));
  CHECK(slurp(a / "weights.csv") == slurp(b / "weights.csv"));
}

TEST_CASE("gen-data and solve-ref") {
  const auto dir = scratch("data");
  CHECK(cli({"gen-data", "--samples", "40", "--dim", "3", "--out", dir.string()}).code == kExitOk);
  CHECK(fs::exists(dir / "data.csv"));
  const auto r = cli({"solve-ref", "--out", dir.string(), "--set", "graph.n=4", "--set", "objective.per_node=10",
                      "--set", "objective.source=csv", "--set", "objective.path=" + (dir / "data.csv").string(),
                      "--set", "objective.dim=3"});
  CHECK(r.code == kExitOk);
  CHECK(fs::exists(dir / "theta_star.csv"));
  CHECK(fs::exists(dir / "stats.txt"));
}

TEST_CASE("run writes a deterministic trace") {
  const auto a = scratch("run_a");
  const auto b = scratch("run_b");
  const std::vector<std::string> common = {"--set", "graph.kind=ring",       "--set", "graph.n=5",
                                           "--set", "objective.kind=quadratic", "--set", "algorithm.id=gt-saga",
                                           "--set", "schedule.alpha=0.02",    "--set", "budget.epochs=10"};
  auto args_a = common;
  args_a.insert(args_a.begin(), {"run", "--out", a.string()});
  auto args_b = common;
  args_b.insert(args_b.begin(), {"run", "--out", b.string()});
  CHECK(cli(args_a).code == kExitOk);
  CHECK(cli(args_b).code == kExitOk);
  const auto text = slurp(a / "trace.csv");
  CHECK(text.rfind("round,epochs,avg_residual,consensus_error,tracking_error,grad_evals\n", 0) == 0);
  CHECK(text == slurp(b / "trace.csv"));
}

TEST_CASE("compare writes one trace per member") {
  const auto dir = scratch("compare");
  fs::create_directories(dir);
  {
    std::ofstream cfg(dir / "cmp.cfg");
    cfg << "[graph]\nkind = ring\nn = 5\n[objective]\nkind = quadratic\n[budget]\nepochs = 5\n"
           "[compare.dsgd]\nalgorithm.id = dsgd\nschedule.alpha = 0.02\n"
           "[compare.gt]\nalgorithm.id = gt-dsgd\nschedule.alpha = 0.02\n";
  }
  const auto r = cli({"compare", "--config", (dir / "cmp.cfg").string(), "--out", (dir / "out").string()});
  CHECK(r.code == kExitOk);
  CHECK(fs::exists(dir / "out" / "dsgd.csv"));
  CHECK(fs::exists(dir / "out" / "gt.csv"));
  CHECK(fs::exists(dir / "out" / "aligned.csv"));
}

TEST_CASE("error reporting") {
  const auto dir = scratch("errors");
  CHECK(cli({"run", "--out", dir.string(), "--set", "graph.colour=red"}).code == kExitValidation);
  const auto missing = cli({"run", "--config", "/nonexistent/x.cfg", "--out", dir.string()});
  CHECK(missing.code == kExitValidation);
  CHECK(missing.err.find("not found") != std::string::npos);
  CHECK(cli({"frobnicate"}).code == kExitValidation);
  const auto missing_alpha = cli({"run", "--out", dir.string(), "--set", "graph.kind=ring", "--set", "graph.n=4",
                                  "--set", "objective.kind=quadratic", "--set", "budget.rounds=3"});
  CHECK(missing_alpha.code == kExitValidation);
  CHECK(missing_alpha.err.find("error: ") == 0);
  const auto diverge = cli({"run", "--out", dir.string(), "--set", "graph.kind=ring", "--set", "graph.n=4", "--set",
                            "objective.kind=quadratic", "--set", "algorithm.id=gt-dgd", "--set", "schedule.alpha=50",
                            "--set", "budget.rounds=1000"});
  CHECK(diverge.code == kExitRuntime);
  CHECK(diverge.err.find("round") != std::string::npos);
}
