#include "gtopt/topology.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <queue>
#include <set>

#include "gtopt/core.hpp"

namespace gtopt {

Topology::Topology(std::size_t n, const std::vector<Edge>& edges) : neighbors_(n) {
  if (n == 0) throw ParameterError("topology needs at least one node");
  std::set<Edge> unique;
  for (auto [i, r] : edges) {
    if (i >= n || r >= n) throw ParameterError("edge endpoint out of range");
    if (i == r) throw ParameterError("self-loop on node " + std::to_string(i));
    unique.emplace(std::min(i, r), std::max(i, r));
  }
  edges_.assign(unique.begin(), unique.end());
  for (auto [i, r] : edges_) {
    neighbors_[i].push_back(r);
    neighbors_[r].push_back(i);
  }
  for (auto& nb : neighbors_) std::sort(nb.begin(), nb.end());
}

std::size_t Topology::max_degree() const {
  std::size_t d = 0;
  for (const auto& nb : neighbors_) d = std::max(d, nb.size());
  return d;
}

bool Topology::has_edge(std::size_t i, std::size_t r) const {
  const auto& nb = neighbors_.at(i);
  return std::binary_search(nb.begin(), nb.end(), r);
}

void Topology::set_coordinates(std::vector<std::pair<double, double>> coords) {
  if (coords.size() != size()) throw DimensionError("coordinate count differs from node count");
  coords_ = std::move(coords);
}

bool is_connected(const Topology& t) {
  const std::size_t n = t.size();
  std::vector<bool> seen(n, false);
  std::queue<std::size_t> frontier;
  seen[0] = true;
  frontier.push(0);
  std::size_t reached = 1;
  while (!frontier.empty()) {
    const auto u = frontier.front();
    frontier.pop();
    for (auto v : t.neighbors(u)) {
      if (!seen[v]) {
        seen[v] = true;
        ++reached;
        frontier.push(v);
      }
    }
  }
  return reached == n;
}

Topology random_geometric(std::size_t n, double radius, std::uint64_t seed) {
  if (n < 2) throw ParameterError("random_geometric needs n >= 2");
  if (!(radius > 0.0) || radius > std::sqrt(2.0))
    throw ParameterError("radius must lie in (0, sqrt(2)]");

  Rng rng(seed, 0);
  const double r2 = radius * radius;
  for (int attempt = 0; attempt < kGeometricRetryBudget; ++attempt) {
    std::vector<std::pair<double, double>> pts(n);
    for (auto& p : pts) {
      p.first = rng.uniform();
      p.second = rng.uniform();
    }
    std::vector<Topology::Edge> edges;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t r = i + 1; r < n; ++r) {
        const double dx = pts[i].first - pts[r].first;
        const double dy = pts[i].second - pts[r].second;
        if (dx * dx + dy * dy <= r2) edges.emplace_back(i, r);
      }
    }
    Topology t(n, edges);
    if (is_connected(t)) {
      t.set_coordinates(std::move(pts));
      return t;
    }
  }
  throw ConnectivityError("no connected geometric graph with n=" + std::to_string(n) +
                          " radius=" + std::to_string(radius) + " after " +
                          std::to_string(kGeometricRetryBudget) + " draws");
}

Topology path_graph(std::size_t n) {
  if (n < 2) throw ParameterError("path_graph needs n >= 2");
  std::vector<Topology::Edge> edges;
  for (std::size_t i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  return Topology(n, edges);
}

Topology complete_graph(std::size_t n) {
  if (n < 2) throw ParameterError("complete_graph needs n >= 2");
  std::vector<Topology::Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t r = i + 1; r < n; ++r) edges.emplace_back(i, r);
  return Topology(n, edges);
}

Topology ring_graph(std::size_t n) {
  if (n < 2) throw ParameterError("ring_graph needs n >= 2");
  std::vector<Topology::Edge> edges;
  for (std::size_t i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
  return Topology(n, edges);
}

void write_edge_list(std::ostream& out, const Topology& t) {
  out << t.size() << '\n';
  for (auto [i, r] : t.edges()) out << i << ' ' << r << '\n';
}

Topology read_edge_list(std::istream& in) {
  std::size_t n = 0;
  if (!(in >> n)) throw IoError("edge list: missing node count");
  std::vector<Topology::Edge> edges;
  std::size_t i = 0, r = 0;
  while (in >> i >> r) edges.emplace_back(i, r);
  if (!in.eof()) throw IoError("edge list: malformed pair");
  return Topology(n, edges);
}

}  // namespace gtopt
