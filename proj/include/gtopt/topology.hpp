#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace gtopt {

/// Undirected simple graph over nodes 0..n-1.
///
/// Edges are stored once as (i, r) with i < r; neighbor lists hold both
/// directions. Instances are immutable once built.
class Topology {
 public:
  using Edge = std::pair<std::size_t, std::size_t>;

  /// Builds a graph from an edge list. Self-loops and out-of-range indices
  /// throw ParameterError; duplicate and reversed pairs are merged.
  Topology(std::size_t n, const std::vector<Edge>& edges);

  std::size_t size() const { return neighbors_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<std::size_t>& neighbors(std::size_t i) const { return neighbors_.at(i); }
  std::size_t degree(std::size_t i) const { return neighbors_.at(i).size(); }
  std::size_t max_degree() const;
  bool has_edge(std::size_t i, std::size_t r) const;

  /// Node positions in the unit square; empty unless built by random_geometric.
  const std::vector<std::pair<double, double>>& coordinates() const { return coords_; }
  void set_coordinates(std::vector<std::pair<double, double>> coords);

 private:
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> neighbors_;
  std::vector<std::pair<double, double>> coords_;
};

inline constexpr int kGeometricRetryBudget = 1000;

/// Breadth-first search from node 0 reaches every node.
bool is_connected(const Topology& t);

/// Nodes uniform on the unit square, edge iff distance <= radius. Redraws
/// all positions until the graph is connected; throws ConnectivityError
/// after kGeometricRetryBudget attempts.
Topology random_geometric(std::size_t n, double radius, std::uint64_t seed);

Topology path_graph(std::size_t n);
Topology complete_graph(std::size_t n);
Topology ring_graph(std::size_t n);

/// Edge list text: first line n, then one "i r" pair per line (0-indexed).
void write_edge_list(std::ostream& out, const Topology& t);
Topology read_edge_list(std::istream& in);

}  // namespace gtopt
