#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "suburban/random.hpp"

namespace suburban {

enum class TopologyKind { HypercubicPercolation, ErdosRenyi };

/// Recipe for drawing agent connectivity graphs.
///
/// `d`, `m` and `shuffle` only apply to HypercubicPercolation, where agents
/// sit on the sites of an m^d periodic lattice and each lattice link is kept
/// with probability `p_join`. ErdosRenyi joins every unordered pair of agents
/// with probability `p_join`.
struct GraphEnsembleSpec {
  TopologyKind kind = TopologyKind::HypercubicPercolation;
  int d = 2;
  int m = 9;
  int M = 81;
  double p_join = 0.5;
  bool shuffle = true;

  /// Throws std::invalid_argument if the spec violates its invariants.
  void validate() const;

  /// Expected half mean degree of a drawn graph.
  double effective_dimension() const;
};

using Edge = std::pair<std::size_t, std::size_t>;

/// Symmetric, loop-free agent adjacency stored as sorted neighbor lists.
class AdjacencyMatrix {
 public:
  AdjacencyMatrix() = default;
  /// Builds from an undirected edge list. Throws on self-loops, duplicate
  /// edges, or out-of-range endpoints.
  AdjacencyMatrix(std::size_t agents, std::span<const Edge> edges);

  static AdjacencyMatrix empty(std::size_t agents);

  std::size_t agents() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t edge_count() const { return indices_.size() / 2; }

  /// Sorted neighbors of agent `agent`. Throws std::out_of_range.
  std::span<const std::size_t> neighbors(std::size_t agent) const;
  std::size_t degree(std::size_t agent) const { return neighbors(agent).size(); }
  bool has_edge(std::size_t i, std::size_t j) const;

  std::vector<Edge> edges() const;

  bool operator==(const AdjacencyMatrix&) const = default;

 private:
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> indices_;
};

/// Nearest-neighbor links of the d-dimensional periodic lattice with m sites
/// per axis. Site index is the mixed-radix number of its coordinates, axis 0
/// least significant. Each edge is reported once with first < second.
std::vector<Edge> lattice_edge_set(int d, int m);

AdjacencyMatrix draw_adjacency(const GraphEnsembleSpec& spec, RandomStream& rng);

/// Half the mean degree: |edges| / M.
double effective_dimension(const AdjacencyMatrix& adjacency);

inline std::span<const std::size_t> neighbors(const AdjacencyMatrix& adjacency,
                                              std::size_t agent) {
  return adjacency.neighbors(agent);
}

}  // namespace suburban
