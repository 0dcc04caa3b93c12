#include "suburban/graph.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace suburban {

namespace {

std::size_t checked_power(int base, int exponent) {
  std::size_t result = 1;
  for (int i = 0; i < exponent; ++i) {
    if (result > (std::size_t{1} << 40) / static_cast<std::size_t>(base)) {
      throw std::invalid_argument("lattice too large");
    }
    result *= static_cast<std::size_t>(base);
  }
  return result;
}

}  // namespace

void GraphEnsembleSpec::validate() const {
  if (M < 1) throw std::invalid_argument("agent count M must be positive");
  if (!(p_join >= 0.0 && p_join <= 1.0)) {
    throw std::invalid_argument("p_join must lie in [0, 1]");
  }
  if (kind == TopologyKind::HypercubicPercolation) {
    if (d < 1) throw std::invalid_argument("lattice dimension d must be >= 1");
    if (m < 3) throw std::invalid_argument("lattice side m must be >= 3");
    if (checked_power(m, d) != static_cast<std::size_t>(M)) {
      throw std::invalid_argument("lattice requires m^d == M (m=" + std::to_string(m) +
                                  ", d=" + std::to_string(d) +
                                  ", M=" + std::to_string(M) + ")");
    }
  }
}

double GraphEnsembleSpec::effective_dimension() const {
  if (kind == TopologyKind::HypercubicPercolation) return p_join * d;
  return p_join * (M - 1) / 2.0;
}

AdjacencyMatrix::AdjacencyMatrix(std::size_t agents, std::span<const Edge> edges)
    : offsets_(agents + 1, 0), indices_(2 * edges.size()) {
  for (const auto& [a, b] : edges) {
    if (a >= agents || b >= agents) throw std::out_of_range("edge endpoint out of range");
    if (a == b) throw std::invalid_argument("self-loop in adjacency");
    ++offsets_[a + 1];
    ++offsets_[b + 1];
  }
  std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
  std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
  for (const auto& [a, b] : edges) {
    indices_[cursor[a]++] = b;
    indices_[cursor[b]++] = a;
  }
  for (std::size_t i = 0; i < agents; ++i) {
    auto first = indices_.begin() + static_cast<std::ptrdiff_t>(offsets_[i]);
    auto last = indices_.begin() + static_cast<std::ptrdiff_t>(offsets_[i + 1]);
    std::sort(first, last);
    if (std::adjacent_find(first, last) != last) {
      throw std::invalid_argument("duplicate edge in adjacency");
    }
  }
}

AdjacencyMatrix AdjacencyMatrix::empty(std::size_t agents) {
  return AdjacencyMatrix(agents, std::span<const Edge>{});
}

std::span<const std::size_t> AdjacencyMatrix::neighbors(std::size_t agent) const {
  if (agent >= agents()) throw std::out_of_range("agent index out of range");
  return {indices_.data() + offsets_[agent], offsets_[agent + 1] - offsets_[agent]};
}

bool AdjacencyMatrix::has_edge(std::size_t i, std::size_t j) const {
  const auto nb = neighbors(i);
  return std::binary_search(nb.begin(), nb.end(), j);
}

std::vector<Edge> AdjacencyMatrix::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count());
  for (std::size_t i = 0; i < agents(); ++i) {
    for (std::size_t j : neighbors(i)) {
      if (i < j) out.emplace_back(i, j);
    }
  }
  return out;
}

std::vector<Edge> lattice_edge_set(int d, int m) {
  if (d < 1) throw std::invalid_argument("lattice dimension d must be >= 1");
  if (m < 3) throw std::invalid_argument("lattice side m must be >= 3");
  const std::size_t sites = checked_power(m, d);
  const auto side = static_cast<std::size_t>(m);

  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(d) * sites);
  for (std::size_t site = 0; site < sites; ++site) {
    std::size_t stride = 1;
    for (int axis = 0; axis < d; ++axis) {
      const std::size_t coord = (site / stride) % side;
      const std::size_t next = coord + 1 == side ? site - coord * stride : site + stride;
      edges.emplace_back(std::min(site, next), std::max(site, next));
      stride *= side;
    }
  }
  std::sort(edges.begin(), edges.end());
  return edges;
}

AdjacencyMatrix draw_adjacency(const GraphEnsembleSpec& spec, RandomStream& rng) {
  spec.validate();
  const auto agents = static_cast<std::size_t>(spec.M);
  std::vector<Edge> kept;

  if (spec.kind == TopologyKind::HypercubicPercolation) {
    std::vector<std::size_t> agent_at_site(agents);
    std::iota(agent_at_site.begin(), agent_at_site.end(), std::size_t{0});
    if (spec.shuffle) std::shuffle(agent_at_site.begin(), agent_at_site.end(), rng);

    const auto lattice = lattice_edge_set(spec.d, spec.m);
    kept.reserve(lattice.size());
    for (const auto& [u, v] : lattice) {
      if (rng.uniform() < spec.p_join) kept.emplace_back(agent_at_site[u], agent_at_site[v]);
    }
  } else {
    for (std::size_t i = 0; i < agents; ++i) {
      for (std::size_t j = i + 1; j < agents; ++j) {
        if (rng.uniform() < spec.p_join) kept.emplace_back(i, j);
      }
    }
  }
  return AdjacencyMatrix(agents, kept);
}

double effective_dimension(const AdjacencyMatrix& adjacency) {
  if (adjacency.agents() == 0) return 0.0;
  return static_cast<double>(adjacency.edge_count()) /
         static_cast<double>(adjacency.agents());
}

}  // namespace suburban
