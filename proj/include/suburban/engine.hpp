#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "suburban/graph.hpp"
#include "suburban/kernel.hpp"
#include "suburban/random.hpp"
#include "suburban/targets.hpp"

namespace suburban {

struct ChainConfig {
  Target target;
  GraphEnsembleSpec graph;
  KernelParams kernel;
  std::size_t N = 10'000;
  std::size_t M = 81;
  double init_halfwidth = 100.0;
  double burn_in_fraction = 0.10;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Output of one chain. Sample t (0-based) is the ensemble after sweep t + 1.
struct ChainRecord {
  std::size_t N = 0;
  std::size_t M = 0;
  std::size_t D = 0;
  /// N x M x D, index ((t * M) + agent) * D + k.
  std::vector<double> samples;
  std::uint64_t accept_count = 0;
  std::uint64_t reject_count = 0;
  /// V = -sum_agents log pi(x_agent), once per timestep after the sweep.
  std::vector<double> energy_series;
  std::uint64_t eval_count = 0;
  /// Edge count of the graph used at each timestep (empty for uncoupled
  /// baselines).
  std::vector<std::size_t> edge_counts;
  /// Total interval doublings (slice baseline only).
  std::uint64_t slice_doublings = 0;

  std::span<const double> sample(std::size_t t, std::size_t agent) const {
    return {samples.data() + (t * M + agent) * D, D};
  }
};

/// Ensemble positions plus each agent's cached log-density.
struct ChainState {
  EnsembleState positions;
  std::vector<double> log_pi;

  static ChainState evaluate(EnsembleState positions, Target& target);
  double energy() const;
};

struct SweepStats {
  std::uint64_t accepted = 0;
  std::uint64_t rejected = 0;
};

/// Every coordinate i.i.d. Uniform[-h, h].
EnsembleState initialize(const ChainConfig& config, RandomStream& rng);

/// MH step for coordinate k of one agent against the current neighbor values.
/// `scratch` is reused storage for those values. Returns true on acceptance.
bool update_coordinate(ChainState& state, std::size_t agent, std::size_t k,
                       const AdjacencyMatrix& adjacency, Target& target, double beta,
                       RandomStream& rng, std::vector<double>& scratch);

/// Joint MH step over all D coordinates of one agent.
bool update_agent(ChainState& state, std::size_t agent, const AdjacencyMatrix& adjacency,
                  Target& target, double beta, RandomStream& rng, std::vector<double>& scratch);

/// One Gibbs pass over agents 0..M-1 (and coordinates 0..D-1 under
/// GibbsPerDimension). Only the visited agent's target factor enters each
/// acceptance ratio.
SweepStats suburban_sweep(ChainState& state, const AdjacencyMatrix& adjacency, Target& target,
                          const KernelParams& params, RandomStream& rng);

/// Full suburban chain, deterministic in config.seed. The graph sequence
/// depends on the seed alone.
ChainRecord run_chain(const ChainConfig& config);

/// Sequence of graphs run_chain would use for `steps` timesteps.
std::vector<AdjacencyMatrix> adjacency_sequence(const GraphEnsembleSpec& spec,
                                                std::uint64_t seed, std::size_t steps);

/// Recompute the energy of recorded step `t` from the stored samples.
double recompute_energy(const ChainRecord& record, std::size_t t, Target& target);

/// CSV dump, one row per (t, agent): t,agent,x_1..x_D. t counts from 1.
void write_samples_csv(const ChainRecord& record, std::ostream& out);

namespace stream_role {
inline constexpr std::uint64_t kChain = 0;
inline constexpr std::uint64_t kGraph = 1;
inline constexpr std::uint64_t kSlice = 2;
inline constexpr std::uint64_t kParallelMh = 3;
}  // namespace stream_role

}  // namespace suburban
