#pragma once

#include <cstdint>

#include "suburban/engine.hpp"

namespace suburban {

struct SliceParams {
  /// Initial bracket width around the current point.
  double initial_width = 1.0;
  int max_doublings = 10;

  void validate() const;
};

struct SliceStepStats {
  std::uint64_t evaluations = 0;
  std::uint64_t doublings = 0;
};

/// One slice-sampling update of coordinate k of `agent`, using interval
/// doubling and shrinkage with the doubling acceptance test. Uses and
/// refreshes the agent's cached log-density.
SliceStepStats slice_update_coordinate(ChainState& state, std::size_t agent, std::size_t k,
                                       Target& target, const SliceParams& params,
                                       RandomStream& rng);

/// Parallel, uncoupled slice-within-Gibbs over M agents and D coordinates.
/// Uses config's target, N, M, init_halfwidth and seed; the graph and kernel
/// fields are ignored. Every slice move is counted as accepted.
ChainRecord slice_gibbs_chain(const ChainConfig& config, const SliceParams& params);

/// M independent random-walk Metropolis chains, per-coordinate Gibbs schedule,
/// Normal(0, 1/(4 beta)) steps. Written without the suburban kernel so it can
/// serve as a reference for the p_join = 0 limit. Uses its own random stream.
ChainRecord parallel_metropolis_chain(const ChainConfig& config);

}  // namespace suburban
