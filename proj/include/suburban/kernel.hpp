#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "suburban/graph.hpp"
#include "suburban/random.hpp"

namespace suburban {

enum class UpdateMode { GibbsPerDimension, JointPerAgent };

struct KernelParams {
  double beta = 0.01;
  UpdateMode update_mode = UpdateMode::GibbsPerDimension;

  void validate() const;
};

/// Inputs to one scalar proposal: the agent's current coordinate and the same
/// coordinate of each neighbor joined to it.
struct ScalarProposalContext {
  double x_old;
  std::span<const double> neighbor_values;
  double beta;
};

struct GaussianForm {
  double mean;
  double variance;
};

// The brane kernel weights a move dx by
//   exp(-alpha dx^2 - sum_n beta (dx - (x_n - x_old))^2),  alpha = (2 - n) beta.
// Completing the square gives a Gaussian with mean x_old + S / 2, where
// S = sum_n (x_n - x_old), and variance 1 / (4 beta) for every neighbor count.
// alpha is negative for n > 2; the dx^2 coefficient alpha + n beta = 2 beta
// stays positive.

GaussianForm conditional_form(const ScalarProposalContext& ctx);

/// Normalized log-density of `x_new` under conditional_form(ctx).
double log_kernel_density(double x_new, const ScalarProposalContext& ctx);

/// log[q(old | new) / q(new | old)] + log_pi_new - log_pi_old for one scalar
/// move with the neighbor values held fixed in both directions.
double acceptance_log_ratio(double x_old, double x_new, std::span<const double> neighbor_values,
                            double beta, double target_logpi_old, double target_logpi_new);

/// Hastings term alone: log q(old | new) - log q(new | old).
double hastings_log_ratio(double x_old, double x_new, std::span<const double> neighbor_values,
                          double beta);

/// Row-major M x D matrix of agent positions at one timestep.
class EnsembleState {
 public:
  EnsembleState() = default;
  EnsembleState(std::size_t agents, std::size_t dim, double fill = 0.0)
      : agents_(agents), dim_(dim), values_(agents * dim, fill) {}

  std::size_t agents() const { return agents_; }
  std::size_t dim() const { return dim_; }

  double& operator()(std::size_t agent, std::size_t k) { return values_[agent * dim_ + k]; }
  double operator()(std::size_t agent, std::size_t k) const { return values_[agent * dim_ + k]; }

  std::span<double> agent(std::size_t a) { return {values_.data() + a * dim_, dim_}; }
  std::span<const double> agent(std::size_t a) const { return {values_.data() + a * dim_, dim_}; }
  std::span<const double> values() const { return values_; }

  /// Timestep of this snapshot.
  std::size_t t = 0;

  bool operator==(const EnsembleState&) const = default;

 private:
  std::size_t agents_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> values_;
};

/// Fills `out` with coordinate `k` of each neighbor of `agent`.
void gather_neighbor_values(const EnsembleState& state, const AdjacencyMatrix& adjacency,
                            std::size_t agent, std::size_t k, std::vector<double>& out);

struct CoordinateProposal {
  std::size_t dim;
  double x_old;
  double x_new;
  /// Neighbor values the proposal was drawn against.
  std::vector<double> neighbor_values;
};

/// One scalar draw for coordinate `k` of `agent`, coupled to the current
/// values of its neighbors in the same coordinate.
CoordinateProposal propose_coordinate(const EnsembleState& state, std::size_t agent,
                                      std::size_t k, const AdjacencyMatrix& adjacency,
                                      double beta, RandomStream& rng);

/// All D coordinates of `agent` drawn from their independent conditionals.
/// Under GibbsPerDimension callers use one entry at a time; JointPerAgent uses
/// the whole vector as a single move.
std::vector<CoordinateProposal> propose_agent(const EnsembleState& state, std::size_t agent,
                                              const AdjacencyMatrix& adjacency,
                                              const KernelParams& params, RandomStream& rng);

}  // namespace suburban
