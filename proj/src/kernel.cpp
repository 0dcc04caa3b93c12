#include "suburban/kernel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace suburban {

void KernelParams::validate() const {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw std::invalid_argument("kernel beta must be positive and finite");
  }
}

GaussianForm conditional_form(const ScalarProposalContext& ctx) {
  double pull = 0.0;
  for (double v : ctx.neighbor_values) pull += v - ctx.x_old;
  return {ctx.x_old + 0.5 * pull, 0.25 / ctx.beta};
}

double log_kernel_density(double x_new, const ScalarProposalContext& ctx) {
  const auto form = conditional_form(ctx);
  const double r = x_new - form.mean;
  return -0.5 * std::log(2.0 * std::numbers::pi * form.variance) - 0.5 * r * r / form.variance;
}

double hastings_log_ratio(double x_old, double x_new, std::span<const double> neighbor_values,
                          double beta) {
  const ScalarProposalContext forward{x_old, neighbor_values, beta};
  const ScalarProposalContext reverse{x_new, neighbor_values, beta};
  return log_kernel_density(x_old, reverse) - log_kernel_density(x_new, forward);
}

double acceptance_log_ratio(double x_old, double x_new, std::span<const double> neighbor_values,
                            double beta, double target_logpi_old, double target_logpi_new) {
  return hastings_log_ratio(x_old, x_new, neighbor_values, beta) +
         (target_logpi_new - target_logpi_old);
}

void gather_neighbor_values(const EnsembleState& state, const AdjacencyMatrix& adjacency,
                            std::size_t agent, std::size_t k, std::vector<double>& out) {
  const auto nb = adjacency.neighbors(agent);
  out.resize(nb.size());
  for (std::size_t i = 0; i < nb.size(); ++i) out[i] = state(nb[i], k);
}

CoordinateProposal propose_coordinate(const EnsembleState& state, std::size_t agent,
                                      std::size_t k, const AdjacencyMatrix& adjacency,
                                      double beta, RandomStream& rng) {
  if (agent >= state.agents()) throw std::out_of_range("agent index out of range");
  if (k >= state.dim()) throw std::out_of_range("dimension index out of range");
  if (adjacency.agents() != state.agents()) {
    throw std::invalid_argument("adjacency size does not match ensemble");
  }
  CoordinateProposal p{k, state(agent, k), 0.0, {}};
  gather_neighbor_values(state, adjacency, agent, k, p.neighbor_values);
  const auto form = conditional_form({p.x_old, p.neighbor_values, beta});
  p.x_new = form.mean + std::sqrt(form.variance) * rng.normal();
  return p;
}

std::vector<CoordinateProposal> propose_agent(const EnsembleState& state, std::size_t agent,
                                              const AdjacencyMatrix& adjacency,
                                              const KernelParams& params, RandomStream& rng) {
  std::vector<CoordinateProposal> out;
  out.reserve(state.dim());
  for (std::size_t k = 0; k < state.dim(); ++k) {
    out.push_back(propose_coordinate(state, agent, k, adjacency, params.beta, rng));
  }
  return out;
}

}  // namespace suburban
