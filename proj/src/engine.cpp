#include "suburban/engine.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "suburban/targets.hpp"

namespace suburban {

void ChainConfig::validate() const {
  if (N < 1) throw std::invalid_argument("chain needs N >= 1");
  if (M < 1) throw std::invalid_argument("chain needs M >= 1");
  if (static_cast<std::size_t>(graph.M) != M) {
    throw std::invalid_argument("graph ensemble M does not match chain M");
  }
  graph.validate();
  kernel.validate();
  if (!(init_halfwidth >= 0.0) || !std::isfinite(init_halfwidth)) {
    throw std::invalid_argument("init_halfwidth must be finite and nonnegative");
  }
  if (!(burn_in_fraction >= 0.0 && burn_in_fraction < 1.0)) {
    throw std::invalid_argument("burn_in_fraction must lie in [0, 1)");
  }
}

ChainState ChainState::evaluate(EnsembleState positions, Target& target) {
  if (positions.dim() != target.dimension()) {
    throw std::invalid_argument("ensemble dimension does not match target");
  }
  ChainState s{std::move(positions), {}};
  s.log_pi.resize(s.positions.agents());
  for (std::size_t a = 0; a < s.positions.agents(); ++a) {
    s.log_pi[a] = target.log_density(s.positions.agent(a));
  }
  return s;
}

double ChainState::energy() const {
  double v = 0.0;
  for (double lp : log_pi) v -= lp;
  return v;
}

EnsembleState initialize(const ChainConfig& config, RandomStream& rng) {
  EnsembleState state(config.M, config.target.dimension());
  const double h = config.init_halfwidth;
  for (std::size_t a = 0; a < config.M; ++a) {
    for (std::size_t k = 0; k < state.dim(); ++k) {
      state(a, k) = h * (2.0 * rng.uniform() - 1.0);
    }
  }
  return state;
}

namespace {

bool metropolis_accept(double log_ratio, RandomStream& rng) {
  const double u = rng.uniform();
  return log_ratio >= 0.0 || u < std::exp(log_ratio);
}

}  // namespace

bool update_coordinate(ChainState& state, std::size_t agent, std::size_t k,
                       const AdjacencyMatrix& adjacency, Target& target, double beta,
                       RandomStream& rng, std::vector<double>& scratch) {
  auto& pos = state.positions;
  gather_neighbor_values(pos, adjacency, agent, k, scratch);
  const double x_old = pos(agent, k);
  const auto form = conditional_form({x_old, scratch, beta});
  const double x_new = form.mean + std::sqrt(form.variance) * rng.normal();

  pos(agent, k) = x_new;
  const double lp_new = target.log_density(pos.agent(agent));
  const double lp_old = state.log_pi[agent];
  const bool accept =
      std::isfinite(lp_new) && std::isfinite(x_new) &&
      metropolis_accept(acceptance_log_ratio(x_old, x_new, scratch, beta, lp_old, lp_new), rng);
  if (accept) {
    state.log_pi[agent] = lp_new;
  } else {
    pos(agent, k) = x_old;
  }
  return accept;
}

bool update_agent(ChainState& state, std::size_t agent, const AdjacencyMatrix& adjacency,
                  Target& target, double beta, RandomStream& rng, std::vector<double>& scratch) {
  auto& pos = state.positions;
  const std::size_t dim = pos.dim();
  std::vector<double> old_values(pos.agent(agent).begin(), pos.agent(agent).end());

  // Every conditional is drawn against the pre-move neighbor values, which
  // are also the values used by the reverse density.
  double hastings = 0.0;
  for (std::size_t k = 0; k < dim; ++k) {
    gather_neighbor_values(pos, adjacency, agent, k, scratch);
    const auto form = conditional_form({old_values[k], scratch, beta});
    const double x_new = form.mean + std::sqrt(form.variance) * rng.normal();
    hastings += hastings_log_ratio(old_values[k], x_new, scratch, beta);
    pos(agent, k) = x_new;
  }
  const double lp_new = target.log_density(pos.agent(agent));
  const double log_ratio = hastings + (lp_new - state.log_pi[agent]);
  const bool finite = std::isfinite(lp_new) && std::isfinite(log_ratio);
  const bool accept = finite && metropolis_accept(log_ratio, rng);
  if (accept) {
    state.log_pi[agent] = lp_new;
  } else {
    for (std::size_t k = 0; k < dim; ++k) pos(agent, k) = old_values[k];
  }
  return accept;
}

SweepStats suburban_sweep(ChainState& state, const AdjacencyMatrix& adjacency, Target& target,
                          const KernelParams& params, RandomStream& rng) {
  if (adjacency.agents() != state.positions.agents()) {
    throw std::invalid_argument("adjacency size does not match ensemble");
  }
  SweepStats stats;
  std::vector<double> scratch;
  const std::size_t agents = state.positions.agents();
  const std::size_t dim = state.positions.dim();
  for (std::size_t a = 0; a < agents; ++a) {
    if (params.update_mode == UpdateMode::GibbsPerDimension) {
      for (std::size_t k = 0; k < dim; ++k) {
        const bool ok = update_coordinate(state, a, k, adjacency, target, params.beta, rng, scratch);
        ++(ok ? stats.accepted : stats.rejected);
      }
    } else {
      const bool ok = update_agent(state, a, adjacency, target, params.beta, rng, scratch);
      ++(ok ? stats.accepted : stats.rejected);
    }
  }
  ++state.positions.t;
  return stats;
}

ChainRecord run_chain(const ChainConfig& config) {
  config.validate();
  Target target = config.target;
  target.reset_eval_count();

  SeededStream rng(substream_seed(config.seed, stream_role::kChain));
  SeededStream graph_rng(substream_seed(config.seed, stream_role::kGraph));

  ChainState state = ChainState::evaluate(initialize(config, rng), target);
  AdjacencyMatrix adjacency = draw_adjacency(config.graph, graph_rng);

  ChainRecord record;
  record.N = config.N;
  record.M = config.M;
  record.D = target.dimension();
  record.samples.reserve(record.N * record.M * record.D);
  record.energy_series.reserve(record.N);
  record.edge_counts.reserve(record.N);

  for (std::size_t t = 0; t < config.N; ++t) {
    const auto stats = suburban_sweep(state, adjacency, target, config.kernel, rng);
    record.accept_count += stats.accepted;
    record.reject_count += stats.rejected;
    const auto values = state.positions.values();
    record.samples.insert(record.samples.end(), values.begin(), values.end());
    record.energy_series.push_back(state.energy());
    record.edge_counts.push_back(adjacency.edge_count());
    adjacency = draw_adjacency(config.graph, graph_rng);
  }
  record.eval_count = target.eval_count();
  return record;
}

std::vector<AdjacencyMatrix> adjacency_sequence(const GraphEnsembleSpec& spec,
                                                std::uint64_t seed, std::size_t steps) {
  SeededStream graph_rng(substream_seed(seed, stream_role::kGraph));
  std::vector<AdjacencyMatrix> out;
  out.reserve(steps);
  for (std::size_t t = 0; t < steps; ++t) out.push_back(draw_adjacency(spec, graph_rng));
  return out;
}

double recompute_energy(const ChainRecord& record, std::size_t t, Target& target) {
  if (t >= record.N) throw std::out_of_range("timestep out of range");
  double v = 0.0;
  for (std::size_t a = 0; a < record.M; ++a) v -= target.log_density(record.sample(t, a));
  return v;
}

void write_samples_csv(const ChainRecord& record, std::ostream& out) {
  out << "t,agent";
  for (std::size_t k = 0; k < record.D; ++k) out << ",x_" << (k + 1);
  out << '\n';
  for (std::size_t t = 0; t < record.N; ++t) {
    for (std::size_t a = 0; a < record.M; ++a) {
      out << (t + 1) << ',' << a;
      for (double v : record.sample(t, a)) out << ',' << format_number(v);
      out << '\n';
    }
  }
}

}  // namespace suburban
