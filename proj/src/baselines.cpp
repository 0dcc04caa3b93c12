#include "suburban/baselines.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>

namespace suburban {

void SliceParams::validate() const {
  if (!(initial_width > 0.0) || !std::isfinite(initial_width)) {
    throw std::invalid_argument("slice width must be positive and finite");
  }
  if (max_doublings < 0) throw std::invalid_argument("max_doublings must be >= 0");
}

namespace {

constexpr int kMaxShrinks = 2000;

double exponential(RandomStream& rng) {
  double e = 0.0;
  while (e <= 0.0) e = -std::log(1.0 - rng.uniform());
  return e;
}

}  // namespace

SliceStepStats slice_update_coordinate(ChainState& state, std::size_t agent, std::size_t k,
                                       Target& target, const SliceParams& params,
                                       RandomStream& rng) {
  auto& pos = state.positions;
  SliceStepStats stats;
  const double x0 = pos(agent, k);
  const double w = params.initial_width;
  const double level = state.log_pi[agent] - exponential(rng);

  auto f = [&](double x) {
    pos(agent, k) = x;
    ++stats.evaluations;
    return target.log_density(pos.agent(agent));
  };

  double left = x0 - w * rng.uniform();
  double right = left + w;
  double f_left = f(left);
  double f_right = f(right);
  for (int remaining = params.max_doublings;
       remaining > 0 && (level < f_left || level < f_right); --remaining) {
    ++stats.doublings;
    if (rng.uniform() < 0.5) {
      left -= right - left;
      f_left = f(left);
    } else {
      right += right - left;
      f_right = f(right);
    }
  }

  // Doubling acceptance test: reject x1 if some interval on the path back
  // down the doubling tree separates x0 from x1 and has both ends outside
  // the slice.
  auto acceptable = [&](double x1) {
    double lo = left;
    double hi = right;
    std::optional<double> f_lo = f_left;
    std::optional<double> f_hi = f_right;
    bool differ = false;
    while (hi - lo > 1.1 * w) {
      const double mid = 0.5 * (lo + hi);
      if ((x0 < mid && x1 >= mid) || (x0 >= mid && x1 < mid)) differ = true;
      if (x1 < mid) {
        hi = mid;
        f_hi.reset();
      } else {
        lo = mid;
        f_lo.reset();
      }
      if (differ) {
        if (!f_lo) f_lo = f(lo);
        if (!f_hi) f_hi = f(hi);
        if (level >= *f_lo && level >= *f_hi) return false;
      }
    }
    return true;
  };

  double lo = left;
  double hi = right;
  for (int shrink = 0; shrink < kMaxShrinks; ++shrink) {
    const double x1 = lo + rng.uniform() * (hi - lo);
    const double f1 = f(x1);
    if (level < f1 && acceptable(x1)) {
      pos(agent, k) = x1;
      state.log_pi[agent] = f1;
      return stats;
    }
    if (x1 < x0) {
      lo = x1;
    } else {
      hi = x1;
    }
  }
  // The bracket collapsed onto x0 without an acceptable point; stay put.
  pos(agent, k) = x0;
  return stats;
}

ChainRecord slice_gibbs_chain(const ChainConfig& config, const SliceParams& params) {
  if (config.N < 1 || config.M < 1) throw std::invalid_argument("slice chain needs N, M >= 1");
  params.validate();
  Target target = config.target;
  target.reset_eval_count();
  SeededStream rng(substream_seed(config.seed, stream_role::kSlice));
  ChainState state = ChainState::evaluate(initialize(config, rng), target);

  ChainRecord record;
  record.N = config.N;
  record.M = config.M;
  record.D = target.dimension();
  record.samples.reserve(record.N * record.M * record.D);
  record.energy_series.reserve(record.N);

  for (std::size_t t = 0; t < config.N; ++t) {
    for (std::size_t a = 0; a < config.M; ++a) {
      for (std::size_t k = 0; k < record.D; ++k) {
        const auto s = slice_update_coordinate(state, a, k, target, params, rng);
        record.slice_doublings += s.doublings;
        ++record.accept_count;
      }
    }
    const auto values = state.positions.values();
    record.samples.insert(record.samples.end(), values.begin(), values.end());
    record.energy_series.push_back(state.energy());
  }
  record.eval_count = target.eval_count();
  return record;
}

ChainRecord parallel_metropolis_chain(const ChainConfig& config) {
  config.validate();
  Target target = config.target;
  target.reset_eval_count();
  SeededStream rng(substream_seed(config.seed, stream_role::kParallelMh));

  const std::size_t agents = config.M;
  const std::size_t dim = target.dimension();
  const double step = std::sqrt(0.25 / config.kernel.beta);
  const double h = config.init_halfwidth;

  std::vector<double> x(agents * dim);
  for (auto& v : x) v = h * (2.0 * rng.uniform() - 1.0);
  std::vector<double> lp(agents);
  for (std::size_t a = 0; a < agents; ++a) lp[a] = target.log_density({x.data() + a * dim, dim});

  ChainRecord record;
  record.N = config.N;
  record.M = agents;
  record.D = dim;
  record.samples.reserve(config.N * agents * dim);
  for (std::size_t t = 0; t < config.N; ++t) {
    for (std::size_t a = 0; a < agents; ++a) {
      const std::span<double> row{x.data() + a * dim, dim};
      for (std::size_t k = 0; k < dim; ++k) {
        const double saved = row[k];
        row[k] = saved + step * rng.normal();
        const double proposed = target.log_density(row);
        if (std::log(1.0 - rng.uniform()) < proposed - lp[a]) {
          lp[a] = proposed;
          ++record.accept_count;
        } else {
          row[k] = saved;
          ++record.reject_count;
        }
      }
    }
    record.samples.insert(record.samples.end(), x.begin(), x.end());
    double v = 0.0;
    for (double l : lp) v -= l;
    record.energy_series.push_back(v);
  }
  record.eval_count = target.eval_count();
  return record;
}

}  // namespace suburban
