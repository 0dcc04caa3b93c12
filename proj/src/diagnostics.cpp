#include "suburban/diagnostics.hpp"

#include <cmath>
#include <stdexcept>

namespace suburban {

std::size_t burn_in_steps(std::size_t steps, double fraction) {
  if (!(fraction >= 0.0 && fraction < 1.0)) {
    throw std::invalid_argument("burn-in fraction must lie in [0, 1)");
  }
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(steps)));
}

MomentEstimate estimate_moments(const ChainRecord& record, double burn_in_fraction) {
  const std::size_t first = burn_in_steps(record.N, burn_in_fraction);
  const std::size_t n = (record.N - first) * record.M;
  if (n < 2) throw std::invalid_argument("need at least 2 post-burn-in samples");
  const auto dim = static_cast<Eigen::Index>(record.D);

  MomentEstimate est;
  est.count = n;
  est.mean = Eigen::VectorXd::Zero(dim);
  for (std::size_t t = first; t < record.N; ++t) {
    for (std::size_t a = 0; a < record.M; ++a) {
      est.mean += Eigen::Map<const Eigen::VectorXd>(record.sample(t, a).data(), dim);
    }
  }
  est.mean /= static_cast<double>(n);

  est.cov = Eigen::MatrixXd::Zero(dim, dim);
  for (std::size_t t = first; t < record.N; ++t) {
    for (std::size_t a = 0; a < record.M; ++a) {
      const Eigen::VectorXd r =
          Eigen::Map<const Eigen::VectorXd>(record.sample(t, a).data(), dim) - est.mean;
      est.cov.noalias() += r * r.transpose();
    }
  }
  est.cov /= static_cast<double>(n);
  return est;
}

MomentAccumulator::MomentAccumulator(std::size_t dim)
    : mean_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim))),
      comoment_(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim),
                                      static_cast<Eigen::Index>(dim))) {}

void MomentAccumulator::add(std::span<const double> x) {
  const Eigen::Map<const Eigen::VectorXd> v(x.data(), mean_.size());
  ++count_;
  const Eigen::VectorXd delta = v - mean_;
  mean_ += delta / static_cast<double>(count_);
  comoment_.noalias() += delta * (v - mean_).transpose();
}

MomentEstimate MomentAccumulator::result() const {
  if (count_ == 0) throw std::invalid_argument("empty sample set");
  return {mean_, comoment_ / static_cast<double>(count_), count_};
}

Distances distance_metrics(const Eigen::VectorXd& mean_inf, const Eigen::MatrixXd& cov_inf,
                           const Eigen::VectorXd& mean_true, const Eigen::MatrixXd& cov_true) {
  if (mean_inf.size() != mean_true.size() || cov_inf.rows() != cov_true.rows() ||
      cov_inf.cols() != cov_true.cols()) {
    throw std::invalid_argument("moment dimension mismatch");
  }
  return {(mean_inf - mean_true).norm(), (cov_inf - cov_true).norm()};
}

namespace {

double series_mean(std::span<const double> series) {
  double s = 0.0;
  for (double v : series) s += v;
  return s / static_cast<double>(series.size());
}

}  // namespace

double autocovariance(std::span<const double> series, long lag) {
  const auto n = static_cast<long>(series.size());
  if (n < 2) throw std::invalid_argument("autocovariance needs N >= 2");
  const long k = lag < 0 ? -lag : lag;
  if (k >= n) throw std::out_of_range("autocovariance lag must satisfy |k| < N");
  const double mean = series_mean(series);
  double acc = 0.0;
  for (long t = 0; t + k < n; ++t) {
    acc += (series[static_cast<std::size_t>(t)] - mean) *
           (series[static_cast<std::size_t>(t + k)] - mean);
  }
  return acc / static_cast<double>(n);
}

std::vector<double> autocovariances(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 2) throw std::invalid_argument("autocovariance needs N >= 2");
  const double mean = series_mean(series);
  std::vector<double> centered(n);
  for (std::size_t t = 0; t < n; ++t) centered[t] = series[t] - mean;
  std::vector<double> c(n);
  for (std::size_t k = 0; k < n; ++k) {
    double acc = 0.0;
    for (std::size_t t = 0; t + k < n; ++t) acc += centered[t] * centered[t + k];
    c[k] = acc / static_cast<double>(n);
  }
  return c;
}

double decay_time(std::span<const double> series) {
  const auto c = autocovariances(series);
  if (!(c[0] > 0.0)) throw std::domain_error("decay time undefined for a constant series");
  const double n = static_cast<double>(series.size());
  double tail = 0.0;
  for (std::size_t k = 1; k < c.size(); ++k) {
    tail += (1.0 - static_cast<double>(k) / n) * std::abs(c[k] / c[0]);
  }
  return 1.0 + 2.0 * tail;
}

namespace {

Eigen::MatrixXd whitening(const Eigen::MatrixXd& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw std::domain_error("true covariance is singular or not positive definite");
  }
  const Eigen::MatrixXd lower = llt.matrixL();
  return lower.triangularView<Eigen::Lower>().solve(
      Eigen::MatrixXd::Identity(cov.rows(), cov.cols()));
}

std::size_t shell(const Eigen::MatrixXd& white, const Eigen::VectorXd& mean,
                  std::span<const double> x) {
  const Eigen::Map<const Eigen::VectorXd> v(x.data(), mean.size());
  const double r2 = (white * (v - mean)).squaredNorm();
  if (r2 < 1.0) return 0;
  if (r2 < 4.0) return 1;
  if (r2 < 9.0) return 2;
  return 3;
}

}  // namespace

RegionCounts region_counts(std::span<const double> samples, std::size_t dim,
                           const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov) {
  if (dim == 0 || samples.size() % dim != 0 || static_cast<std::size_t>(mean.size()) != dim) {
    throw std::invalid_argument("sample array does not match dimension");
  }
  const auto white = whitening(cov);
  RegionCounts counts{};
  for (std::size_t i = 0; i < samples.size(); i += dim) {
    ++counts[shell(white, mean, samples.subspan(i, dim))];
  }
  return counts;
}

std::array<double, kTailRegions> TailOracle::probabilities() const {
  std::array<double, kTailRegions> p{};
  for (std::size_t r = 0; r < kTailRegions; ++r) {
    p[r] = static_cast<double>(counts[r]) / static_cast<double>(total);
  }
  return p;
}

TailOracle tail_oracle(const Target& target, const Moments& moments, std::size_t samples,
                       std::uint64_t seed) {
  if (!target.has_direct_sampler()) {
    throw std::logic_error("tail oracle needs a direct sampler");
  }
  if (samples == 0) throw std::invalid_argument("tail oracle needs samples");
  const auto white = whitening(moments.cov);
  SeededStream rng(seed);
  TailOracle oracle;
  oracle.total = samples;
  std::vector<double> x(target.dimension());
  for (std::size_t i = 0; i < samples; ++i) {
    target.model().sample(rng, x);
    ++oracle.counts[shell(white, moments.mean, x)];
  }
  return oracle;
}

std::array<double, kTailRegions> tail_fractions(const RegionCounts& inferred,
                                                const TailOracle& oracle) {
  std::uint64_t total = 0;
  for (auto c : inferred) total += c;
  if (total == 0 || oracle.total == 0) throw std::invalid_argument("empty region counts");
  // Integer numerators so the four numerators sum to exactly zero.
  const double denom = static_cast<double>(total) * static_cast<double>(oracle.total);
  std::array<double, kTailRegions> f{};
  for (std::size_t r = 0; r < kTailRegions; ++r) {
    const auto lhs = static_cast<__int128>(inferred[r]) * oracle.total;
    const auto rhs = static_cast<__int128>(oracle.counts[r]) * total;
    f[r] = static_cast<double>(lhs - rhs) / denom;
  }
  return f;
}

std::array<double, kTailRegions> tail_fractions(const ChainRecord& record,
                                                double burn_in_fraction, const Target& target,
                                                std::size_t oracle_sample_count) {
  const auto truth = true_moments(target);
  const auto oracle = tail_oracle(target, truth, oracle_sample_count);
  const std::size_t first = burn_in_steps(record.N, burn_in_fraction);
  const std::span<const double> post(record.samples.data() + first * record.M * record.D,
                                     (record.N - first) * record.M * record.D);
  return tail_fractions(region_counts(post, record.D, truth.mean, truth.cov), oracle);
}

double rejection_rate(const ChainRecord& record) {
  const auto total = record.accept_count + record.reject_count;
  if (total == 0) throw std::invalid_argument("rejection rate undefined with zero updates");
  return static_cast<double>(record.reject_count) / static_cast<double>(total);
}

MetricReport summarize_chain(const ChainRecord& record, const Moments& truth,
                             const TailOracle& oracle, double burn_in_fraction) {
  MetricReport report;
  const auto est = estimate_moments(record, burn_in_fraction);
  const auto dist = distance_metrics(est.mean, est.cov, truth.mean, truth.cov);
  report.d_mean = dist.d_mean;
  report.d_cov = dist.d_cov;
  report.mean_inf = est.mean;
  report.rejection_rate = rejection_rate(record);
  report.tau_dec = decay_time(record.energy_series);

  const std::size_t first = burn_in_steps(record.N, burn_in_fraction);
  const std::span<const double> post(record.samples.data() + first * record.M * record.D,
                                     (record.N - first) * record.M * record.D);
  report.tail_fractions =
      tail_fractions(region_counts(post, record.D, truth.mean, truth.cov), oracle);
  report.eval_count = record.eval_count;

  if (!record.edge_counts.empty()) {
    double sum = 0.0;
    for (auto e : record.edge_counts) sum += static_cast<double>(e);
    report.d_eff_realized = sum / static_cast<double>(record.edge_counts.size()) /
                            static_cast<double>(record.M);
  }
  return report;
}

}  // namespace suburban
