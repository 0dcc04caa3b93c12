#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "suburban/engine.hpp"
#include "suburban/targets.hpp"

namespace suburban {

struct MomentEstimate {
  Eigen::VectorXd mean;
  /// Biased (1/n) covariance.
  Eigen::MatrixXd cov;
  std::size_t count = 0;
};

/// Number of leading timesteps dropped for a given burn-in fraction.
std::size_t burn_in_steps(std::size_t steps, double fraction);

/// Pools every post-burn-in (t, agent) vector; two-pass mean and covariance.
MomentEstimate estimate_moments(const ChainRecord& record, double burn_in_fraction);

/// One-pass (Welford) mean and covariance.
class MomentAccumulator {
 public:
  explicit MomentAccumulator(std::size_t dim);
  void add(std::span<const double> x);
  MomentEstimate result() const;

 private:
  std::size_t count_ = 0;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd comoment_;
};

struct Distances {
  double d_mean;
  double d_cov;
};

/// Euclidean distance between means, Frobenius distance between covariances.
Distances distance_metrics(const Eigen::VectorXd& mean_inf, const Eigen::MatrixXd& cov_inf,
                           const Eigen::VectorXd& mean_true, const Eigen::MatrixXd& cov_true);

/// c(k) = (1/N) sum_{t=1}^{N-|k|} (V_t - Vbar)(V_{t+|k|} - Vbar), for |k| < N.
double autocovariance(std::span<const double> series, long lag);

/// c(0..N-1).
std::vector<double> autocovariances(std::span<const double> series);

/// sum_{-N<k<N} (1 - |k|/N) |c(k) / c(0)| over the whole series. Throws
/// std::domain_error for a constant series.
double decay_time(std::span<const double> series);

/// Mahalanobis shells [0,1), [1,2), [2,3), [3,inf).
inline constexpr std::size_t kTailRegions = 4;
using RegionCounts = std::array<std::uint64_t, kTailRegions>;

/// Shell index of every row of a flat n x D sample array. Throws
/// std::domain_error if `cov` is not positive definite.
RegionCounts region_counts(std::span<const double> samples, std::size_t dim,
                           const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov);

/// Reference shell counts from direct draws of the target.
struct TailOracle {
  RegionCounts counts{};
  std::uint64_t total = 0;

  std::array<double, kTailRegions> probabilities() const;
};

TailOracle tail_oracle(const Target& target, const Moments& moments,
                       std::size_t samples = kOracleSamples, std::uint64_t seed = kOracleSeed);

/// f_region = (N_inf - N_true) / N_total with N_true = p_oracle * N_total.
/// The four values sum to zero up to a single rounding of each.
std::array<double, kTailRegions> tail_fractions(const RegionCounts& inferred,
                                                const TailOracle& oracle);

/// Convenience over a chain's post-burn-in samples.
std::array<double, kTailRegions> tail_fractions(const ChainRecord& record,
                                                double burn_in_fraction, const Target& target,
                                                std::size_t oracle_sample_count);

/// Rejected sub-updates over all sub-updates. Throws if there were none.
double rejection_rate(const ChainRecord& record);

struct MetricReport {
  double d_mean = 0.0;
  double d_cov = 0.0;
  double rejection_rate = 0.0;
  double tau_dec = 0.0;
  std::array<double, kTailRegions> tail_fractions{};
  std::uint64_t eval_count = 0;
  /// Mean over timesteps of |edges| / M.
  double d_eff_realized = 0.0;
  double wall_seconds = 0.0;
  Eigen::VectorXd mean_inf;
};

/// All per-trial metrics for one finished chain.
MetricReport summarize_chain(const ChainRecord& record, const Moments& truth,
                             const TailOracle& oracle, double burn_in_fraction);

}  // namespace suburban
