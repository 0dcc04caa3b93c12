#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "suburban/random.hpp"

namespace suburban {

/// Immutable description of a D-dimensional benchmark distribution.
class TargetModel {
 public:
  virtual ~TargetModel() = default;

  virtual std::size_t dimension() const = 0;
  /// Log-density up to an additive constant. Must be finite on all of R^D.
  virtual double log_density(std::span<const double> x) const = 0;
  /// Canonical config-file spelling, e.g. "barrier(2,3,0.25)".
  virtual std::string spec() const = 0;

  virtual std::optional<Eigen::VectorXd> known_mean() const { return std::nullopt; }
  virtual std::optional<Eigen::MatrixXd> known_cov() const { return std::nullopt; }

  virtual bool has_direct_sampler() const { return false; }
  /// One exact draw from the normalized density. Throws std::logic_error if
  /// the model has no direct sampler.
  virtual void sample(RandomStream& rng, std::span<double> out) const;
};

struct MixtureComponent {
  double weight;
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

/// Finite Gaussian mixture. log_density is normalized and evaluated by an
/// online log-sum-exp, so it stays finite far from every component.
class GaussianMixture final : public TargetModel {
 public:
  GaussianMixture(std::vector<MixtureComponent> components, std::string spec);

  std::size_t dimension() const override { return dim_; }
  double log_density(std::span<const double> x) const override;
  std::string spec() const override { return spec_; }
  std::optional<Eigen::VectorXd> known_mean() const override { return mean_; }
  std::optional<Eigen::MatrixXd> known_cov() const override { return cov_; }
  bool has_direct_sampler() const override { return true; }
  void sample(RandomStream& rng, std::span<double> out) const override;

  const std::vector<MixtureComponent>& components() const { return components_; }
  /// Log-density of component `c` alone, including its weight.
  double component_log_density(std::size_t c, std::span<const double> x) const;

 private:
  std::size_t dim_;
  std::vector<MixtureComponent> components_;
  // Per component: lower Cholesky factor, its inverse, and the log of
  // weight / sqrt(det(2 pi cov)).
  std::vector<Eigen::MatrixXd> chol_;
  std::vector<Eigen::MatrixXd> chol_inv_;
  std::vector<double> log_scale_;
  std::vector<double> cumulative_weight_;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
  std::string spec_;
};

/// exp(-(x-1)^2 - 100 (y-x^2)^2), unnormalized.
class BananaDensity final : public TargetModel {
 public:
  std::size_t dimension() const override { return 2; }
  double log_density(std::span<const double> x) const override;
  std::string spec() const override { return "banana"; }
  std::optional<Eigen::VectorXd> known_mean() const override;
  bool has_direct_sampler() const override { return true; }
  void sample(RandomStream& rng, std::span<double> out) const override;
};

/// Value handle over a shared immutable model plus a private evaluation
/// counter. Copies start from the copied count; give each chain its own copy
/// and read eval_count() from that copy.
class Target {
 public:
  explicit Target(std::shared_ptr<const TargetModel> model);

  std::size_t dimension() const { return model_->dimension(); }
  const TargetModel& model() const { return *model_; }
  std::string spec() const { return model_->spec(); }

  /// Counted evaluation.
  double log_density(std::span<const double> x) {
    ++evals_;
    return model_->log_density(x);
  }
  std::uint64_t eval_count() const { return evals_; }
  void reset_eval_count() { evals_ = 0; }

  std::optional<Eigen::VectorXd> true_mean() const { return model_->known_mean(); }
  std::optional<Eigen::MatrixXd> true_cov() const { return model_->known_cov(); }
  bool has_direct_sampler() const { return model_->has_direct_sampler(); }

 private:
  std::shared_ptr<const TargetModel> model_;
  std::uint64_t evals_ = 0;
};

Target make_symmetric_mixture(int dim, double mu, double sigma2);
Target make_barrier_gmm(int dim, double barrier, double sigma);
Target make_banana();
/// Random multi-modal landscape, a deterministic function of its arguments.
/// Weights are normalized Uniform[0,1] draws, means are Normal(0, I/stdmu^2),
/// covariances are (W W^T + D I) / stdsig^2 with W standard normal.
Target make_random_landscape(std::uint64_t seed, int components, double stdmu,
                             double stdsig, int dim);
/// Single Gaussian N(mean, cov).
Target make_gaussian(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov);

/// Parses symmetric(D,mu,sigma2) | barrier(D,L,sigma) | banana |
/// landscape(seed,K,stdmu,stdsig,D) | gaussian(D).
Target parse_target(std::string_view spec);

inline constexpr std::uint64_t kOracleSeed = 0x5EEDC0FFEEULL;
inline constexpr std::size_t kOracleSamples = 1'000'000;

struct Moments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  bool exact = true;
  /// Per-coordinate standard error of `mean`; zero when exact.
  Eigen::VectorXd mean_stderr;
  std::size_t oracle_samples = 0;
};

/// Exact mixture moments when the model knows them; otherwise a seeded
/// direct-sampling estimate. Throws std::logic_error if neither is available.
Moments true_moments(const Target& target, std::size_t oracle_samples = kOracleSamples,
                     std::uint64_t oracle_seed = kOracleSeed);

/// One exact i.i.d. draw. Does not touch the evaluation counter.
Eigen::VectorXd direct_sample(const Target& target, RandomStream& rng);

/// Mixture moment formulas: sum w mu, sum w (Sigma + mu mu^T) - mean mean^T.
Moments mixture_moments(const std::vector<MixtureComponent>& components);

/// Shortest round-trip decimal spelling of a double.
std::string format_number(double value);

}  // namespace suburban
