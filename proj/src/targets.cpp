#include "suburban/targets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace suburban {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

std::string join_spec(std::string_view name, std::initializer_list<double> args) {
  std::string out(name);
  out += '(';
  bool first = true;
  for (double a : args) {
    if (!first) out += ',';
    out += format_number(a);
    first = false;
  }
  out += ')';
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_double(std::string_view token, std::string_view context) {
  const std::string text(trim(token));
  char* end = nullptr;
  const double value = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) {
    throw std::invalid_argument("bad number '" + text + "' in target spec '" +
                                std::string(context) + "'");
  }
  return value;
}

int parse_int(std::string_view token, std::string_view context) {
  const double v = parse_double(token, context);
  if (v != std::floor(v) || std::abs(v) > 1e9) {
    throw std::invalid_argument("expected integer in target spec '" + std::string(context) + "'");
  }
  return static_cast<int>(v);
}

}  // namespace

std::string format_number(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
  return std::string(buf, ptr);
}

void TargetModel::sample(RandomStream&, std::span<double>) const {
  throw std::logic_error("target '" + spec() + "' has no direct sampler");
}

// ---------------------------------------------------------------------------
// GaussianMixture

GaussianMixture::GaussianMixture(std::vector<MixtureComponent> components, std::string spec)
    : components_(std::move(components)), spec_(std::move(spec)) {
  if (components_.empty()) throw std::invalid_argument("mixture needs at least one component");
  dim_ = static_cast<std::size_t>(components_.front().mean.size());
  if (dim_ == 0) throw std::invalid_argument("mixture dimension must be positive");

  double total = 0.0;
  double running = 0.0;
  for (const auto& c : components_) {
    if (static_cast<std::size_t>(c.mean.size()) != dim_ ||
        static_cast<std::size_t>(c.cov.rows()) != dim_ ||
        static_cast<std::size_t>(c.cov.cols()) != dim_) {
      throw std::invalid_argument("mixture component dimension mismatch");
    }
    if (!(c.weight >= 0.0)) throw std::invalid_argument("mixture weights must be nonnegative");
    const double scale = std::max(1.0, c.cov.cwiseAbs().maxCoeff());
    if ((c.cov - c.cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
      throw std::invalid_argument("mixture covariance must be symmetric");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(c.cov);
    if (llt.info() != Eigen::Success) {
      throw std::invalid_argument("mixture covariance must be positive definite");
    }
    Eigen::MatrixXd lower = llt.matrixL();
    Eigen::MatrixXd inverse =
        lower.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(
            static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(dim_)));
    const double log_det = 2.0 * lower.diagonal().array().log().sum();
    log_scale_.push_back(std::log(c.weight) - 0.5 * (static_cast<double>(dim_) * kLog2Pi + log_det));
    chol_.push_back(std::move(lower));
    chol_inv_.push_back(std::move(inverse));
    total += c.weight;
    running += c.weight;
    cumulative_weight_.push_back(running);
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("mixture weights must sum to 1");
  cumulative_weight_.back() = 1.0;

  const auto moments = mixture_moments(components_);
  mean_ = moments.mean;
  cov_ = moments.cov;
}

double GaussianMixture::component_log_density(std::size_t c, std::span<const double> x) const {
  const auto& mu = components_[c].mean;
  const auto& inv = chol_inv_[c];
  double quad = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) {
    double z = 0.0;
    for (std::size_t j = 0; j <= i; ++j) {
      z += inv(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) *
           (x[j] - mu[static_cast<Eigen::Index>(j)]);
    }
    quad += z * z;
  }
  return log_scale_[c] - 0.5 * quad;
}

double GaussianMixture::log_density(std::span<const double> x) const {
  double peak = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (std::size_t c = 0; c < components_.size(); ++c) {
    const double term = component_log_density(c, x);
    if (term > peak) {
      sum = sum * std::exp(peak - term) + 1.0;
      peak = term;
    } else {
      sum += std::exp(term - peak);
    }
  }
  return peak + std::log(sum);
}

void GaussianMixture::sample(RandomStream& rng, std::span<double> out) const {
  const double u = rng.uniform();
  const auto it = std::upper_bound(cumulative_weight_.begin(), cumulative_weight_.end(), u);
  const auto c = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_weight_.begin()),
                                       components_.size() - 1);
  Eigen::VectorXd z(static_cast<Eigen::Index>(dim_));
  for (auto& zi : z) zi = rng.normal();
  const Eigen::VectorXd x = components_[c].mean + chol_[c] * z;
  std::copy(x.begin(), x.end(), out.begin());
}

Moments mixture_moments(const std::vector<MixtureComponent>& components) {
  const auto dim = components.front().mean.size();
  Moments m;
  m.mean = Eigen::VectorXd::Zero(dim);
  m.cov = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto& c : components) {
    m.mean += c.weight * c.mean;
    m.cov += c.weight * (c.cov + c.mean * c.mean.transpose());
  }
  m.cov -= m.mean * m.mean.transpose();
  m.cov = 0.5 * (m.cov + m.cov.transpose());
  m.exact = true;
  m.mean_stderr = Eigen::VectorXd::Zero(dim);
  return m;
}

// ---------------------------------------------------------------------------
// Banana

double BananaDensity::log_density(std::span<const double> x) const {
  const double a = x[0] - 1.0;
  const double b = x[1] - x[0] * x[0];
  return -a * a - 100.0 * b * b;
}

std::optional<Eigen::VectorXd> BananaDensity::known_mean() const {
  return Eigen::Vector2d(1.0, 1.5);
}

void BananaDensity::sample(RandomStream& rng, std::span<double> out) const {
  const double x = 1.0 + std::sqrt(0.5) * rng.normal();
  const double y = x * x + std::sqrt(1.0 / 200.0) * rng.normal();
  out[0] = x;
  out[1] = y;
}

// ---------------------------------------------------------------------------
// Target handle and factories

Target::Target(std::shared_ptr<const TargetModel> model) : model_(std::move(model)) {
  if (!model_) throw std::invalid_argument("null target model");
}

Target make_symmetric_mixture(int dim, double mu, double sigma2) {
  if (dim < 1) throw std::invalid_argument("symmetric mixture needs D >= 1");
  if (!(sigma2 > 0.0)) throw std::invalid_argument("symmetric mixture needs sigma2 > 0");
  const Eigen::MatrixXd cov = sigma2 * Eigen::MatrixXd::Identity(dim, dim);
  std::vector<MixtureComponent> comps;
  for (int axis = 0; axis < dim; ++axis) {
    for (double sign : {1.0, -1.0}) {
      Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
      mean[axis] = sign * mu;
      comps.push_back({1.0 / (2.0 * dim), mean, cov});
    }
  }
  return Target(std::make_shared<GaussianMixture>(
      std::move(comps), join_spec("symmetric", {double(dim), mu, sigma2})));
}

Target make_barrier_gmm(int dim, double barrier, double sigma) {
  if (dim < 1) throw std::invalid_argument("barrier mixture needs D >= 1");
  if (!(barrier > 0.0)) throw std::invalid_argument("barrier length must be positive");
  if (!(sigma > 0.0)) throw std::invalid_argument("barrier sigma must be positive");
  const Eigen::MatrixXd cov = sigma * sigma * Eigen::MatrixXd::Identity(dim, dim);
  Eigen::VectorXd plus = Eigen::VectorXd::Zero(dim);
  plus[0] = barrier;
  std::vector<MixtureComponent> comps{{0.75, plus, cov}, {0.25, -plus, cov}};
  return Target(std::make_shared<GaussianMixture>(
      std::move(comps), join_spec("barrier", {double(dim), barrier, sigma})));
}

Target make_banana() { return Target(std::make_shared<BananaDensity>()); }

Target make_random_landscape(std::uint64_t seed, int components, double stdmu, double stdsig,
                             int dim) {
  if (components < 1) throw std::invalid_argument("landscape needs K >= 1");
  if (dim < 1) throw std::invalid_argument("landscape needs D >= 1");
  if (!(stdmu > 0.0) || !(stdsig > 0.0)) {
    throw std::invalid_argument("landscape stdmu and stdsig must be positive");
  }
  SeededStream rng(seed);
  std::vector<double> weights(static_cast<std::size_t>(components));
  for (auto& w : weights) w = rng.uniform();
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) throw std::runtime_error("degenerate landscape weights");

  std::vector<MixtureComponent> comps;
  comps.reserve(weights.size());
  for (double w : weights) {
    Eigen::VectorXd mean(dim);
    for (auto& v : mean) v = rng.normal() / stdmu;
    comps.push_back({w / total, mean, Eigen::MatrixXd()});
  }
  for (auto& c : comps) {
    Eigen::MatrixXd w(dim, dim);
    for (auto& v : w.reshaped()) v = rng.normal();
    Eigen::MatrixXd cov = w * w.transpose() + dim * Eigen::MatrixXd::Identity(dim, dim);
    cov /= stdsig * stdsig;
    c.cov = 0.5 * (cov + cov.transpose());
  }
  // Renormalize so the weights sum to one to rounding.
  double sum = 0.0;
  for (const auto& c : comps) sum += c.weight;
  for (auto& c : comps) c.weight /= sum;

  return Target(std::make_shared<GaussianMixture>(
      std::move(comps), "landscape(" + std::to_string(seed) + "," + std::to_string(components) +
                            "," + format_number(stdmu) + "," + format_number(stdsig) + "," +
                            std::to_string(dim) + ")"));
}

Target make_gaussian(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov) {
  std::string spec = "gaussian(" + std::to_string(mean.size()) + ")";
  return Target(std::make_shared<GaussianMixture>(
      std::vector<MixtureComponent>{{1.0, mean, cov}}, std::move(spec)));
}

Target parse_target(std::string_view text) {
  const std::string_view spec = trim(text);
  const auto open = spec.find('(');
  const std::string_view name = trim(spec.substr(0, open));
  std::vector<std::string_view> args;
  if (open != std::string_view::npos) {
    if (spec.back() != ')') {
      throw std::invalid_argument("unterminated target spec '" + std::string(spec) + "'");
    }
    std::string_view inner = spec.substr(open + 1, spec.size() - open - 2);
    while (true) {
      const auto comma = inner.find(',');
      args.push_back(inner.substr(0, comma));
      if (comma == std::string_view::npos) break;
      inner.remove_prefix(comma + 1);
    }
  }
  auto expect = [&](std::size_t n) {
    if (args.size() != n) {
      throw std::invalid_argument("target '" + std::string(name) + "' expects " +
                                  std::to_string(n) + " arguments");
    }
  };

  if (name == "symmetric") {
    expect(3);
    return make_symmetric_mixture(parse_int(args[0], spec), parse_double(args[1], spec),
                                  parse_double(args[2], spec));
  }
  if (name == "barrier") {
    expect(3);
    return make_barrier_gmm(parse_int(args[0], spec), parse_double(args[1], spec),
                            parse_double(args[2], spec));
  }
  if (name == "banana") {
    if (open != std::string_view::npos && !(args.size() == 1 && trim(args[0]).empty())) {
      throw std::invalid_argument("banana takes no arguments");
    }
    return make_banana();
  }
  if (name == "landscape") {
    expect(5);
    const double seed = parse_double(args[0], spec);
    if (seed < 0 || seed != std::floor(seed)) {
      throw std::invalid_argument("landscape seed must be a nonnegative integer");
    }
    return make_random_landscape(static_cast<std::uint64_t>(seed), parse_int(args[1], spec),
                                 parse_double(args[2], spec), parse_double(args[3], spec),
                                 parse_int(args[4], spec));
  }
  if (name == "gaussian") {
    expect(1);
    const int dim = parse_int(args[0], spec);
    if (dim < 1) throw std::invalid_argument("gaussian needs D >= 1");
    return make_gaussian(Eigen::VectorXd::Zero(dim), Eigen::MatrixXd::Identity(dim, dim));
  }
  throw std::invalid_argument("unknown target '" + std::string(name) + "'");
}

Moments true_moments(const Target& target, std::size_t oracle_samples,
                     std::uint64_t oracle_seed) {
  const auto mean = target.true_mean();
  const auto cov = target.true_cov();
  if (mean && cov) {
    Moments m;
    m.mean = *mean;
    m.cov = *cov;
    m.exact = true;
    m.mean_stderr = Eigen::VectorXd::Zero(mean->size());
    return m;
  }
  if (!target.has_direct_sampler()) {
    throw std::logic_error("target '" + target.spec() + "' has neither exact moments nor a sampler");
  }
  if (oracle_samples < 2) throw std::invalid_argument("oracle needs at least 2 samples");

  const auto dim = static_cast<Eigen::Index>(target.dimension());
  SeededStream rng(oracle_seed);
  Eigen::VectorXd x(dim);
  Eigen::VectorXd running_mean = Eigen::VectorXd::Zero(dim);
  Eigen::MatrixXd comoment = Eigen::MatrixXd::Zero(dim, dim);
  for (std::size_t n = 1; n <= oracle_samples; ++n) {
    target.model().sample(rng, {x.data(), static_cast<std::size_t>(dim)});
    const Eigen::VectorXd delta = x - running_mean;
    running_mean += delta / static_cast<double>(n);
    comoment += delta * (x - running_mean).transpose();
  }
  Moments m;
  m.exact = false;
  m.oracle_samples = oracle_samples;
  m.mean = running_mean;
  m.cov = comoment / static_cast<double>(oracle_samples);
  m.cov = 0.5 * (m.cov + m.cov.transpose());
  m.mean_stderr = (m.cov.diagonal() / static_cast<double>(oracle_samples)).cwiseSqrt();
  return m;
}

Eigen::VectorXd direct_sample(const Target& target, RandomStream& rng) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(target.dimension()));
  target.model().sample(rng, {x.data(), target.dimension()});
  return x;
}

}  // namespace suburban
