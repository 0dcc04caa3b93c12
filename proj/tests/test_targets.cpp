#include "doctest.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "suburban/targets.hpp"
#include "test_support.hpp"

using namespace suburban;

namespace {

double density_at(Target& t, double x, double y) {
  const std::array<double, 2> p{x, y};
  return std::exp(t.log_density(p));
}

double integrate_1d(Target& t, double lo, double hi, double h) {
  double total = 0.0;
  for (double x = lo; x <= hi; x += h) {
    const std::array<double, 1> p{x};
    total += std::exp(t.log_density(p));
  }
  return total * h;
}

double integrate_2d(Target& t, double lo, double hi, double h) {
  double total = 0.0;
  for (double x = lo; x <= hi; x += h) {
    for (double y = lo; y <= hi; y += h) total += density_at(t, x, y);
  }
  return total * h * h;
}

// Sample moments with standard errors of every mean and covariance entry.
struct SampleCheck {
  Eigen::VectorXd mean, mean_se;
  Eigen::MatrixXd cov, cov_se;
};

SampleCheck sample_check(const Target& t, std::size_t n, std::uint64_t seed) {
  SeededStream rng(seed);
  const auto dim = static_cast<Eigen::Index>(t.dimension());
  Eigen::MatrixXd xs(static_cast<Eigen::Index>(n), dim);
  for (std::size_t i = 0; i < n; ++i) xs.row(static_cast<Eigen::Index>(i)) = direct_sample(t, rng);
  SampleCheck c;
  c.mean = xs.colwise().mean();
  const Eigen::MatrixXd centered = xs.rowwise() - c.mean.transpose();
  c.cov.resize(dim, dim);
  c.cov_se.resize(dim, dim);
  c.mean_se.resize(dim);
  const double nd = static_cast<double>(n);
  for (Eigen::Index a = 0; a < dim; ++a) {
    c.mean_se(a) = std::sqrt(centered.col(a).squaredNorm() / (nd - 1) / nd);
    for (Eigen::Index b = 0; b < dim; ++b) {
      const Eigen::VectorXd prod = centered.col(a).cwiseProduct(centered.col(b));
      c.cov(a, b) = prod.mean();
      c.cov_se(a, b) = std::sqrt((prod.array() - c.cov(a, b)).square().sum() / (nd - 1) / nd);
    }
  }
  return c;
}

void check_against_truth(const SampleCheck& c, const Moments& truth, double k) {
  for (Eigen::Index a = 0; a < c.mean.size(); ++a) {
    CHECK(std::abs(c.mean(a) - truth.mean(a)) < k * c.mean_se(a));
    for (Eigen::Index b = 0; b < c.mean.size(); ++b) {
      CHECK(std::abs(c.cov(a, b) - truth.cov(a, b)) < k * c.cov_se(a, b) + 1e-12);
    }
  }
}

class NoSampler final : public TargetModel {
 public:
  std::size_t dimension() const override { return 1; }
  double log_density(std::span<const double> x) const override { return -x[0] * x[0]; }
  std::string spec() const override { return "nosampler"; }
};

}  // namespace

TEST_CASE("symmetric mixture components and moments") {
  const Target t = make_symmetric_mixture(2, 1.5, 0.25);
  const auto& mix = dynamic_cast<const GaussianMixture&>(t.model());
  REQUIRE(mix.components().size() == 4);
  std::vector<std::pair<double, double>> centers;
  for (const auto& c : mix.components()) {
    CHECK(c.weight == doctest::Approx(0.25));
    CHECK(c.cov.isApprox(0.25 * Eigen::MatrixXd::Identity(2, 2)));
    centers.emplace_back(c.mean(0), c.mean(1));
  }
  std::sort(centers.begin(), centers.end());
  CHECK(centers == std::vector<std::pair<double, double>>{
                       {-1.5, 0.0}, {0.0, -1.5}, {0.0, 1.5}, {1.5, 0.0}});
  CHECK(t.true_mean()->norm() < 1e-15);
  // sigma^2 I + (1/4) sum of mu mu^T over the four axis means.
  CHECK((*t.true_cov() - 1.375 * Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-12);

  const Target point = make_symmetric_mixture(1, 0.0, 0.3);
  CHECK(point.true_cov()->coeff(0, 0) == doctest::Approx(0.3));
  CHECK_THROWS_AS(make_symmetric_mixture(2, 1.5, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(make_symmetric_mixture(0, 1.5, 0.25), std::invalid_argument);
}

TEST_CASE("barrier mixture moments") {
  const Target t = make_barrier_gmm(2, 3.0, 0.25);
  const auto& mix = dynamic_cast<const GaussianMixture&>(t.model());
  REQUIRE(mix.components().size() == 2);
  CHECK(mix.components()[0].weight + mix.components()[1].weight == doctest::Approx(1.0));
  const Eigen::Vector2d mean = *t.true_mean();
  CHECK(mean(0) == doctest::Approx(1.5));
  CHECK(mean(1) == doctest::Approx(0.0));
  // 0.0625 + 0.25 * 9 + 0.75 * 9 - 1.5^2.
  CHECK(t.true_cov()->coeff(0, 0) == doctest::Approx(6.8125));
  CHECK(t.true_cov()->coeff(1, 1) == doctest::Approx(0.0625));
  CHECK(t.true_cov()->coeff(0, 1) == doctest::Approx(0.0));

  const Target narrow = make_barrier_gmm(2, 1e-9, 0.25);
  CHECK(narrow.true_mean()->norm() < 1e-8);
  CHECK_THROWS_AS(make_barrier_gmm(2, -1.0, 0.25), std::invalid_argument);
  CHECK_THROWS_AS(make_barrier_gmm(2, 3.0, 0.0), std::invalid_argument);
}

TEST_CASE("banana density") {
  Target t = make_banana();
  const std::array<double, 2> a{1.0, 1.0}, b{0.0, 0.0};
  CHECK(t.log_density(a) - t.log_density(b) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(t.log_density(a) == doctest::Approx(0.0));
  CHECK_FALSE(t.true_cov().has_value());

  const auto c = sample_check(t, 200'000, 3);
  CHECK(std::abs(c.mean(0) - 1.0) < 5 * c.mean_se(0));
  CHECK(std::abs(c.mean(1) - 1.5) < 5 * c.mean_se(1));
  CHECK(std::abs(c.cov(0, 0) - 0.5) < 5 * c.cov_se(0, 0));
  CHECK(std::abs(c.cov(0, 1) - 1.0) < 5 * c.cov_se(0, 1));
  CHECK(std::abs(c.cov(1, 1) - 2.505) < 5 * c.cov_se(1, 1));
}

TEST_CASE("banana oracle agrees with the closed form") {
  const Target t = make_banana();
  const auto m = true_moments(t);
  CHECK_FALSE(m.exact);
  CHECK(m.oracle_samples == kOracleSamples);
  const auto c = sample_check(t, kOracleSamples, 17);
  Eigen::Matrix2d cov;
  cov << 0.5, 1.0, 1.0, 2.505;
  for (int a = 0; a < 2; ++a) {
    CHECK(std::abs(m.mean(a) - (a == 0 ? 1.0 : 1.5)) < 5 * c.mean_se(a));
    CHECK(m.mean_stderr(a) == doctest::Approx(c.mean_se(a)).epsilon(0.05));
    for (int b = 0; b < 2; ++b) CHECK(std::abs(m.cov(a, b) - cov(a, b)) < 5 * c.cov_se(a, b));
  }
}

TEST_CASE("mixture densities integrate to one") {
  SUBCASE("one dimension") {
    Target s = make_symmetric_mixture(1, 1.5, 0.25);
    CHECK(integrate_1d(s, -15, 15, 1e-3) == doctest::Approx(1.0).epsilon(1e-3));
    Target b = make_barrier_gmm(1, 3.0, 0.25);
    CHECK(integrate_1d(b, -15, 15, 1e-3) == doctest::Approx(1.0).epsilon(1e-3));
  }
  SUBCASE("two dimensions") {
    Target s = make_symmetric_mixture(2, 1.5, 0.25);
    CHECK(integrate_2d(s, -8, 8, 0.02) == doctest::Approx(1.0).epsilon(1e-3));
    Target b = make_barrier_gmm(2, 3.0, 0.25);
    CHECK(integrate_2d(b, -8, 8, 0.02) == doctest::Approx(1.0).epsilon(1e-3));
    Target l = make_random_landscape(40, 20, 0.4, 10.0, 2);
    CHECK(integrate_2d(l, -15, 15, 0.02) == doctest::Approx(1.0).epsilon(1e-3));
  }
}

TEST_CASE("mixture true moments agree with direct sampling") {
  for (const char* spec : {"symmetric(2,1.5,0.25)", "barrier(2,3,0.25)",
                           "landscape(40,20,0.4,10,2)", "symmetric(3,1,0.5)"}) {
    CAPTURE(spec);
    const Target t = parse_target(spec);
    const auto m = true_moments(t);
    CHECK(m.exact);
    check_against_truth(sample_check(t, kOracleSamples, 23), m, 4.0);
  }
}

TEST_CASE("symmetric mixture is invariant under signed permutations") {
  Target t = make_symmetric_mixture(3, 1.5, 0.25);
  SeededStream rng(4);
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    std::array<double, 3> x{};
    for (auto& v : x) v = 3.0 * rng.normal();
    std::array<int, 3> perm{0, 1, 2};
    std::shuffle(perm.begin(), perm.end(), rng);
    std::array<double, 3> y{};
    for (int k = 0; k < 3; ++k) y[k] = (rng.uniform() < 0.5 ? -1.0 : 1.0) * x[perm[k]];
    worst = std::max(worst, std::abs(t.log_density(x) - t.log_density(y)));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("log-density stays finite far from every mode") {
  Target t = make_symmetric_mixture(2, 1.5, 0.25);
  const std::array<double, 2> far{500.0, -800.0};
  CHECK(std::isfinite(t.log_density(far)));
  Target l = make_random_landscape(40, 20, 0.4, 10.0, 2);
  CHECK(std::isfinite(l.log_density(far)));
}

TEST_CASE("evaluation counter is exact") {
  Target t = make_banana();
  Target other = t;
  const std::array<double, 2> x{0.3, 0.1};
  for (int i = 0; i < 1234; ++i) t.log_density(x);
  CHECK(t.eval_count() == 1234);
  CHECK(other.eval_count() == 0);
  SeededStream rng(1);
  direct_sample(t, rng);
  true_moments(make_symmetric_mixture(2, 1.5, 0.25));
  CHECK(t.eval_count() == 1234);
  t.reset_eval_count();
  CHECK(t.eval_count() == 0);
}

TEST_CASE("random landscape") {
  const Target a = make_random_landscape(40, 20, 0.4, 10.0, 2);
  const Target b = make_random_landscape(40, 20, 0.4, 10.0, 2);
  const Target c = make_random_landscape(41, 20, 0.4, 10.0, 2);
  CHECK(a.true_mean()->isApprox(*b.true_mean()));
  CHECK(a.true_cov()->isApprox(*b.true_cov()));
  CHECK_FALSE(a.true_mean()->isApprox(*c.true_mean()));

  const auto& mix = dynamic_cast<const GaussianMixture&>(a.model());
  REQUIRE(mix.components().size() == 20);
  double lo = 0.0, hi = 0.0, wsum = 0.0;
  for (const auto& comp : mix.components()) {
    wsum += comp.weight;
    CHECK(comp.weight >= 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(comp.cov);
    CHECK(eig.eigenvalues().minCoeff() > 0.0);
    CHECK(std::sqrt(eig.eigenvalues().maxCoeff()) < 1.0);
    lo = std::min(lo, comp.mean.minCoeff());
    hi = std::max(hi, comp.mean.maxCoeff());
  }
  CHECK(wsum == doctest::Approx(1.0));
  // Means are Normal(0, 6.25): spread over a few units, within about 3 sd.
  CHECK(hi - lo > 3.0);
  CHECK(std::max(-lo, hi) < 10.0);

  const Target single = make_random_landscape(7, 1, 0.4, 10.0, 2);
  CHECK(dynamic_cast<const GaussianMixture&>(single.model()).components()[0].weight == 1.0);
  CHECK_THROWS_AS(make_random_landscape(1, 0, 0.4, 10.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(make_random_landscape(1, 5, 0.0, 10.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(make_random_landscape(1, 5, 0.4, -1.0, 2), std::invalid_argument);
}

TEST_CASE("single Gaussian moments are its parameters") {
  Eigen::Vector2d mean(0.5, -1.0);
  Eigen::Matrix2d cov;
  cov << 2.0, 0.3, 0.3, 1.0;
  const Target g = make_gaussian(mean, cov);
  const auto m = true_moments(g);
  CHECK(m.exact);
  CHECK((m.mean - mean).norm() < 1e-15);
  CHECK((m.cov - cov).norm() < 1e-15);
  Eigen::Matrix2d bad;
  bad << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(make_gaussian(mean, bad), std::invalid_argument);
}

TEST_CASE("direct sampling of the barrier splits its weight") {
  const Target t = make_barrier_gmm(2, 3.0, 0.25);
  SeededStream rng(8);
  const int n = 100'000;
  int right = 0;
  for (int i = 0; i < n; ++i) right += direct_sample(t, rng)(0) > 0.0 ? 1 : 0;
  CHECK(std::abs(right / double(n) - 0.75) < 5 * std::sqrt(0.75 * 0.25 / n));
}

TEST_CASE("targets without a sampler or moments") {
  const Target t(std::make_shared<NoSampler>());
  SeededStream rng(1);
  CHECK_FALSE(t.has_direct_sampler());
  CHECK_THROWS_AS(direct_sample(t, rng), std::logic_error);
  CHECK_THROWS_AS(true_moments(t), std::logic_error);
}

TEST_CASE("parse_target") {
  CHECK(parse_target("symmetric(2,1.5,0.25)").spec() == "symmetric(2,1.5,0.25)");
  CHECK(parse_target(" barrier( 2, 3, 0.25 ) ").spec() == "barrier(2,3,0.25)");
  CHECK(parse_target("banana").dimension() == 2);
  CHECK(parse_target("landscape(40,20,0.4,10,3)").dimension() == 3);
  CHECK(parse_target("gaussian(4)").dimension() == 4);
  CHECK_THROWS_AS(parse_target("cauchy(2)"), std::invalid_argument);
  CHECK_THROWS_AS(parse_target("symmetric(2,1.5)"), std::invalid_argument);
  CHECK_THROWS_AS(parse_target("symmetric(2,x,0.25)"), std::invalid_argument);
}

TEST_CASE("format_number round trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5, 6.8125, 123456789.0}) {
    CHECK(std::stod(format_number(v)) == v);
  }
  CHECK(format_number(0.5) == "0.5");
  CHECK(format_number(2.0) == "2");
}
