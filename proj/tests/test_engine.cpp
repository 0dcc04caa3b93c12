#include "doctest.h"

#include <cmath>
#include <limits>
#include <sstream>

#include "suburban/diagnostics.hpp"
#include "suburban/engine.hpp"
#include "test_support.hpp"

using namespace suburban;

namespace {

Target standard_normal(int dim = 1) {
  return make_gaussian(Eigen::VectorXd::Zero(dim), Eigen::MatrixXd::Identity(dim, dim));
}

GraphEnsembleSpec grid(double p) {
  return {TopologyKind::HypercubicPercolation, 2, 9, 81, p, true};
}

GraphEnsembleSpec no_graph(std::size_t agents) {
  return {TopologyKind::ErdosRenyi, 0, 0, static_cast<int>(agents), 0.0, false};
}

// Standard normal restricted to |x| < 0.5 with NaN outside.
class Boxed final : public TargetModel {
 public:
  std::size_t dimension() const override { return 1; }
  double log_density(std::span<const double> x) const override {
    return std::abs(x[0]) < 0.5 ? -0.5 * x[0] * x[0] : std::numeric_limits<double>::quiet_NaN();
  }
  std::string spec() const override { return "boxed"; }
};

double correlation(const ChainRecord& r, std::size_t a, std::size_t b, std::size_t from,
                   std::size_t thin) {
  std::vector<double> xa, xb;
  for (std::size_t t = from; t < r.N; t += thin) {
    xa.push_back(r.sample(t, a)[0]);
    xb.push_back(r.sample(t, b)[0]);
  }
  const auto n = static_cast<double>(xa.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < xa.size(); ++i) {
    ma += xa[i];
    mb += xb[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < xa.size(); ++i) {
    sab += (xa[i] - ma) * (xb[i] - mb);
    saa += (xa[i] - ma) * (xa[i] - ma);
    sbb += (xb[i] - mb) * (xb[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

TEST_CASE("initialize") {
  ChainConfig cfg{.target = standard_normal(2), .graph = grid(0.5), .M = 81};
  SUBCASE("h = 0 puts every agent at the origin") {
    cfg.init_halfwidth = 0.0;
    SeededStream rng(1);
    const auto s = initialize(cfg, rng);
    for (double v : s.values()) CHECK(v == 0.0);
  }
  SUBCASE("uniform moments") {
    cfg.M = 50'000;
    cfg.graph = no_graph(cfg.M);
    SeededStream rng(2);
    const auto s = initialize(cfg, rng);
    const auto vals = s.values();
    REQUIRE(vals.size() == 100'000);
    const double h = 100.0;
    const auto m = testing::iid_mean(vals);
    CHECK(std::abs(m.mean) < 5 * m.se);
    double var = 0.0;
    for (double v : vals) var += v * v;
    var /= static_cast<double>(vals.size());
    const double var_se = std::sqrt(h * h * h * h * (1.0 / 5.0 - 1.0 / 9.0) / vals.size());
    CHECK(std::abs(var - h * h / 3.0) < 5 * var_se);
    for (double v : vals) REQUIRE(std::abs(v) <= h);
  }
  SUBCASE("deterministic") {
    SeededStream a(3), b(3);
    CHECK(initialize(cfg, a) == initialize(cfg, b));
  }
}

TEST_CASE("ChainConfig validation") {
  ChainConfig cfg{.target = standard_normal(), .graph = grid(0.5), .N = 10, .M = 81};
  CHECK_NOTHROW(cfg.validate());
  cfg.M = 80;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.M = 81;
  cfg.N = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.N = 10;
  cfg.burn_in_fraction = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.burn_in_fraction = 0.1;
  cfg.kernel.beta = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("sweep schedule") {
  Target t = make_symmetric_mixture(2, 1.5, 0.25);
  SeededStream rng(4), graph_rng(5);
  const auto adjacency = draw_adjacency(grid(0.5), graph_rng);
  ChainConfig cfg{.target = t, .graph = grid(0.5), .M = 81};
  auto state = ChainState::evaluate(initialize(cfg, rng), t);
  auto stats = suburban_sweep(state, adjacency, t, {0.01, UpdateMode::GibbsPerDimension}, rng);
  CHECK(stats.accepted + stats.rejected == 162);
  stats = suburban_sweep(state, adjacency, t, {0.01, UpdateMode::JointPerAgent}, rng);
  CHECK(stats.accepted + stats.rejected == 81);
  CHECK(state.positions.t == 2);
  CHECK_THROWS_AS(
      suburban_sweep(state, AdjacencyMatrix::empty(3), t, {0.01, UpdateMode::JointPerAgent}, rng),
      std::invalid_argument);
}

TEST_CASE("vanishing steps are almost always accepted") {
  ChainConfig cfg{.target = standard_normal(2),
                  .graph = no_graph(20),
                  .kernel = {1e4, UpdateMode::GibbsPerDimension},
                  .N = 500,
                  .M = 20,
                  .init_halfwidth = 1.0,
                  .seed = 6};
  const auto r = run_chain(cfg);
  CHECK(rejection_rate(r) < 0.01);
}

TEST_CASE("identity proposal is accepted and leaves the state unchanged") {
  Target t = make_banana();
  EnsembleState pos(3, 2);
  pos(0, 0) = 0.3;
  pos(0, 1) = -0.2;
  pos(1, 0) = 0.3;
  pos(1, 1) = -0.2;
  pos(2, 0) = 1.0;
  pos(2, 1) = 0.5;
  auto state = ChainState::evaluate(pos, t);
  const std::vector<Edge> edge{{0, 1}};
  const AdjacencyMatrix a(3, edge);
  testing::ScriptedNormalStream rng(0.0);
  std::vector<double> scratch;
  // Agents 0 and 1 coincide, so the mean of the conditional is the current value.
  CHECK(update_coordinate(state, 0, 1, a, t, 0.01, rng, scratch));
  CHECK(update_agent(state, 2, a, t, 0.01, rng, scratch));
  CHECK(state.positions == pos);
}

TEST_CASE("non-finite log-density is a rejection") {
  ChainConfig cfg{.target = Target(std::make_shared<Boxed>()),
                  .graph = no_graph(4),
                  .kernel = {0.5, UpdateMode::GibbsPerDimension},
                  .N = 2000,
                  .M = 4,
                  .init_halfwidth = 0.0,
                  .seed = 7};
  const auto r = run_chain(cfg);
  CHECK(r.accept_count + r.reject_count == 2000 * 4);
  CHECK(r.reject_count > 0);
  for (double v : r.samples) REQUIRE(std::abs(v) < 0.5);
  for (double e : r.energy_series) REQUIRE(std::isfinite(e));
}

TEST_CASE("run_chain record layout and bookkeeping") {
  ChainConfig cfg{.target = make_symmetric_mixture(2, 1.5, 0.25),
                  .graph = grid(0.5),
                  .N = 1,
                  .M = 81,
                  .seed = 8};
  auto r = run_chain(cfg);
  CHECK(r.samples.size() == 81 * 2);
  CHECK(r.energy_series.size() == 1);
  CHECK(r.edge_counts.size() == 1);

  cfg.N = 200;
  r = run_chain(cfg);
  CHECK(r.accept_count + r.reject_count == 200u * 81u * 2u);
  CHECK(r.eval_count == 81u + 200u * 81u * 2u);
  cfg.kernel.update_mode = UpdateMode::JointPerAgent;
  r = run_chain(cfg);
  CHECK(r.accept_count + r.reject_count == 200u * 81u);
  CHECK(r.eval_count == 81u + 200u * 81u);
  // The caller's Target is copied, never counted.
  CHECK(cfg.target.eval_count() == 0);
}

TEST_CASE("run_chain is deterministic in its seed") {
  ChainConfig cfg{.target = make_banana(), .graph = grid(0.5), .N = 300, .M = 81, .seed = 9};
  const auto a = run_chain(cfg);
  const auto b = run_chain(cfg);
  CHECK(a.samples == b.samples);
  CHECK(a.energy_series == b.energy_series);
  CHECK(a.edge_counts == b.edge_counts);
  CHECK(a.accept_count == b.accept_count);
  cfg.seed = 10;
  CHECK(run_chain(cfg).samples != a.samples);
}

TEST_CASE("energy series matches recomputation from samples") {
  ChainConfig cfg{.target = make_random_landscape(40, 20, 0.4, 10.0, 2),
                  .graph = grid(0.5),
                  .N = 200,
                  .M = 81,
                  .seed = 11};
  const auto r = run_chain(cfg);
  Target t = cfg.target;
  for (std::size_t step = 0; step < r.N; ++step) {
    const double v = recompute_energy(r, step, t);
    REQUIRE(std::abs(v - r.energy_series[step]) <= 1e-10 * std::max(1.0, std::abs(v)));
  }
  CHECK_THROWS_AS(recompute_energy(r, r.N, t), std::out_of_range);
}

TEST_CASE("graph sequence depends on the seed alone") {
  const auto spec = grid(0.5);
  ChainConfig a{.target = make_symmetric_mixture(2, 1.5, 0.25), .graph = spec, .N = 100, .M = 81,
                .seed = 12};
  ChainConfig b = a;
  b.target = make_banana();
  b.kernel.beta = 0.3;
  const auto ra = run_chain(a);
  const auto rb = run_chain(b);
  CHECK(ra.edge_counts == rb.edge_counts);
  const auto seq = adjacency_sequence(spec, 12, 100);
  for (std::size_t t = 0; t < 100; ++t) CHECK(seq[t].edge_count() == ra.edge_counts[t]);
  CHECK(adjacency_sequence(spec, 12, 5)[3] == seq[3]);
}

TEST_CASE("per-agent acceptance equals the joint-target ratio") {
  Target t = make_symmetric_mixture(2, 1.5, 0.25);
  SeededStream rng(13);
  EnsembleState pos(81, 2);
  for (std::size_t a = 0; a < 81; ++a) {
    for (std::size_t k = 0; k < 2; ++k) pos(a, k) = 2.0 * rng.normal();
  }
  const auto state = ChainState::evaluate(pos, t);
  const double joint_old = -state.energy();
  for (int trial = 0; trial < 200; ++trial) {
    const auto agent = static_cast<std::size_t>(81.0 * rng.uniform());
    const auto k = static_cast<std::size_t>(2.0 * rng.uniform());
    EnsembleState moved = pos;
    moved(agent, k) += rng.normal();
    const double joint_new = -ChainState::evaluate(moved, t).energy();
    const double factor_new = t.log_density(moved.agent(agent));
    const double factor_old = t.log_density(pos.agent(agent));
    REQUIRE(std::abs((joint_new - joint_old) - (factor_new - factor_old)) < 1e-12);
  }
}

TEST_CASE("stationarity of a single agent") {
  ChainConfig cfg{.target = standard_normal(),
                  .graph = no_graph(1),
                  .kernel = {0.01, UpdateMode::GibbsPerDimension},
                  .N = 100'000,
                  .M = 1,
                  .seed = 14};
  const auto r = run_chain(cfg);
  const std::span<const double> xs(r.samples.data() + 10'000, 90'000);
  const auto m = testing::batch_mean(xs);
  CHECK(std::abs(m.mean) < 3 * m.se);
  double var = 0.0;
  for (double x : xs) var += (x - m.mean) * (x - m.mean);
  var /= static_cast<double>(xs.size());
  CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("uncoupled agents are independent") {
  ChainConfig cfg{.target = standard_normal(),
                  .graph = {TopologyKind::HypercubicPercolation, 1, 81, 81, 0.0, true},
                  .kernel = {0.25, UpdateMode::GibbsPerDimension},
                  .N = 20'000,
                  .M = 81,
                  .init_halfwidth = 1.0,
                  .seed = 15};
  const auto r = run_chain(cfg);
  const std::size_t thin = 10;
  const double n = static_cast<double>((r.N - 1000) / thin);
  double sum = 0.0;
  for (std::size_t a = 0; a + 1 < 81; a += 2) {
    const double c = correlation(r, a, a + 1, 1000, thin);
    CHECK(std::abs(c) < 5.0 / std::sqrt(n));
    sum += c;
  }
  CHECK(std::abs(sum / 40.0) < 5.0 / std::sqrt(40.0 * n));

  // Coupling changes the dynamics, not the stationary product law: fixed
  // ring neighbors are uncorrelated at equal times too.
  cfg.graph = {TopologyKind::HypercubicPercolation, 1, 81, 81, 1.0, false};
  const auto coupled = run_chain(cfg);
  CHECK(std::abs(correlation(coupled, 0, 1, 1000, thin)) < 5.0 / std::sqrt(n));
}

TEST_CASE("write_samples_csv") {
  ChainConfig cfg{.target = standard_normal(2), .graph = no_graph(3), .N = 4, .M = 3, .seed = 16};
  const auto r = run_chain(cfg);
  std::ostringstream out;
  write_samples_csv(r, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,agent,x_1,x_2");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 12);
  CHECK(out.str().find("\n4,2,") != std::string::npos);
}
