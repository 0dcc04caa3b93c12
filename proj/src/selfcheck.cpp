#include "suburban/selfcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "suburban/diagnostics.hpp"
#include "suburban/engine.hpp"
#include "suburban/graph.hpp"
#include "suburban/harness.hpp"
#include "suburban/kernel.hpp"
#include "suburban/targets.hpp"

namespace suburban {

namespace {

// Raw kernel exponent -alpha dx^2 - sum beta (dx - (x_n - x_old))^2.
double kernel_exponent(double x_new, double x_old, const std::vector<double>& nb, double beta) {
  const double dx = x_new - x_old;
  const double alpha = 2.0 * beta - static_cast<double>(nb.size()) * beta;
  double e = -alpha * dx * dx;
  for (double v : nb) {
    const double r = dx - (v - x_old);
    e -= beta * r * r;
  }
  return e;
}

CheckResult check(std::string name, const std::function<std::string()>& body) {
  try {
    const auto failure = body();
    return {std::move(name), failure.empty(), failure.empty() ? "ok" : failure};
  } catch (const std::exception& e) {
    return {std::move(name), false, std::string("exception: ") + e.what()};
  }
}

}  // namespace

std::vector<CheckResult> run_selfcheck() {
  std::vector<CheckResult> out;

  out.push_back(check("lattice edge counts", [] {
    for (int d = 1; d <= 4; ++d) {
      const auto edges = lattice_edge_set(d, 3);
      const auto sites = static_cast<std::size_t>(std::pow(3, d));
      if (edges.size() != static_cast<std::size_t>(d) * sites) return std::string("wrong count");
      const AdjacencyMatrix a(sites, edges);
      for (std::size_t s = 0; s < sites; ++s) {
        if (a.degree(s) != static_cast<std::size_t>(2 * d)) return std::string("wrong degree");
      }
    }
    return std::string();
  }));

  out.push_back(check("full shuffled lattice has d_eff = d", [] {
    SeededStream rng(11);
    for (auto [d, m] : {std::pair{1, 81}, {2, 9}, {4, 3}}) {
      const GraphEnsembleSpec spec{TopologyKind::HypercubicPercolation, d, m, 81, 1.0, true};
      const auto a = draw_adjacency(spec, rng);
      if (effective_dimension(a) != static_cast<double>(d)) return std::string("d_eff mismatch");
    }
    return std::string();
  }));

  out.push_back(check("kernel closed form matches quadratic form", [] {
    SeededStream rng(12);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const double beta = std::exp(-6.0 + 8.0 * rng.uniform());
      const auto n = static_cast<std::size_t>(rng.uniform() * 9);
      std::vector<double> nb(n);
      for (auto& v : nb) v = 4.0 * rng.normal();
      const double x_old = 4.0 * rng.normal();
      const double a = x_old + 3.0 * rng.normal();
      const double b = x_old + 3.0 * rng.normal();
      const ScalarProposalContext ctx{x_old, nb, beta};
      const double closed = log_kernel_density(a, ctx) - log_kernel_density(b, ctx);
      const double brute =
          kernel_exponent(a, x_old, nb, beta) - kernel_exponent(b, x_old, nb, beta);
      worst = std::max(worst, std::abs(closed - brute) / std::max(1.0, std::abs(brute)));
    }
    if (worst > 1e-10) return "max relative error " + format_number(worst);
    return std::string();
  }));

  out.push_back(check("conditional variance is 1/(4 beta)", [] {
    for (std::size_t n = 0; n <= 8; ++n) {
      std::vector<double> nb(n, 1.5);
      const auto form = conditional_form({0.3, nb, 0.01});
      if (form.variance != 0.25 / 0.01) return std::string("variance depends on n");
    }
    return std::string();
  }));

  out.push_back(check("decay time hand example", [] {
    const std::vector<double> v{0.0, 1.0};
    if (autocovariance(v, 0) != 0.25 || autocovariance(v, 1) != -0.125 ||
        autocovariance(v, -1) != -0.125) {
      return std::string("autocovariance mismatch");
    }
    if (decay_time(v) != 1.5) return "decay_time = " + format_number(decay_time(v));
    return std::string();
  }));

  out.push_back(check("tail fractions sum to zero", [] {
    const Target t = make_symmetric_mixture(2, 1.5, 0.25);
    const auto truth = true_moments(t);
    const auto oracle = tail_oracle(t, truth, 100'000, 3);
    const RegionCounts inferred{123, 456, 78, 9};
    const auto f = tail_fractions(inferred, oracle);
    const double sum = f[0] + f[1] + f[2] + f[3];
    if (std::abs(sum) > 1e-12) return "sum = " + format_number(sum);
    return std::string();
  }));

  out.push_back(check("chain determinism and schedule count", [] {
    ChainConfig cfg{.target = make_symmetric_mixture(2, 1.5, 0.25),
                    .graph = {TopologyKind::HypercubicPercolation, 2, 9, 81, 0.5, true},
                    .kernel = {0.01, UpdateMode::GibbsPerDimension},
                    .N = 50,
                    .M = 81,
                    .seed = 99};
    const auto a = run_chain(cfg);
    const auto b = run_chain(cfg);
    if (a.samples != b.samples || a.energy_series != b.energy_series) {
      return std::string("reruns differ");
    }
    if (a.accept_count + a.reject_count != 50u * 81u * 2u) return std::string("schedule count");
    return std::string();
  }));

  out.push_back(check("aggregation is order independent", [] {
    std::vector<double> v{0.3, 1e8, -2.5, 1e-9, 7.0, 3.14159};
    const auto s1 = summarize_metric(v);
    std::reverse(v.begin(), v.end());
    const auto s2 = summarize_metric(v);
    if (s1.mean != s2.mean || s1.se != s2.se) return std::string("order changed result");
    return std::string();
  }));

  return out;
}

}  // namespace suburban
