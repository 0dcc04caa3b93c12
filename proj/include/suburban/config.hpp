#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "suburban/baselines.hpp"
#include "suburban/graph.hpp"
#include "suburban/kernel.hpp"
#include "suburban/targets.hpp"

namespace suburban {

enum class Sampler { Suburban, Slice };

/// One fully resolved hyperparameter tuple.
struct SweepPoint {
  std::string target = "symmetric(2,1.5,0.25)";
  GraphEnsembleSpec graph;
  KernelParams kernel;
  std::size_t N = 10'000;
  std::size_t T = 100;
  Sampler sampler = Sampler::Suburban;

  double d_eff_config() const;
};

/// Experiment description read from a `key = value` file.
///
///   target = symmetric(2,1.5,0.25)
///   topology.kind = hypercubic        # or erdos_renyi
///   topology.d = 2
///   topology.m = 9
///   p_join = 0.5
///   sweep.p_join = [0, 0.5, 1]
///   sweep.topology = [(1,81), (2,9), (4,3)]
///
/// Sweep axes: target, topology, update_mode, N, beta, p_join. Axes expand
/// as a Cartesian product in that order, p_join varying fastest. N and T
/// default to 1000 for barrier targets and to 10000 / 100 otherwise.
struct ExperimentConfig {
  std::string target = "symmetric(2,1.5,0.25)";
  TopologyKind kind = TopologyKind::HypercubicPercolation;
  int d = 2;
  int m = 9;
  bool shuffle = true;
  double p_join = 0.5;
  double beta = 0.01;
  UpdateMode update_mode = UpdateMode::GibbsPerDimension;
  std::optional<std::size_t> N;
  std::size_t M = 81;
  std::optional<std::size_t> T;
  double burn_in = 0.10;
  double init_halfwidth = 100.0;
  std::uint64_t master_seed = 1;

  std::vector<std::string> sweep_target;
  std::vector<std::pair<int, int>> sweep_topology;
  std::vector<UpdateMode> sweep_update_mode;
  std::vector<std::size_t> sweep_N;
  std::vector<double> sweep_beta;
  std::vector<double> sweep_p_join;

  std::string output = "sweep.csv";
  unsigned workers = 1;
  /// Record wall-clock seconds in the output. Off by default so reruns are
  /// byte-identical.
  bool timing = false;
  std::size_t oracle_samples = kOracleSamples;
  SliceParams slice;

  /// Every point of the sweep, validated. Throws std::invalid_argument on the
  /// first bad combination, before anything runs.
  std::vector<SweepPoint> points() const;
};

ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

std::string to_string(UpdateMode mode);
std::string to_string(TopologyKind kind);
UpdateMode parse_update_mode(std::string_view text);
TopologyKind parse_topology_kind(std::string_view text);

/// Splits "a, (b,c), d" on commas outside parentheses and brackets.
std::vector<std::string> split_list(std::string_view text);

}  // namespace suburban
