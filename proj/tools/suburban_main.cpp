// Command-line front end: run / sweep / oracle / baseline-slice / selfcheck.

#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "suburban/config.hpp"
#include "suburban/diagnostics.hpp"
#include "suburban/engine.hpp"
#include "suburban/harness.hpp"
#include "suburban/selfcheck.hpp"
#include "suburban/targets.hpp"

namespace {

using namespace suburban;

void print_row(const SweepTable& table, std::size_t r) {
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    std::printf("  %-20s %s\n", table.columns[c].c_str(), table.rows[r][c].c_str());
  }
}

void apply_overrides(ExperimentConfig& cfg, unsigned workers, bool timing,
                     const std::string& output) {
  if (workers > 0) cfg.workers = workers;
  if (timing) cfg.timing = true;
  if (!output.empty()) cfg.output = output;
}

int cmd_run(const std::string& path, unsigned workers, bool timing, const std::string& output,
            const std::string& dump) {
  auto cfg = load_config(path);
  apply_overrides(cfg, workers, timing, output);
  const auto points = cfg.points();
  if (points.size() != 1) {
    std::cerr << "run expects a single point; this config has " << points.size()
              << " (use sweep)\n";
    return 2;
  }
  if (!dump.empty()) {
    const Target target = parse_target(points[0].target);
    const auto record =
        run_chain(chain_config(points[0], target, cfg, derive_seed(cfg.master_seed, 0, 0)));
    std::ofstream out(dump);
    write_samples_csv(record, out);
    std::cout << "wrote trial 0 samples to " << dump << "\n";
  }
  const auto table = run_sweep(cfg);
  std::cout << "wrote " << cfg.output << "\n";
  print_row(table, 0);
  return 0;
}

int cmd_sweep(const std::string& path, unsigned workers, bool timing, const std::string& output,
              bool resume) {
  auto cfg = load_config(path);
  apply_overrides(cfg, workers, timing, output);
  const auto points = cfg.points();
  std::cout << "sweeping " << points.size() << " point(s) -> " << cfg.output << "\n";
  const auto table = run_sweep(cfg, {.resume = resume, .write_json = true});
  std::cout << "computed " << table.computed.size() << " point(s), kept "
            << table.rows.size() - table.computed.size() << " from a previous run\n";
  return 0;
}

int cmd_oracle(const std::string& spec, std::size_t samples) {
  const Target target = parse_target(spec);
  const auto m = true_moments(target, samples);
  const auto tails = tail_oracle(target, m, samples);
  nlohmann::ordered_json j;
  j["target"] = target.spec();
  j["exact_moments"] = m.exact;
  j["mean"] = std::vector<double>(m.mean.begin(), m.mean.end());
  std::vector<std::vector<double>> cov;
  for (Eigen::Index r = 0; r < m.cov.rows(); ++r) {
    cov.emplace_back(m.cov.row(r).begin(), m.cov.row(r).end());
  }
  j["cov"] = cov;
  if (!m.exact) {
    j["mean_stderr"] = std::vector<double>(m.mean_stderr.begin(), m.mean_stderr.end());
    j["oracle_samples"] = m.oracle_samples;
  }
  const auto p = tails.probabilities();
  j["tail_mass"] = {{"0_1", p[0]}, {"1_2", p[1]}, {"2_3", p[2]}, {"3_inf", p[3]}};
  j["tail_samples"] = tails.total;
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_baseline_slice(const std::string& path, unsigned workers, bool timing,
                       const std::string& output) {
  auto cfg = load_config(path);
  apply_overrides(cfg, workers, timing, output);
  const auto table = run_slice_comparison(cfg);
  std::cout << "wrote " << cfg.output << "\n";
  for (std::size_t r = 0; r + 1 < table.rows.size(); r += 2) {
    const double sub = table.number(r, "eval_count_mean");
    const double sl = table.number(r + 1, "eval_count_mean");
    std::printf("%s p_join=%s: suburban evals %.0f, slice evals %.0f, ratio %.2f\n",
                table.rows[r][0].c_str(), table.rows[r][4].c_str(), sub, sl, sl / sub);
  }
  return 0;
}

int cmd_selfcheck() {
  int failures = 0;
  for (const auto& r : run_selfcheck()) {
    std::printf("[%s] %s: %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
    failures += r.passed ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Suburban ensemble MCMC sampler and experiment harness"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output;
  std::string dump;
  std::string target_spec;
  unsigned workers = 0;
  bool timing = false;
  bool resume = false;
  std::size_t samples = kOracleSamples;

  auto* run = app.add_subcommand("run", "Run the trials of a single hyperparameter point");
  run->add_option("config", config_path, "Config file")->required();
  run->add_option("--dump-samples", dump, "Write trial 0 samples as CSV");

  auto* sweep = app.add_subcommand("sweep", "Run a Cartesian hyperparameter sweep");
  sweep->add_option("config", config_path, "Config file")->required();
  sweep->add_flag("--resume", resume, "Keep matching complete rows of an existing output");

  auto* oracle = app.add_subcommand("oracle", "Print true moments and tail masses of a target");
  oracle->add_option("target", target_spec, "Target spec, e.g. barrier(2,3,0.25)")->required();
  oracle->add_option("--samples", samples, "Direct-sampling oracle size");

  auto* slice = app.add_subcommand("baseline-slice", "Compare against slice-within-Gibbs");
  slice->add_option("config", config_path, "Config file")->required();

  for (auto* sub : {run, sweep, slice}) {
    sub->add_option("-o,--output", output, "Output CSV (overrides config)");
    sub->add_option("-j,--workers", workers, "Worker threads (overrides config)");
    sub->add_flag("--timing", timing, "Record wall-clock seconds");
  }
  app.add_subcommand("selfcheck", "Run the fast invariant suite");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config_path, workers, timing, output, dump);
    if (*sweep) return cmd_sweep(config_path, workers, timing, output, resume);
    if (*oracle) return cmd_oracle(target_spec, samples);
    if (*slice) return cmd_baseline_slice(config_path, workers, timing, output);
    return cmd_selfcheck();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
