#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "suburban/config.hpp"
#include "suburban/diagnostics.hpp"
#include "suburban/engine.hpp"

namespace suburban {

/// Ground truth shared by every trial of a point.
struct PointTruth {
  Target target;
  Moments moments;
  TailOracle oracle;
};

PointTruth prepare_truth(const std::string& target_spec, std::size_t oracle_samples);

/// Chain configuration for one trial of a point.
ChainConfig chain_config(const SweepPoint& point, const Target& target,
                         const ExperimentConfig& settings, std::uint64_t seed);

struct TrialOutcome {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::optional<MetricReport> report;
  std::string error;
};

/// Runs one trial; exceptions are captured in the outcome.
TrialOutcome run_trial(const SweepPoint& point, const PointTruth& truth,
                       const ExperimentConfig& settings, std::size_t point_index,
                       std::size_t trial);

/// All T trials of one point, seeds derive_seed(master_seed, point_index, t).
std::vector<TrialOutcome> run_trials(const SweepPoint& point, const ExperimentConfig& settings,
                                     std::size_t point_index = 0);

struct MetricSummary {
  double mean = 0.0;
  /// Sample standard deviation (1/(n-1)) over sqrt(n); empty for n < 2.
  std::optional<double> se;

  double lower() const { return mean - 3.0 * se.value_or(0.0); }
  double upper() const { return mean + 3.0 * se.value_or(0.0); }
};

/// Mean and standard error. Values are summed in sorted order, so the result
/// does not depend on the order of `values`.
MetricSummary summarize_metric(std::vector<double> values);

struct SweepRow {
  SweepPoint point;
  std::size_t successes = 0;
  std::size_t trials_failed = 0;
  /// Fewer than two successful trials: no error bars.
  bool flagged = true;
  double d_eff_config = 0.0;
  double d_eff_realized_mean = 0.0;
  MetricSummary d_mean;
  MetricSummary d_cov;
  MetricSummary rejection_rate;
  MetricSummary tau_dec;
  std::array<double, kTailRegions> tail_fractions{};
  double eval_count_mean = 0.0;
  std::optional<double> wall_seconds_mean;
};

SweepRow aggregate(const SweepPoint& point, std::span<const TrialOutcome> outcomes,
                   bool timing = false);

/// Output columns in order.
const std::vector<std::string>& csv_columns();
std::vector<std::string> csv_fields(const SweepRow& row);
std::string csv_line(const std::vector<std::string>& fields);
/// Parses one CSV line, honoring double-quoted fields.
std::vector<std::string> parse_csv_line(std::string_view line);

struct SweepTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  /// Rows computed by this call (resumed rows are not recomputed).
  std::vector<SweepRow> computed;

  std::size_t column_index(std::string_view name) const;
  double number(std::size_t row, std::string_view column) const;
};

/// JSON text mirroring the CSV: an array with one object per row, NA as null.
std::string sweep_json(const SweepTable& table);

struct SweepOptions {
  /// Keep complete rows of an existing output that match the leading points.
  bool resume = false;
  /// Also write <output>.json.
  bool write_json = true;
};

/// Cartesian sweep. Rows are written in point order by a single writer as
/// soon as every trial of the point has finished.
SweepTable run_sweep(const ExperimentConfig& config, const SweepOptions& options = {});

/// Slice baseline next to each suburban point (same seeds). Rows alternate
/// suburban, slice; slice rows carry kind = "slice".
SweepTable run_slice_comparison(const ExperimentConfig& config);

void write_table(const SweepTable& table, const std::filesystem::path& csv_path, bool write_json);

}  // namespace suburban
