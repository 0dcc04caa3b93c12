#include "suburban/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "suburban/baselines.hpp"

namespace suburban {

PointTruth prepare_truth(const std::string& target_spec, std::size_t oracle_samples) {
  Target target = parse_target(target_spec);
  Moments moments = true_moments(target, oracle_samples);
  TailOracle oracle = tail_oracle(target, moments, oracle_samples);
  return {std::move(target), std::move(moments), oracle};
}

ChainConfig chain_config(const SweepPoint& point, const Target& target,
                         const ExperimentConfig& settings, std::uint64_t seed) {
  return ChainConfig{.target = target,
                     .graph = point.graph,
                     .kernel = point.kernel,
                     .N = point.N,
                     .M = static_cast<std::size_t>(point.graph.M),
                     .init_halfwidth = settings.init_halfwidth,
                     .burn_in_fraction = settings.burn_in,
                     .seed = seed};
}

TrialOutcome run_trial(const SweepPoint& point, const PointTruth& truth,
                       const ExperimentConfig& settings, std::size_t point_index,
                       std::size_t trial) {
  TrialOutcome out;
  out.trial = trial;
  out.seed = derive_seed(settings.master_seed, point_index, trial);
  try {
    Target target = truth.target;
    target.reset_eval_count();
    const auto cfg = chain_config(point, target, settings, out.seed);
    const auto start = std::chrono::steady_clock::now();
    const ChainRecord record = point.sampler == Sampler::Slice
                                   ? slice_gibbs_chain(cfg, settings.slice)
                                   : run_chain(cfg);
    MetricReport report = summarize_chain(record, truth.moments, truth.oracle, settings.burn_in);
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.report = std::move(report);
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

namespace {

/// Runs fn(i) for i in [0, count) on up to `workers` threads.
template <typename Fn>
void parallel_for(std::size_t count, unsigned workers, Fn&& fn) {
  const auto threads = static_cast<std::size_t>(std::max(1U, workers));
  if (threads == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < std::min(threads, count); ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
}

std::string na_or(const std::optional<double>& v) { return v ? format_number(*v) : "NA"; }

}  // namespace

std::vector<TrialOutcome> run_trials(const SweepPoint& point, const ExperimentConfig& settings,
                                     std::size_t point_index) {
  if (point.T < 1) throw std::invalid_argument("T must be >= 1");
  const PointTruth truth = prepare_truth(point.target, settings.oracle_samples);
  std::vector<TrialOutcome> outcomes(point.T);
  parallel_for(point.T, settings.workers, [&](std::size_t t) {
    outcomes[t] = run_trial(point, truth, settings, point_index, t);
  });
  return outcomes;
}

MetricSummary summarize_metric(std::vector<double> values) {
  MetricSummary s;
  if (values.empty()) {
    s.mean = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  const double n = static_cast<double>(values.size());
  s.mean = sum / n;
  if (values.size() >= 2) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.se = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return s;
}

SweepRow aggregate(const SweepPoint& point, std::span<const TrialOutcome> outcomes, bool timing) {
  SweepRow row;
  row.point = point;
  row.d_eff_config = point.d_eff_config();
  std::vector<const MetricReport*> ok;
  for (const auto& o : outcomes) {
    if (o.report) {
      ok.push_back(&*o.report);
    } else {
      ++row.trials_failed;
    }
  }
  row.successes = ok.size();
  row.flagged = ok.size() < 2;

  auto collect = [&](auto member) {
    std::vector<double> v;
    v.reserve(ok.size());
    for (const auto* r : ok) v.push_back(member(*r));
    return summarize_metric(std::move(v));
  };
  row.d_mean = collect([](const MetricReport& r) { return r.d_mean; });
  row.d_cov = collect([](const MetricReport& r) { return r.d_cov; });
  row.rejection_rate = collect([](const MetricReport& r) { return r.rejection_rate; });
  row.tau_dec = collect([](const MetricReport& r) { return r.tau_dec; });
  row.d_eff_realized_mean = collect([](const MetricReport& r) { return r.d_eff_realized; }).mean;
  for (std::size_t i = 0; i < kTailRegions; ++i) {
    row.tail_fractions[i] = collect([i](const MetricReport& r) { return r.tail_fractions[i]; }).mean;
  }
  row.eval_count_mean =
      collect([](const MetricReport& r) { return static_cast<double>(r.eval_count); }).mean;
  if (timing) {
    row.wall_seconds_mean = collect([](const MetricReport& r) { return r.wall_seconds; }).mean;
  }
  return row;
}

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols{
      "target",         "kind",         "d",
      "m",              "p_join",       "d_eff_config",
      "d_eff_realized_mean", "beta",    "update_mode",
      "N",              "M",            "T",
      "d_mean",         "d_mean_se",    "d_cov",
      "d_cov_se",       "rejection_rate", "rejection_rate_se",
      "tau_dec",        "tau_dec_se",   "f_0_1",
      "f_1_2",          "f_2_3",        "f_3_inf",
      "eval_count_mean", "wall_seconds_mean", "trials_failed"};
  return cols;
}

std::vector<std::string> csv_fields(const SweepRow& row) {
  const auto& p = row.point;
  const bool lattice = p.graph.kind == TopologyKind::HypercubicPercolation;
  const bool any = row.successes > 0;
  auto metric = [&](const MetricSummary& s, std::vector<std::string>& out) {
    out.push_back(any ? format_number(s.mean) : "NA");
    out.push_back(any ? na_or(s.se) : "NA");
  };
  std::vector<std::string> f;
  f.push_back(p.target);
  f.push_back(p.sampler == Sampler::Slice ? "slice" : to_string(p.graph.kind));
  f.push_back(lattice ? std::to_string(p.graph.d) : "NA");
  f.push_back(lattice ? std::to_string(p.graph.m) : "NA");
  f.push_back(format_number(p.graph.p_join));
  f.push_back(format_number(row.d_eff_config));
  f.push_back(any ? format_number(row.d_eff_realized_mean) : "NA");
  f.push_back(format_number(p.kernel.beta));
  f.push_back(to_string(p.kernel.update_mode));
  f.push_back(std::to_string(p.N));
  f.push_back(std::to_string(p.graph.M));
  f.push_back(std::to_string(p.T));
  metric(row.d_mean, f);
  metric(row.d_cov, f);
  metric(row.rejection_rate, f);
  metric(row.tau_dec, f);
  for (double v : row.tail_fractions) f.push_back(any ? format_number(v) : "NA");
  f.push_back(any ? format_number(row.eval_count_mean) : "NA");
  f.push_back(any ? na_or(row.wall_seconds_mean) : "NA");
  f.push_back(std::to_string(row.trials_failed));
  return f;
}

std::string csv_line(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    const auto& v = fields[i];
    if (v.find_first_of(",\"\n") != std::string::npos) {
      out += '"';
      for (char c : v) {
        if (c == '"') out += '"';
        out += c;
      }
      out += '"';
    } else {
      out += v;
    }
  }
  return out;
}

std::vector<std::string> parse_csv_line(std::string_view line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else {
      out.back() += c;
    }
  }
  if (quoted) throw std::invalid_argument("unterminated quoted CSV field");
  return out;
}

std::size_t SweepTable::column_index(std::string_view name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw std::out_of_range("no column '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - columns.begin());
}

double SweepTable::number(std::size_t row, std::string_view column) const {
  const auto& v = rows.at(row).at(column_index(column));
  if (v == "NA") return std::numeric_limits<double>::quiet_NaN();
  return std::stod(v);
}

std::string sweep_json(const SweepTable& table) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& r : table.rows) {
    nlohmann::ordered_json obj;
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
      const auto& v = r[i];
      if (v == "NA") {
        obj[table.columns[i]] = nullptr;
        continue;
      }
      char* end = nullptr;
      const double num = std::strtod(v.c_str(), &end);
      if (!v.empty() && end == v.c_str() + v.size()) {
        obj[table.columns[i]] = num;
      } else {
        obj[table.columns[i]] = v;
      }
    }
    rows.push_back(std::move(obj));
  }
  return rows.dump(2) + "\n";
}

void write_table(const SweepTable& table, const std::filesystem::path& csv_path, bool write_json) {
  {
    std::ofstream out(csv_path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + csv_path.string() + "'");
    out << csv_line(table.columns) << '\n';
    for (const auto& r : table.rows) out << csv_line(r) << '\n';
  }
  if (write_json) {
    std::ofstream js(csv_path.string() + ".json", std::ios::binary | std::ios::trunc);
    js << sweep_json(table);
  }
}

namespace {

// Columns that identify a point: everything but the measured values.
constexpr std::array<std::size_t, 10> kKeyColumns{0, 1, 2, 3, 4, 7, 8, 9, 10, 11};

bool same_point(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.size() != b.size()) return false;
  return std::all_of(kKeyColumns.begin(), kKeyColumns.end(),
                     [&](std::size_t i) { return a[i] == b[i]; });
}

/// Complete rows of an existing output file, in order.
std::vector<std::vector<std::string>> read_complete_rows(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  std::vector<std::vector<std::string>> rows;
  std::size_t pos = 0;
  bool header = true;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    if (nl == std::string::npos) break;  // partial trailing line
    const std::string_view line(text.data() + pos, nl - pos);
    pos = nl + 1;
    auto fields = parse_csv_line(line);
    if (header) {
      if (fields != csv_columns()) {
        throw std::runtime_error("existing output '" + path.string() +
                                 "' has a different header; refusing to resume");
      }
      header = false;
      continue;
    }
    if (fields.size() != csv_columns().size()) break;
    rows.push_back(std::move(fields));
  }
  return rows;
}

struct PointJobs {
  SweepPoint point;
  std::size_t index;
};

/// Runs every (point, trial) job on a shared pool and hands finished points to
/// `emit` in point order from the calling thread.
template <typename Emit>
void run_points(const std::vector<PointJobs>& points, const ExperimentConfig& config,
                Emit&& emit) {
  std::map<std::string, PointTruth> truths;
  for (const auto& p : points) {
    if (!truths.contains(p.point.target)) {
      truths.emplace(p.point.target, prepare_truth(p.point.target, config.oracle_samples));
    }
  }

  struct Job {
    std::size_t slot;
    std::size_t trial;
  };
  std::vector<Job> jobs;
  std::vector<std::vector<TrialOutcome>> results(points.size());
  std::vector<std::size_t> remaining(points.size());
  for (std::size_t s = 0; s < points.size(); ++s) {
    results[s].resize(points[s].point.T);
    remaining[s] = points[s].point.T;
    for (std::size_t t = 0; t < points[s].point.T; ++t) jobs.push_back({s, t});
  }

  std::mutex mu;
  std::condition_variable cv;
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      const auto& job = jobs[j];
      const auto& p = points[job.slot];
      auto outcome = run_trial(p.point, truths.at(p.point.target), config, p.index, job.trial);
      std::lock_guard lock(mu);
      results[job.slot][job.trial] = std::move(outcome);
      --remaining[job.slot];
      cv.notify_all();
    }
  };

  const unsigned threads = std::max(1U, config.workers);
  std::vector<std::jthread> pool;
  if (threads > 1) {
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work);
  }

  for (std::size_t s = 0; s < points.size(); ++s) {
    if (threads == 1) {
      // Single worker: run this point's jobs inline, in order.
      while (true) {
        {
          std::lock_guard lock(mu);
          if (remaining[s] == 0) break;
        }
        const std::size_t j = next++;
        if (j >= jobs.size()) break;
        const auto& job = jobs[j];
        const auto& p = points[job.slot];
        results[job.slot][job.trial] =
            run_trial(p.point, truths.at(p.point.target), config, p.index, job.trial);
        --remaining[job.slot];
      }
    } else {
      std::unique_lock lock(mu);
      cv.wait(lock, [&] { return remaining[s] == 0; });
    }
    emit(s, results[s]);
    std::vector<TrialOutcome>().swap(results[s]);
  }
}

}  // namespace

SweepTable run_sweep(const ExperimentConfig& config, const SweepOptions& options) {
  const auto all_points = config.points();
  const std::filesystem::path out_path = config.output;

  SweepTable table;
  table.columns = csv_columns();

  std::size_t done = 0;
  if (options.resume) {
    for (auto& existing : read_complete_rows(out_path)) {
      if (done >= all_points.size()) break;
      SweepRow probe;
      probe.point = all_points[done];
      if (!same_point(existing, csv_fields(probe))) break;
      table.rows.push_back(std::move(existing));
      ++done;
    }
  }

  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + out_path.string() + "'");
  out << csv_line(table.columns) << '\n';
  for (const auto& r : table.rows) out << csv_line(r) << '\n';
  out.flush();

  std::vector<PointJobs> pending;
  for (std::size_t i = done; i < all_points.size(); ++i) pending.push_back({all_points[i], i});

  run_points(pending, config, [&](std::size_t slot, const std::vector<TrialOutcome>& outcomes) {
    SweepRow row = aggregate(pending[slot].point, outcomes, config.timing);
    auto fields = csv_fields(row);
    out << csv_line(fields) << '\n';
    out.flush();
    table.rows.push_back(std::move(fields));
    table.computed.push_back(std::move(row));
  });
  out.close();

  if (options.write_json) {
    std::ofstream js(out_path.string() + ".json", std::ios::binary | std::ios::trunc);
    js << sweep_json(table);
  }
  return table;
}

SweepTable run_slice_comparison(const ExperimentConfig& config) {
  const auto base = config.points();
  std::vector<PointJobs> jobs;
  for (std::size_t i = 0; i < base.size(); ++i) {
    jobs.push_back({base[i], i});
    SweepPoint slice = base[i];
    slice.sampler = Sampler::Slice;
    jobs.push_back({slice, i});
  }
  SweepTable table;
  table.columns = csv_columns();
  run_points(jobs, config, [&](std::size_t slot, const std::vector<TrialOutcome>& outcomes) {
    SweepRow row = aggregate(jobs[slot].point, outcomes, config.timing);
    table.rows.push_back(csv_fields(row));
    table.computed.push_back(std::move(row));
  });
  write_table(table, config.output, true);
  return table;
}

}  // namespace suburban
