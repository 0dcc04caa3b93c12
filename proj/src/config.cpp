#include "suburban/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace suburban {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw std::invalid_argument("config line " + std::to_string(line) + ": " + what);
}

double to_double(std::string_view text, std::size_t line) {
  const std::string s(trim(text));
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) fail(line, "expected a number, got '" + s + "'");
  return v;
}

std::uint64_t to_unsigned(std::string_view text, std::size_t line) {
  const std::string s(trim(text));
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
    fail(line, "expected a nonnegative integer, got '" + s + "'");
  }
  try {
    return std::stoull(s);
  } catch (const std::exception&) {
    fail(line, "integer out of range: '" + s + "'");
  }
}

int to_int(std::string_view text, std::size_t line) {
  const auto v = to_unsigned(text, line);
  if (v > 1'000'000) fail(line, "integer too large");
  return static_cast<int>(v);
}

bool to_bool(std::string_view text, std::size_t line) {
  const auto s = trim(text);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  fail(line, "expected true/false, got '" + std::string(s) + "'");
}

std::pair<int, int> to_topology(std::string_view text, std::size_t line) {
  auto s = trim(text);
  if (s.size() < 2 || s.front() != '(' || s.back() != ')') {
    fail(line, "topology entries are written (d,m)");
  }
  const auto parts = split_list(s.substr(1, s.size() - 2));
  if (parts.size() != 2) fail(line, "topology entries are written (d,m)");
  return {to_int(parts[0], line), to_int(parts[1], line)};
}

std::vector<std::string> list_value(std::string_view value, std::size_t line) {
  auto v = trim(value);
  if (v.size() < 2 || v.front() != '[' || v.back() != ']') {
    fail(line, "sweep axes take a bracketed list");
  }
  auto items = split_list(v.substr(1, v.size() - 2));
  if (items.size() == 1 && items[0].empty()) items.clear();
  return items;
}

}  // namespace

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    const char c = i < text.size() ? text[i] : ',';
    if (c == '(' || c == '[') ++depth;
    if (c == ')' || c == ']') --depth;
    if (depth < 0) throw std::invalid_argument("unbalanced brackets in '" + std::string(text) + "'");
    if (c == ',' && depth == 0) {
      out.emplace_back(trim(text.substr(start, i - start)));
      start = i + 1;
    }
  }
  if (depth != 0) throw std::invalid_argument("unbalanced brackets in '" + std::string(text) + "'");
  return out;
}

std::string to_string(UpdateMode mode) {
  return mode == UpdateMode::GibbsPerDimension ? "gibbs" : "joint";
}

std::string to_string(TopologyKind kind) {
  return kind == TopologyKind::HypercubicPercolation ? "hypercubic" : "erdos_renyi";
}

UpdateMode parse_update_mode(std::string_view text) {
  const auto s = trim(text);
  if (s == "gibbs") return UpdateMode::GibbsPerDimension;
  if (s == "joint") return UpdateMode::JointPerAgent;
  throw std::invalid_argument("update_mode must be gibbs or joint, got '" + std::string(s) + "'");
}

TopologyKind parse_topology_kind(std::string_view text) {
  const auto s = trim(text);
  if (s == "hypercubic") return TopologyKind::HypercubicPercolation;
  if (s == "erdos_renyi" || s == "er") return TopologyKind::ErdosRenyi;
  throw std::invalid_argument("topology.kind must be hypercubic or erdos_renyi, got '" +
                              std::string(s) + "'");
}

double SweepPoint::d_eff_config() const {
  if (sampler == Sampler::Slice) return 0.0;
  return graph.effective_dimension();
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig cfg;
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view s = raw;
    if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) fail(line, "expected key = value");
    const std::string key(trim(s.substr(0, eq)));
    const std::string_view value = trim(s.substr(eq + 1));
    if (!seen.insert(key).second) fail(line, "duplicate key '" + key + "'");

    try {
      if (key == "target") {
        cfg.target = std::string(value);
      } else if (key == "topology.kind") {
        cfg.kind = parse_topology_kind(value);
      } else if (key == "topology.d") {
        cfg.d = to_int(value, line);
      } else if (key == "topology.m") {
        cfg.m = to_int(value, line);
      } else if (key == "topology.shuffle") {
        cfg.shuffle = to_bool(value, line);
      } else if (key == "p_join") {
        cfg.p_join = to_double(value, line);
      } else if (key == "beta") {
        cfg.beta = to_double(value, line);
      } else if (key == "update_mode") {
        cfg.update_mode = parse_update_mode(value);
      } else if (key == "N") {
        cfg.N = to_unsigned(value, line);
      } else if (key == "M") {
        cfg.M = to_unsigned(value, line);
      } else if (key == "T") {
        cfg.T = to_unsigned(value, line);
      } else if (key == "burn_in") {
        cfg.burn_in = to_double(value, line);
      } else if (key == "init_halfwidth") {
        cfg.init_halfwidth = to_double(value, line);
      } else if (key == "master_seed") {
        cfg.master_seed = to_unsigned(value, line);
      } else if (key == "output") {
        cfg.output = std::string(value);
      } else if (key == "workers") {
        cfg.workers = static_cast<unsigned>(std::max(1, to_int(value, line)));
      } else if (key == "timing") {
        cfg.timing = to_bool(value, line);
      } else if (key == "oracle_samples") {
        cfg.oracle_samples = to_unsigned(value, line);
      } else if (key == "slice.width") {
        cfg.slice.initial_width = to_double(value, line);
      } else if (key == "slice.max_doublings") {
        cfg.slice.max_doublings = to_int(value, line);
      } else if (key == "sweep.target") {
        cfg.sweep_target = list_value(value, line);
      } else if (key == "sweep.topology") {
        for (const auto& item : list_value(value, line)) {
          cfg.sweep_topology.push_back(to_topology(item, line));
        }
      } else if (key == "sweep.update_mode") {
        for (const auto& item : list_value(value, line)) {
          cfg.sweep_update_mode.push_back(parse_update_mode(item));
        }
      } else if (key == "sweep.N") {
        for (const auto& item : list_value(value, line)) cfg.sweep_N.push_back(to_unsigned(item, line));
      } else if (key == "sweep.beta") {
        for (const auto& item : list_value(value, line)) cfg.sweep_beta.push_back(to_double(item, line));
      } else if (key == "sweep.p_join") {
        for (const auto& item : list_value(value, line)) {
          cfg.sweep_p_join.push_back(to_double(item, line));
        }
      } else {
        fail(line, "unknown key '" + key + "'");
      }
    } catch (const std::invalid_argument& e) {
      const std::string what = e.what();
      if (what.rfind("config line", 0) == 0) throw;
      fail(line, what);
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::vector<SweepPoint> ExperimentConfig::points() const {
  if (T && *T < 1) throw std::invalid_argument("T must be >= 1");
  if (!(burn_in >= 0.0 && burn_in < 1.0)) throw std::invalid_argument("burn_in must lie in [0, 1)");
  if (!(init_halfwidth >= 0.0)) throw std::invalid_argument("init_halfwidth must be >= 0");
  if (oracle_samples < 2) throw std::invalid_argument("oracle_samples must be >= 2");
  slice.validate();

  const auto targets = sweep_target.empty() ? std::vector<std::string>{target} : sweep_target;
  const auto topologies =
      sweep_topology.empty() ? std::vector<std::pair<int, int>>{{d, m}} : sweep_topology;
  const auto modes = sweep_update_mode.empty() ? std::vector<UpdateMode>{update_mode}
                                               : sweep_update_mode;
  const auto betas = sweep_beta.empty() ? std::vector<double>{beta} : sweep_beta;
  const auto joins = sweep_p_join.empty() ? std::vector<double>{p_join} : sweep_p_join;

  std::vector<SweepPoint> out;
  for (const auto& tgt : targets) {
    const Target parsed = parse_target(tgt);
    const bool barrier = tgt.rfind("barrier", 0) == 0;
    const std::size_t default_N = barrier ? 1'000 : 10'000;
    const std::size_t default_T = barrier ? 1'000 : 100;
    std::vector<std::size_t> lengths =
        sweep_N.empty() ? std::vector<std::size_t>{N.value_or(default_N)} : sweep_N;
    for (const auto& [dd, mm] : topologies) {
      for (auto mode : modes) {
        for (auto n : lengths) {
          for (double b : betas) {
            for (double p : joins) {
              SweepPoint pt;
              pt.target = parsed.spec();
              pt.graph = {kind, dd, mm, static_cast<int>(M), p, shuffle};
              pt.kernel = {b, mode};
              pt.N = n;
              pt.T = T.value_or(default_T);
              if (pt.N < 1) throw std::invalid_argument("N must be >= 1");
              pt.graph.validate();
              pt.kernel.validate();
              out.push_back(pt);
            }
          }
        }
      }
    }
  }
  return out;
}

}  // namespace suburban
