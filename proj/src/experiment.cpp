// Copyright 2026 The critical-fronts Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "critical_fronts/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "critical_fronts/dense_oracle.hpp"
#include "critical_fronts/dynamics.hpp"
#include "critical_fronts/errors.hpp"
#include "critical_fronts/hashing.hpp"

namespace cfronts {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------- config parsing

void check_keys(const json& j, std::initializer_list<std::string_view> allowed,
                const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : j.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError(where + ": unknown key \"" + key + "\"");
}

template <class T>
void read_if(const json& j, const char* key, T& target) {
  if (j.contains(key)) target = j.at(key).get<T>();
}

ScheduleFamily family_from_name(const std::string& name) {
  if (name == "homogeneous") return ScheduleFamily::kHomogeneous;
  if (name == "type1") return ScheduleFamily::kPeriodicTypeI;
  if (name == "type2_tanh") return ScheduleFamily::kTanhTypeII;
  if (name == "multi_front") return ScheduleFamily::kMultiFront;
  throw ConfigError("unknown schedule family: " + name);
}

Front front_from_json(const json& j) {
  check_keys(j, {"center", "theta", "omega", "v", "shape"}, "schedule.fronts[]");
  Front f;
  f.center = j.at("center").get<double>();
  read_if(j, "theta", f.steepness);
  read_if(j, "omega", f.weight);
  read_if(j, "v", f.velocity);
  const std::string shape = j.value("shape", std::string("tanh"));
  if (shape != "tanh" && shape != "linear") throw ConfigError("front shape must be tanh or linear");
  f.shape = shape == "linear" ? FrontShape::kLinear : FrontShape::kTanh;
  return f;
}

json front_to_json(const Front& f) {
  return {{"center", f.center},
          {"theta", f.steepness},
          {"omega", f.weight},
          {"v", f.velocity},
          {"shape", f.shape == FrontShape::kLinear ? "linear" : "tanh"}};
}

AnalyzeConfig analyze_from_json(const json& j) {
  check_keys(j,
             {"model", "quantile", "quantiles", "t_min", "t_max", "min_times", "min_instances",
              "peak_percentile", "min_samples", "bins", "homogeneous", "sites", "tail_bins",
              "minimal_gap_q"},
             "analyze");
  AnalyzeConfig a;
  if (j.contains("model")) {
    const std::string m = j.at("model").get<std::string>();
    if (m == "log_law") a.fit.model = ScalingModel::kLogLaw;
    else if (m == "power_law") a.fit.model = ScalingModel::kPowerLaw;
    else throw ConfigError("analyze.model must be log_law or power_law");
  }
  read_if(j, "quantile", a.fit.quantile);
  read_if(j, "quantiles", a.quantiles);
  read_if(j, "t_min", a.fit.t_min);
  read_if(j, "t_max", a.fit.t_max);
  read_if(j, "min_times", a.fit.min_times);
  read_if(j, "min_instances", a.fit.min_instances);
  read_if(j, "peak_percentile", a.rescale.peak_percentile);
  read_if(j, "min_samples", a.rescale.min_samples);
  read_if(j, "bins", a.rescale.bins);
  read_if(j, "homogeneous", a.rescale.homogeneous);
  read_if(j, "sites", a.rescale.sites);
  read_if(j, "tail_bins", a.tail_bins);
  read_if(j, "minimal_gap_q", a.minimal_gap_q);
  if (a.quantiles.empty()) throw ConfigError("analyze.quantiles must not be empty");
  for (double q : a.quantiles)
    if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("analyze.quantiles must lie in [0, 1]");
  if (a.rescale.bins < 2 || a.tail_bins < 2) throw ConfigError("analyze: bins must be >= 2");
  return a;
}

json analyze_to_json(const AnalyzeConfig& a) {
  json j{{"model", a.fit.model == ScalingModel::kLogLaw ? "log_law" : "power_law"},
         {"quantile", a.fit.quantile},
         {"quantiles", a.quantiles},
         {"t_min", a.fit.t_min},
         {"min_times", a.fit.min_times},
         {"min_instances", a.fit.min_instances},
         {"peak_percentile", a.rescale.peak_percentile},
         {"min_samples", a.rescale.min_samples},
         {"bins", a.rescale.bins},
         {"homogeneous", a.rescale.homogeneous},
         {"sites", a.rescale.sites},
         {"tail_bins", a.tail_bins},
         {"minimal_gap_q", a.minimal_gap_q}};
  if (std::isfinite(a.fit.t_max)) j["t_max"] = a.fit.t_max;
  return j;
}

// ---------------------------------------------------------------- formatting

std::string num(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_atomically(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + tmp.string());
    out << content;
  }
  fs::rename(tmp, path);
}

std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream s(line);
  while (std::getline(s, cell, sep)) cells.push_back(cell);
  if (!line.empty() && line.back() == sep) cells.emplace_back();
  return cells;
}

// Complete lines of a journal file; a torn trailing line is dropped and the
// file truncated to the last newline.
std::vector<std::string> load_journal(const fs::path& path, const std::string& header) {
  std::vector<std::string> lines;
  if (!fs::exists(path)) {
    std::ofstream(path, std::ios::binary) << header << '\n';
    return lines;
  }
  std::string content = read_file(path);
  const std::size_t end = content.rfind('\n');
  content = end == std::string::npos ? std::string() : content.substr(0, end + 1);
  std::istringstream in(content);
  std::string line;
  if (!std::getline(in, line) || line != header) {
    if (content.empty()) {
      std::ofstream(path, std::ios::binary | std::ios::trunc) << header << '\n';
      return lines;
    }
    throw ConfigError(path.string() + ": header does not match this run");
  }
  while (std::getline(in, line))
    if (!line.empty()) lines.push_back(line);
  std::ofstream(path, std::ios::binary | std::ios::trunc) << content;
  return lines;
}

// Single writer shared by the workers: whole lines, flushed immediately.
class Appender {
 public:
  explicit Appender(const fs::path& path) : out_(path, std::ios::binary | std::ios::app) {
    if (!out_) throw ConfigError("cannot append to " + path.string());
  }
  void write(const std::string& block) {
    std::lock_guard lock(mutex_);
    out_ << block;
    out_.flush();
  }

 private:
  std::mutex mutex_;
  std::ofstream out_;
};

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& body) {
  std::atomic<std::size_t> next{0};
  auto loop = [&] {
    for (std::size_t i = next++; i < count; i = next++) body(i);
  };
  const int extra = std::max(0, std::min<int>(workers, static_cast<int>(count)) - 1);
  std::vector<std::jthread> threads;
  for (int w = 0; w < extra; ++w) threads.emplace_back(loop);
  loop();
}

struct Failure {
  std::string key;
  std::string error;
};

class FailureLog {
 public:
  void add(std::string key, std::string error) {
    std::lock_guard lock(mutex_);
    std::cerr << "failed " << key << ": " << error << '\n';
    failures_.push_back({std::move(key), std::move(error)});
  }
  std::vector<Failure> sorted() {
    std::lock_guard lock(mutex_);
    std::vector<Failure> f = failures_;
    std::sort(f.begin(), f.end(), [](const Failure& a, const Failure& b) { return a.key < b.key; });
    return f;
  }

 private:
  std::mutex mutex_;
  std::vector<Failure> failures_;
};

json failures_json(const std::vector<Failure>& failures) {
  json arr = json::array();
  for (const Failure& f : failures) arr.push_back({{"key", f.key}, {"error", f.error}});
  return arr;
}

void finish(RunSummary& s, std::size_t failed) {
  s.failed = failed;
  s.exit_code = static_cast<double>(failed) > 0.01 * static_cast<double>(s.total) ? 1 : 0;
}

json summary_json(const RunSummary& s) {
  return {{"total", s.total}, {"completed", s.completed}, {"resumed", s.resumed},
          {"failed", s.failed}};
}

void require_sweep_config(const ExperimentConfig& c) {
  if (c.sizes.empty()) throw ConfigError("N list must not be empty");
  if (c.times.empty()) throw ConfigError("T list must not be empty");
}

}  // namespace

std::string family_name(ScheduleFamily family) {
  switch (family) {
    case ScheduleFamily::kHomogeneous: return "homogeneous";
    case ScheduleFamily::kPeriodicTypeI: return "type1";
    case ScheduleFamily::kTanhTypeII: return "type2_tanh";
    case ScheduleFamily::kMultiFront: return "multi_front";
  }
  return "unknown";
}

ExperimentConfig config_from_json(const json& j, bool require_sweep) {
  try {
    check_keys(j,
               {"model", "distribution", "three_local_distribution", "N", "T", "schedule",
                "instances", "base_seed", "output", "workers", "integrator", "oracle",
                "dump_bonds", "gaps", "sdrg", "analyze"},
               "config");
    ExperimentConfig c;
    if (j.contains("model")) {
      const std::string m = j.at("model").get<std::string>();
      if (m == "ising") c.model = Model::kIsing;
      else if (m == "cluster_ising") c.model = Model::kClusterIsing;
      else throw ConfigError("model must be ising or cluster_ising");
    }
    if (j.contains("distribution")) {
      check_keys(j.at("distribution"), {"kind", "lo", "hi", "value"}, "distribution");
      c.distribution = distribution_from_json(j.at("distribution"));
    }
    if (j.contains("three_local_distribution")) {
      check_keys(j.at("three_local_distribution"), {"kind", "lo", "hi", "value"},
                 "three_local_distribution");
      c.three_local = distribution_from_json(j.at("three_local_distribution"));
    }
    if (c.model == Model::kClusterIsing && !c.three_local)
      throw ConfigError("cluster_ising needs three_local_distribution");
    if (c.model == Model::kIsing && c.three_local)
      throw ConfigError("three_local_distribution is only valid for cluster_ising");
    read_if(j, "N", c.sizes);
    read_if(j, "T", c.times);
    if (require_sweep || j.contains("N") || j.contains("T")) require_sweep_config(c);
    for (int n : c.sizes)
      if (n < 2) throw ConfigError("every N must be >= 2");
    for (double t : c.times)
      if (!(t > 0.0)) throw ConfigError("every T must be > 0");

    if (j.contains("schedule")) {
      const json& s = j.at("schedule");
      check_keys(s,
                 {"family", "alpha", "kappa", "a", "k", "fronts", "critical_field",
                  "start_at_midpoint", "partition", "g_initial", "g_final"},
                 "schedule");
      c.family = family_from_name(s.at("family").get<std::string>());
      read_if(s, "alpha", c.alphas);
      read_if(s, "kappa", c.kappa);
      read_if(s, "a", c.amplitude);
      read_if(s, "k", c.wavenumber);
      if (s.contains("fronts"))
        for (const json& f : s.at("fronts")) c.fronts.push_back(front_from_json(f));
      if (s.contains("critical_field")) c.critical_field = s.at("critical_field").get<double>();
      read_if(s, "start_at_midpoint", c.start_at_midpoint);
      if (s.contains("partition")) {
        const std::string p = s.at("partition").get<std::string>();
        if (p != "weakest_link" && p != "single")
          throw ConfigError("schedule.partition must be weakest_link or single");
        c.single_cluster = p == "single";
      }
      read_if(s, "g_initial", c.g_initial);
      read_if(s, "g_final", c.g_final);
    }
    if (c.alphas.empty()) throw ConfigError("schedule.alpha must not be empty");
    for (double a : c.alphas)
      if (!(a > 0.0)) throw ConfigError("every alpha must be > 0");
    if (!(c.kappa > 0.0)) throw ConfigError("schedule.kappa must be > 0");
    if (c.family == ScheduleFamily::kTanhTypeII && c.fronts.empty())
      throw ConfigError("type2_tanh needs schedule.fronts");

    read_if(j, "instances", c.instances);
    read_if(j, "base_seed", c.base_seed);
    if (j.contains("output")) c.output = j.at("output").get<std::string>();
    read_if(j, "workers", c.workers);
    if (c.instances < 1) throw ConfigError("instances must be >= 1");
    if (c.workers < 1) throw ConfigError("workers must be >= 1");

    if (j.contains("integrator")) {
      const json& s = j.at("integrator");
      check_keys(s, {"method", "max_step", "order", "tolerance", "chunk_steps"}, "integrator");
      if (s.contains("method")) {
        const std::string m = s.at("method").get<std::string>();
        if (m == "splitting") c.control.method = Integrator::kSplitting;
        else if (m == "rk45") c.control.method = Integrator::kRungeKutta;
        else throw ConfigError("integrator.method must be splitting or rk45");
      }
      read_if(s, "max_step", c.control.max_step);
      read_if(s, "order", c.control.order);
      read_if(s, "tolerance", c.control.tolerance);
      read_if(s, "chunk_steps", c.control.chunk_steps);
    }
    if (!(c.control.max_step > 0.0)) throw ConfigError("integrator.max_step must be > 0");
    if (c.control.order != 2 && c.control.order != 4)
      throw ConfigError("integrator.order must be 2 or 4");
    if (!(c.control.tolerance > 0.0)) throw ConfigError("integrator.tolerance must be > 0");
    if (c.control.chunk_steps < 1) throw ConfigError("integrator.chunk_steps must be >= 1");

    read_if(j, "oracle", c.oracle);
    read_if(j, "dump_bonds", c.dump_bonds);

    if (j.contains("gaps")) {
      const json& s = j.at("gaps");
      check_keys(s, {"positions", "residual_size", "method", "threshold"}, "gaps");
      read_if(s, "positions", c.gaps.positions);
      read_if(s, "residual_size", c.gaps.residual_size);
      read_if(s, "threshold", c.gaps.threshold);
      if (s.contains("method")) {
        const std::string m = s.at("method").get<std::string>();
        if (m == "sdrg") c.gaps.method = GapMethod::kSdrg;
        else if (m == "exact") c.gaps.method = GapMethod::kExact;
        else throw ConfigError("gaps.method must be sdrg or exact");
      }
      if (c.gaps.positions < 1) throw ConfigError("gaps.positions must be >= 1");
      if (c.gaps.residual_size < 1) throw ConfigError("gaps.residual_size must be >= 1");
    }
    if (j.contains("sdrg")) {
      const json& s = j.at("sdrg");
      check_keys(s, {"fields", "cutoff", "residual_size"}, "sdrg");
      read_if(s, "fields", c.sdrg.fields);
      read_if(s, "cutoff", c.sdrg.zone_cutoff);
      if (s.contains("residual_size")) c.sdrg.residual_size = s.at("residual_size").get<int>();
      if (c.sdrg.fields.empty()) throw ConfigError("sdrg.fields must not be empty");
    }
    if (j.contains("analyze")) c.analyze = analyze_from_json(j.at("analyze"));
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

json to_json(const ExperimentConfig& c) {
  json schedule{{"family", family_name(c.family)},
                {"alpha", c.alphas},
                {"kappa", c.kappa},
                {"a", c.amplitude},
                {"k", c.wavenumber},
                {"start_at_midpoint", c.start_at_midpoint},
                {"partition", c.single_cluster ? "single" : "weakest_link"},
                {"g_initial", c.g_initial},
                {"g_final", c.g_final}};
  if (!c.fronts.empty()) {
    schedule["fronts"] = json::array();
    for (const Front& f : c.fronts) schedule["fronts"].push_back(front_to_json(f));
  }
  if (c.critical_field) schedule["critical_field"] = *c.critical_field;
  json j{{"model", c.model == Model::kIsing ? "ising" : "cluster_ising"},
         {"distribution", to_json(c.distribution)},
         {"N", c.sizes},
         {"T", c.times},
         {"schedule", schedule},
         {"instances", c.instances},
         {"base_seed", c.base_seed},
         {"output", c.output.string()},
         {"workers", c.workers},
         {"integrator",
          {{"method", c.control.method == Integrator::kSplitting ? "splitting" : "rk45"},
           {"max_step", c.control.max_step},
           {"order", c.control.order},
           {"tolerance", c.control.tolerance},
           {"chunk_steps", c.control.chunk_steps}}},
         {"oracle", c.oracle},
         {"dump_bonds", c.dump_bonds},
         {"gaps",
          {{"positions", c.gaps.positions},
           {"residual_size", c.gaps.residual_size},
           {"method", c.gaps.method == GapMethod::kSdrg ? "sdrg" : "exact"},
           {"threshold", c.gaps.threshold}}},
         {"sdrg", {{"fields", c.sdrg.fields}, {"cutoff", c.sdrg.zone_cutoff}}},
         {"analyze", analyze_to_json(c.analyze)}};
  if (c.three_local) j["three_local_distribution"] = to_json(*c.three_local);
  if (c.sdrg.residual_size) j["sdrg"]["residual_size"] = *c.sdrg.residual_size;
  return j;
}

std::string config_hash(const ExperimentConfig& config) {
  json j = to_json(config);
  j.erase("output");
  j.erase("workers");
  return fnv1a_hex(j.dump());
}

DisorderRealization make_realization(const ExperimentConfig& c, int sites, std::uint64_t seed) {
  if (c.model == Model::kClusterIsing)
    return sample_couplings(c.distribution, *c.three_local, sites, seed);
  return sample_couplings(c.distribution, sites, seed);
}

ScheduleSpec make_schedule(const ExperimentConfig& c, const DisorderRealization& r, int sites,
                           double total_time, double alpha) {
  ScheduleSpec spec;
  spec.sites = sites;
  spec.g_initial = c.g_initial;
  spec.g_final = c.g_final;
  spec.total_time = total_time;
  switch (c.family) {
    case ScheduleFamily::kHomogeneous:
      spec.params = HomogeneousRamp{};
      break;
    case ScheduleFamily::kPeriodicTypeI:
      spec.params = PeriodicTypeI{c.amplitude, c.wavenumber};
      break;
    case ScheduleFamily::kTanhTypeII:
      spec.params = TanhTypeII{c.critical_field.value_or(critical_field(r)), c.fronts};
      break;
    case ScheduleFamily::kMultiFront: {
      const PartitionParams p{total_time, alpha, c.kappa, c.g_initial, c.g_final};
      spec.params = MultiFrontPiecewise{
          alpha,
          c.single_cluster ? ClusterPartition::uniform(sites, 1, cluster_velocity(p, sites))
                           : partition_clusters(r, p),
          c.start_at_midpoint};
      break;
    }
  }
  validate(spec);
  return spec;
}

// ---------------------------------------------------------------- quench

RunSummary run_quench(const ExperimentConfig& c) {
  require_sweep_config(c);
  if (c.oracle)
    for (int n : c.sizes)
      if (n > kDenseOracleMaxSites) throw ConfigError("--oracle needs every N <= 12");
  fs::create_directories(c.output);
  if (c.dump_bonds) fs::create_directories(c.output / "bonds");

  const std::string family = family_name(c.family);
  const std::vector<double> alphas =
      c.family == ScheduleFamily::kMultiFront ? c.alphas : std::vector<double>{0.0};
  using Key = std::tuple<int, double, double, std::uint64_t>;  // N, T, alpha, seed

  const fs::path results = c.output / "results.csv";
  std::vector<std::string> lines = load_journal(results, kResultsHeader);
  std::set<Key> done;
  for (const std::string& line : lines) {
    const auto cells = split(line);
    if (cells.size() != 16 || cells[0] != family)
      throw ConfigError(results.string() + ": row from a different run: " + line);
    done.insert({std::stoi(cells[1]), std::stod(cells[2]), std::stod(cells[3]),
                 std::stoull(cells[4])});
  }

  struct Unit {
    int sites;
    double time;
    double alpha;
    int instance;
    std::uint64_t seed;
  };
  std::vector<Unit> units;
  RunSummary summary;
  for (int n : c.sizes)
    for (double t : c.times)
      for (double a : alphas)
        for (int i = 0; i < c.instances; ++i) {
          const std::uint64_t seed = derive_seed(c.base_seed, static_cast<std::uint64_t>(i));
          ++summary.total;
          if (done.count({n, t, a, seed})) {
            ++summary.resumed;
            continue;
          }
          units.push_back({n, t, a, i, seed});
        }

  Appender writer(results);
  FailureLog failures;
  std::atomic<std::size_t> completed{0};
  parallel_for(units.size(), c.workers, [&](std::size_t k) {
    const Unit& u = units[k];
    const std::string key = family + " N=" + std::to_string(u.sites) + " T=" + num(u.time) +
                            " alpha=" + num(u.alpha) + " seed=" + std::to_string(u.seed);
    try {
      const auto start = std::chrono::steady_clock::now();
      const DisorderRealization r = make_realization(c, u.sites, u.seed);
      const ScheduleSpec spec = make_schedule(c, r, u.sites, u.time, u.alpha);
      const EvolutionState state = evolve(r, spec, {BuildOptions{}, c.control});
      const DefectReport rep = measure(state, r, spec);
      std::string oracle_diff;
      if (c.oracle)
        oracle_diff = num(std::abs(dense_oracle(r, spec).final_energy - rep.energy));
      const int clusters =
          c.family == ScheduleFamily::kMultiFront
              ? std::get<MultiFrontPiecewise>(spec.params).partition.cluster_count()
              : 1;
      const double wall =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (c.dump_bonds) {
        std::ostringstream b;
        b << "bond,J,kink\n";
        for (std::size_t n = 0; n < rep.bond_kinks.size(); ++n)
          b << n + 1 << ',' << num(r.couplings[n]) << ',' << num(rep.bond_kinks[n]) << '\n';
        write_atomically(c.output / "bonds" /
                             (family + "_N" + std::to_string(u.sites) + "_T" + num(u.time) +
                              "_a" + num(u.alpha) + "_s" + std::to_string(u.seed) + ".csv"),
                         b.str());
      }
      std::ostringstream row;
      row << family << ',' << u.sites << ',' << num(u.time) << ',' << num(u.alpha) << ','
          << u.seed << ',' << u.instance << ',' << schedule_hash(spec) << ','
          << num(rep.residual_per_site) << ','
          << num(rep.defect_density) << ',' << clusters << ',' << num(rep.energy) << ','
          << num(rep.ground_energy) << ',' << state.stats.steps << ','
          << num(state.stats.max_drift) << ',' << oracle_diff << ',' << std::fixed
          << std::setprecision(6) << wall << '\n';
      writer.write(row.str());
      ++completed;
    } catch (const std::exception& e) {
      failures.add(key, e.what());
    }
  });
  summary.completed = completed;
  const std::vector<Failure> failed = failures.sorted();
  finish(summary, failed.size());

  // Rewrite in key order.
  lines = load_journal(results, kResultsHeader);
  std::vector<std::pair<Key, std::string>> keyed;
  for (const std::string& line : lines) {
    const auto cells = split(line);
    keyed.push_back({{std::stoi(cells[1]), std::stod(cells[2]), std::stod(cells[3]),
                      std::stoull(cells[4])},
                     line});
  }
  std::sort(keyed.begin(), keyed.end());
  std::string content = std::string(kResultsHeader) + "\n";
  for (const auto& [key, line] : keyed) content += line + "\n";
  write_atomically(results, content);

  json report{{"command", "quench"},
              {"config", to_json(c)},
              {"config_hash", config_hash(c)},
              {"summary", summary_json(summary)},
              {"failures", failures_json(failed)},
              {"outputs", {{"results.csv", git_blob_sha1(content)}}}};
  report["config"].erase("output");
  report["config"].erase("workers");
  write_atomically(c.output / "report.json", report.dump(2) + "\n");
  return summary;
}

// ---------------------------------------------------------------- gaps

RunSummary run_gaps(const ExperimentConfig& c) {
  if (c.sizes.size() != 1) throw ConfigError("gaps: exactly one N per run");
  if (c.model != Model::kIsing) throw ConfigError("gaps: only the ising model");
  fs::create_directories(c.output / "gaps");
  const int sites = c.sizes.front();

  const std::string header = "seed,alpha,front_pos,delta,omega,time";
  const fs::path journal = c.output / "gaps.journal.csv";
  const fs::path done_path = c.output / "gaps.done";
  std::vector<std::string> rows = load_journal(journal, header);
  std::vector<std::string> done_lines = load_journal(done_path, "alpha,instance");
  std::set<std::pair<double, int>> done;
  for (const std::string& line : done_lines) {
    const auto cells = split(line);
    done.insert({std::stod(cells.at(0)), std::stoi(cells.at(1))});
  }

  std::vector<std::pair<double, int>> units;
  RunSummary summary;
  for (double a : c.alphas)
    for (int i = 0; i < c.instances; ++i) {
      ++summary.total;
      if (done.count({a, i})) ++summary.resumed;
      else units.emplace_back(a, i);
    }

  {
    Appender rows_out(journal);
    Appender done_out(done_path);
    FailureLog failures;
    std::atomic<std::size_t> completed{0};
    parallel_for(units.size(), c.workers, [&](std::size_t k) {
      const auto [alpha, instance] = units[k];
      try {
        GapStatisticsOptions o;
        o.sites = sites;
        o.distribution = c.distribution;
        o.alphas = {alpha};
        o.instances = 1;
        o.first_instance = instance;
        o.base_seed = c.base_seed;
        o.positions = c.gaps.positions;
        o.g_initial = c.g_initial;
        o.g_final = c.g_final;
        o.method = c.gaps.method;
        o.residual_size = c.gaps.residual_size;
        o.threshold = c.gaps.threshold;
        std::ostringstream block;
        for (const GapSample& s : gap_statistics(o)) write_gap_csv_row(block, s);
        rows_out.write(block.str());
        done_out.write(num(alpha) + "," + std::to_string(instance) + "\n");
        ++completed;
      } catch (const std::exception& e) {
        failures.add("alpha=" + num(alpha) + " instance=" + std::to_string(instance), e.what());
      }
    });
    summary.completed = completed;
    const std::vector<Failure> failed = failures.sorted();
    finish(summary, failed.size());

    // Keep rows of completed instances only; a crash between the two appends
    // leaves rows without a done marker, which the rerun regenerates.
    done.clear();
    for (const std::string& line : load_journal(done_path, "alpha,instance")) {
      const auto cells = split(line);
      done.insert({std::stod(cells.at(0)), std::stoi(cells.at(1))});
    }
    std::map<std::uint64_t, int> instance_of;
    for (int i = 0; i < c.instances; ++i)
      instance_of[derive_seed(c.base_seed, static_cast<std::uint64_t>(i))] = i;
    std::istringstream in(header + "\n" + [&] {
      std::string s;
      for (const std::string& r : load_journal(journal, header)) s += r + "\n";
      return s;
    }());
    std::vector<GapSample> samples;
    std::set<std::tuple<double, std::uint64_t, double>> seen;
    for (const GapSample& s : read_gap_csv(in)) {
      const auto it = instance_of.find(s.seed);
      if (it == instance_of.end() || !done.count({s.alpha, it->second})) continue;
      if (!seen.insert({s.alpha, s.seed, s.front_pos}).second) continue;
      samples.push_back(s);
    }
    std::sort(samples.begin(), samples.end(), [](const GapSample& a, const GapSample& b) {
      return std::tie(a.alpha, a.seed, a.front_pos) < std::tie(b.alpha, b.seed, b.front_pos);
    });

    json outputs = json::object();
    auto emit = [&](const fs::path& path, const std::vector<GapSample>& subset) {
      std::ostringstream out;
      write_gap_csv_header(out);
      for (const GapSample& s : subset) write_gap_csv_row(out, s);
      write_atomically(path, out.str());
      outputs[fs::relative(path, c.output).generic_string()] = git_blob_sha1(out.str());
    };
    emit(c.output / "gaps.csv", samples);
    json per_alpha = json::array();
    for (std::size_t k = 0; k < c.alphas.size(); ++k) {
      std::vector<GapSample> subset;
      std::set<std::uint64_t> seeds;
      for (const GapSample& s : samples)
        if (s.alpha == c.alphas[k]) {
          subset.push_back(s);
          seeds.insert(s.seed);
        }
      emit(c.output / "gaps" / ("alpha_" + num(c.alphas[k]) + ".csv"), subset);
      per_alpha.push_back({{"alpha", c.alphas[k]},
                           {"samples", subset.size()},
                           {"instances_with_samples", seeds.size()}});
    }
    json report{{"command", "gaps"},
                {"config", to_json(c)},
                {"config_hash", config_hash(c)},
                {"summary", summary_json(summary)},
                {"failures", failures_json(failed)},
                {"alphas", per_alpha},
                {"outputs", outputs}};
    report["config"].erase("output");
    report["config"].erase("workers");
    write_atomically(c.output / "report.json", report.dump(2) + "\n");
  }
  return summary;
}

// ---------------------------------------------------------------- sdrg

RunSummary run_sdrg(const ExperimentConfig& c) {
  if (c.sizes.empty()) throw ConfigError("N list must not be empty");
  if (c.model != Model::kIsing) throw ConfigError("sdrg: only the ising model");
  fs::create_directories(c.output / "trees");

  struct Unit {
    int sites;
    int instance;
    double field;
    fs::path path;
  };
  std::vector<Unit> units;
  RunSummary summary;
  for (int n : c.sizes)
    for (int i = 0; i < c.instances; ++i)
      for (double g : c.sdrg.fields) {
        ++summary.total;
        const fs::path path = c.output / "trees" /
                              ("N" + std::to_string(n) + "_i" + std::to_string(i) + "_g" +
                               num(g) + ".json");
        if (fs::exists(path)) ++summary.resumed;
        else units.push_back({n, i, g, path});
      }

  FailureLog failures;
  std::atomic<std::size_t> completed{0};
  parallel_for(units.size(), c.workers, [&](std::size_t k) {
    const Unit& u = units[k];
    try {
      const std::uint64_t seed = derive_seed(c.base_seed, static_cast<std::uint64_t>(u.instance));
      const DisorderRealization r = make_realization(c, u.sites, seed);
      const std::vector<double> fields(static_cast<std::size_t>(u.sites), u.field);
      const FlowResult flow = run_flow(r, fields, FlowStop{std::nullopt, c.sdrg.residual_size});
      json zones = json::array();
      for (const Interval& z : causal_zones(flow.tree, c.sdrg.zone_cutoff))
        zones.push_back({z.first, z.last});
      const json doc{{"N", u.sites},
                     {"instance", u.instance},
                     {"seed", seed},
                     {"field", u.field},
                     {"zone_cutoff", c.sdrg.zone_cutoff},
                     {"zones", zones},
                     {"residual_size", flow.residual.size()},
                     {"tree", flow.tree.to_json()}};
      write_atomically(u.path, doc.dump() + "\n");
      ++completed;
    } catch (const std::exception& e) {
      failures.add(u.path.filename().string(), e.what());
    }
  });
  summary.completed = completed;
  const std::vector<Failure> failed = failures.sorted();
  finish(summary, failed.size());

  json outputs = json::object();
  for (int n : c.sizes)
    for (int i = 0; i < c.instances; ++i)
      for (double g : c.sdrg.fields) {
        const std::string name =
            "N" + std::to_string(n) + "_i" + std::to_string(i) + "_g" + num(g) + ".json";
        const fs::path path = c.output / "trees" / name;
        if (fs::exists(path)) outputs["trees/" + name] = git_blob_sha1(read_file(path));
      }
  json report{{"command", "sdrg"},
              {"config", to_json(c)},
              {"config_hash", config_hash(c)},
              {"summary", summary_json(summary)},
              {"failures", failures_json(failed)},
              {"outputs", outputs}};
  report["config"].erase("output");
  report["config"].erase("workers");
  write_atomically(c.output / "report.json", report.dump(2) + "\n");
  return summary;
}

// ---------------------------------------------------------------- analyze

namespace {

json fit_or_refusal(const SweepTable& table, FitOptions options, ScalingModel model) {
  options.model = model;
  try {
    return to_json(fit_scaling(table, options));
  } catch (const FitRefused& e) {
    return {{"refused", e.what()}};
  }
}

}  // namespace

RunSummary run_analyze(const std::vector<fs::path>& inputs, const fs::path& out,
                       const AnalyzeConfig& config) {
  if (inputs.empty()) throw ConfigError("analyze: no input files");
  SweepTable table;
  std::vector<GapSample> samples;
  json input_hashes = json::array();
  for (const fs::path& path : inputs) {
    if (!fs::exists(path)) throw ConfigError("analyze: missing input " + path.string());
    const std::string content = read_file(path);
    input_hashes.push_back({{"path", path.generic_string()}, {"git_blob_sha1", git_blob_sha1(content)}});
    std::istringstream in(content);
    try {
      if (content.rfind("family,", 0) == 0) {
        const SweepTable part = SweepTable::read_csv(in);
        for (const auto& [key, record] : part.records()) table.insert(record);
      } else if (content.rfind("seed,alpha,front_pos,delta,omega,time", 0) == 0) {
        const auto more = read_gap_csv(in);
        samples.insert(samples.end(), more.begin(), more.end());
      } else {
        throw ConfigError("analyze: unrecognised table " + path.string());
      }
    } catch (const DomainError& e) {
      throw ConfigError(std::string("analyze: ") + e.what());
    } catch (const std::invalid_argument& e) {
      throw ConfigError("analyze: malformed number in " + path.string());
    }
  }
  fs::create_directories(out);

  RunSummary summary;
  json sweeps = json::array();
  std::ostringstream quantiles;
  quantiles << "family,N,alpha,T,q,value,count\n";

  // Group by (family, N, alpha).
  std::set<std::tuple<std::string, int, double>> groups;
  for (const auto& [key, r] : table.records()) groups.insert({r.family, r.sites, r.alpha});
  for (const auto& [family, sites, alpha] : groups) {
    const SweepTable sub = table.select(family, alpha, sites);
    ++summary.total;
    json curves = json::array();
    for (double t : sub.times()) {
      std::vector<double> eps, defects, clusters;
      for (const auto& [key, r] : sub.records())
        if (r.total_time == t) {
          eps.push_back(r.residual_per_site);
          defects.push_back(r.defect_density);
          clusters.push_back(r.clusters);
        }
      json qs = json::object();
      for (double q : config.quantiles) {
        const double v = quantile(eps, q);
        qs[num(q)] = v;
        quantiles << family << ',' << sites << ',' << num(alpha) << ',' << num(t) << ','
                  << num(q) << ',' << num(v) << ',' << eps.size() << '\n';
      }
      double mean_clusters = 0.0, mean_defects = 0.0;
      for (std::size_t k = 0; k < eps.size(); ++k) {
        mean_clusters += clusters[k];
        mean_defects += defects[k];
      }
      curves.push_back({{"T", t},
                        {"instances", eps.size()},
                        {"eps_quantiles", qs},
                        {"mean_defect_density", mean_defects / static_cast<double>(eps.size())},
                        {"mean_clusters", mean_clusters / static_cast<double>(eps.size())}});
    }
    sweeps.push_back({{"family", family},
                      {"N", sites},
                      {"alpha", alpha},
                      {"curves", curves},
                      {"log_law", fit_or_refusal(sub, config.fit, ScalingModel::kLogLaw)},
                      {"power_law", fit_or_refusal(sub, config.fit, ScalingModel::kPowerLaw)}});
    ++summary.completed;
  }

  json gaps = nullptr;
  if (!samples.empty()) {
    ++summary.total;
    gaps = json::object();
    gaps["samples"] = samples.size();
    try {
      const RescaleResult rescaled = rescale_gaps(samples, config.rescale);
      gaps["rescale"] = to_json(rescaled);
      std::vector<double> pooled;
      for (const GapGroup& g : rescaled.groups) pooled.insert(pooled.end(), g.x.begin(), g.x.end());
      const GaussianTail tail = fit_gaussian_tail(pooled, config.tail_bins);
      gaps["tail"] = {{"a", tail.a}, {"x0", tail.x0}};
      if (config.rescale.sites >= 2) {
        json minimal = json::array();
        for (const GapGroup& g : rescaled.groups) {
          json entry{{"alpha", g.alpha}, {"q", config.minimal_gap_q}};
          try {
            entry["delta_min"] = minimal_gap_quantile(tail.a, config.rescale.sites,
                                                      config.minimal_gap_q, g.alpha, tail.x0);
          } catch (const DomainError& e) {
            entry["refused"] = e.what();
          }
          minimal.push_back(entry);
        }
        gaps["minimal_gap"] = minimal;
      }
      ++summary.completed;
    } catch (const FitRefused& e) {
      gaps["refused"] = e.what();
    }
  }

  const std::string quantile_csv = quantiles.str();
  write_atomically(out / "quantiles.csv", quantile_csv);
  const json report{{"command", "analyze"},
                    {"config", analyze_to_json(config)},
                    {"config_hash", fnv1a_hex(analyze_to_json(config).dump())},
                    {"inputs", input_hashes},
                    {"sweeps", sweeps},
                    {"gaps", gaps},
                    {"outputs", {{"quantiles.csv", git_blob_sha1(quantile_csv)}}}};
  write_atomically(out / "report.json", report.dump(2) + "\n");
  return summary;
}

}  // namespace cfronts
