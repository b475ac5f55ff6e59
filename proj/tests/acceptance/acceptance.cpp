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

// Acceptance criteria 1-12. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.
//
//   acceptance [--batch-dir DIR] [--only 1,2,...]
//
// Criteria 5, 6, 7, 9, 10 and 11 read sweeps produced by tools/run_batch.sh.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "critical_fronts/analysis.hpp"
#include "critical_fronts/dense_oracle.hpp"
#include "critical_fronts/dynamics.hpp"
#include "critical_fronts/errors.hpp"
#include "critical_fronts/instance.hpp"
#include "critical_fronts/quadratic.hpp"
#include "critical_fronts/schedules.hpp"
#include "critical_fronts/sdrg.hpp"

using namespace cfronts;
namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------- tolerances

constexpr double kOracleTolerance = 1e-6;           // 1
constexpr double kOracleStep = 0.005;
constexpr double kPureKzmExponent = 0.5;            // 2
constexpr double kPureKzmWindow = 0.05;
constexpr double kThresholdDrop = 10.0;             // 3
constexpr double kThresholdSlope = 0.1;
constexpr double kGrowingClusterKinks = 0.05;       // 4
constexpr double kMergeKinks = 0.5;
constexpr double kMergeWindow = 0.02;
constexpr int kMergeRegion = 8;                     // bonds on each side of the merge bond
constexpr double kLogLawMin = 3.0;                  // 5
constexpr double kLogLawMax = 4.5;
constexpr int kMinInstances = 200;
constexpr double kPowerLaw = 1.0;                   // 6
constexpr double kPowerLawWindow = 0.2;
constexpr double kAdvantage = 10.0;
constexpr double kClusterExponent = 0.5;            // 8
constexpr double kClusterWindow = 0.1;
constexpr double kCollapseKs = 0.1;                 // 9
constexpr double kUnrescaledKs = 0.3;
constexpr int kGapInstances = 500;
constexpr double kRankCorrelation = 0.9;
constexpr double kJointKs = 0.15;                   // 10
constexpr double kUnitarity = 1e-8;                 // 12

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double time_limit;  // seconds, 0 for none
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

double median(std::vector<double> v) { return quantile(v, 0.5); }

// ---------------------------------------------------------------- 1

Outcome oracle_equivalence() {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto dist = CouplingDistribution::uniform(-1.0, 1.0);
  const auto three = CouplingDistribution::uniform(-0.5, 0.5);
  double worst = 0.0;
  int configs = 0;
  for (int i = 0; i < 50; ++i) {
    const int n = 2 + static_cast<int>(u(rng) * 7.0);  // 2..8
    const bool cluster = i % 2 == 1 && n >= 3;
    const std::uint64_t seed = derive_seed(99, static_cast<std::uint64_t>(i));
    const DisorderRealization r =
        cluster ? sample_couplings(dist, three, n, seed) : sample_couplings(dist, n, seed);
    ScheduleSpec s;
    s.sites = n;
    s.total_time = 2.0 + 10.0 * u(rng);
    s.g_initial = 2.0;
    s.g_final = 0.0;
    BuildOptions boundary;
    const int family = i % 6;
    const double gc = critical_field(r);
    switch (family) {
      case 0:
        break;
      case 1:
        s.params = PeriodicTypeI{0.5 * u(rng), 3.0 * u(rng)};
        break;
      case 2:
        s.params = TanhTypeII{gc, {Front{1.0, 0.3 + u(rng), 1.5, 0.5 + u(rng), FrontShape::kTanh}}};
        break;
      case 3:
        s.params = TanhTypeII{gc, {Front{0.5 * (n + 1), 0.2 + u(rng), 1.0, 0.5 + u(rng),
                                         FrontShape::kLinear}}};
        break;
      case 4: {
        const double alpha = 0.125 + 0.5 * u(rng);
        s.params = MultiFrontPiecewise{
            alpha, partition_clusters(r, {s.total_time, alpha, 2.0, s.g_initial, s.g_final}), false};
        break;
      }
      default: {
        const double alpha = 0.25;
        const int clusters = n >= 4 ? 2 : 1;
        const PartitionParams pp{s.total_time, alpha, 2.0, s.g_initial, s.g_final};
        s.params = MultiFrontPiecewise{
            alpha, ClusterPartition::uniform(n, clusters, cluster_velocity(pp, n)), true};
      }
    }
    if (!cluster && n >= 3 && i % 5 == 0) boundary = {true, 2.0 * u(rng) - 1.0};
    EvolveOptions eo;
    eo.boundary = boundary;
    eo.control.max_step = kOracleStep;
    const double fermion = measure(evolve(r, s, eo), r, s, boundary).energy;
    OracleOptions oo;
    oo.boundary = boundary;
    const double dense = dense_oracle(r, s, oo).final_energy;
    worst = std::max(worst, std::abs(fermion - dense));
    ++configs;
  }
  return {worst <= kOracleTolerance,
          std::to_string(configs) + " configs, max |dE| = " + fmt("%.2e", worst) +
              " (limit " + fmt("%.0e", kOracleTolerance) + ")"};
}

// ---------------------------------------------------------------- 2

Outcome pure_kzm() {
  const int n = 400;
  const DisorderRealization r = sample_couplings(CouplingDistribution::constant(1.0), n, 1);
  EvolveOptions eo;
  eo.control.max_step = 0.05;
  std::vector<double> taus, defects;
  for (double tau = 4.0; tau <= 256.0; tau *= 2.0) {
    // g = 2 - 2 t / T crosses g_c = 1 with g - g_c = -(t - T/2) / tau_Q.
    ScheduleSpec s;
    s.sites = n;
    s.total_time = 2.0 * tau;
    taus.push_back(tau);
    defects.push_back(measure(evolve(r, s, eo), r, s).defect_density);
  }
  const FitResult f = fit_curve(taus, defects, ScalingModel::kPowerLaw);
  return {std::abs(f.exponent - kPureKzmExponent) <= kPureKzmWindow,
          "defect exponent " + fmt("%.4f", f.exponent) + " +- " + fmt("%.4f", f.standard_error) +
              " (target 0.50 +- 0.05)"};
}

// ---------------------------------------------------------------- 3

Outcome threshold_velocity_drop() {
  const int n = 400;
  const DisorderRealization r = sample_couplings(CouplingDistribution::constant(1.0), n, 1);
  EvolveOptions eo;
  eo.control.max_step = 0.1;
  std::map<double, double> d;
  for (double v : {1.5, 2.0, 2.5}) {
    ScheduleSpec s;
    s.sites = n;
    s.total_time = (n + 1.0 / kThresholdSlope + 2.0) / v;
    s.params = TanhTypeII{1.0, {Front{0.0, kThresholdSlope, 1.0, v, FrontShape::kLinear}}};
    d[v] = measure(evolve(r, s, eo), r, s).defect_density;
  }
  const double drop = d[2.5] / d[1.5];
  return {drop >= kThresholdDrop, "d(1.5) = " + fmt("%.3e", d[1.5]) + ", d(2.0) = " +
                                      fmt("%.3e", d[2.0]) + ", d(2.5) = " + fmt("%.3e", d[2.5]) +
                                      ", drop " + fmt("%.1f", drop) + "x (need >= 10x)"};
}

// ---------------------------------------------------------------- 4

Outcome cluster_merging_kinks() {
  const int n = 64;
  const double alpha = 0.1, horizontal = 0.5;
  const DisorderRealization r = sample_couplings(CouplingDistribution::constant(1.0), n, 1);
  auto kinks = [&](int clusters, bool ring) {
    const double vk = alpha * horizontal;
    ScheduleSpec s;
    s.sites = n;
    s.total_time = (2.0 + alpha * (n / clusters) / 2.0) / vk;
    s.params = MultiFrontPiecewise{alpha, ClusterPartition::uniform(n, clusters, vk), true};
    EvolveOptions eo;
    eo.control.max_step = 0.05;
    if (ring) eo.boundary = {true, 1.0};
    return measure(evolve(r, s, eo), r, s, eo.boundary).bond_kinks;
  };
  const auto a = kinks(1, false);
  const auto b = kinks(2, false);
  const auto c = kinks(1, true);
  const double total_a = std::accumulate(a.begin(), a.end(), 0.0);
  const double total_c = std::accumulate(c.begin(), c.end(), 0.0);
  const int merge = n / 2 - 1;  // bond between sites n/2 and n/2 + 1
  double merge_b = 0.0;
  for (int k = merge - kMergeRegion; k <= merge + kMergeRegion; ++k) merge_b += b[k];
  const bool pass = total_a < kGrowingClusterKinks && total_c < kGrowingClusterKinks &&
                    std::abs(merge_b - kMergeKinks) <= kMergeWindow;
  return {pass, "(a) " + fmt("%.4f", total_a) + " (b) merge region " + fmt("%.4f", merge_b) +
                    " [merge bond alone " + fmt("%.4f", b[merge]) + "] (c) " +
                    fmt("%.4f", total_c)};
}

// ---------------------------------------------------------------- batch data

std::optional<SweepTable> load_table(const fs::path& path) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  return SweepTable::read_csv(in);
}

std::vector<double> eps_at(const SweepTable& t, double total_time) {
  std::vector<double> v;
  for (const auto& [key, r] : t.records())
    if (r.total_time == total_time) v.push_back(r.residual_per_site);
  return v;
}

int instances_at(const SweepTable& t, double total_time) {
  return static_cast<int>(eps_at(t, total_time).size());
}

Outcome missing(const fs::path& p) { return {false, "batch output not found: " + p.string()}; }

// ---------------------------------------------------------------- 5

Outcome homogeneous_log_law(const fs::path& dir) {
  const fs::path p = dir / "homogeneous" / "results.csv";
  const auto t = load_table(p);
  if (!t) return missing(p);
  const SweepTable h = t->select("homogeneous", std::nullopt, 256);
  FitOptions o;
  o.model = ScalingModel::kLogLaw;
  o.min_instances = kMinInstances;
  try {
    const FitResult f = fit_scaling(h, o);
    const double t_max = f.times.back();
    const bool pass = f.exponent >= kLogLawMin && f.exponent <= kLogLawMax;
    return {pass, "gamma = " + fmt("%.3f", f.exponent) + " +- " + fmt("%.3f", f.standard_error) +
                      " over T in [" + fmt("%g", f.times.front()) + ", " + fmt("%g", t_max) +
                      "], " + std::to_string(instances_at(h, t_max)) + " instances"};
  } catch (const FitRefused& e) {
    return {false, std::string("fit refused: ") + e.what()};
  }
}

// ---------------------------------------------------------------- 6

Outcome type_two_advantage(const fs::path& dir) {
  const fs::path ph = dir / "homogeneous" / "results.csv";
  const fs::path pm = dir / "multi_front" / "results.csv";
  const auto h = load_table(ph);
  const auto m = load_table(pm);
  if (!h) return missing(ph);
  if (!m) return missing(pm);
  const SweepTable mf = m->select("multi_front", 0.125, 256);
  FitOptions o;
  o.t_min = 1e2;
  o.t_max = 1e4;
  o.min_instances = kMinInstances;
  try {
    const FitResult f = fit_scaling(mf, o);
    const double t_cmp = 1e4;
    const auto eh = eps_at(h->select("homogeneous", std::nullopt, 256), t_cmp);
    const auto em = eps_at(mf, t_cmp);
    if (eh.empty() || em.empty())
      return {false, "p = " + fmt("%.3f", f.exponent) + ", no data at T = 1e4"};
    const double ratio = median(eh) / median(em);
    const bool pass = std::abs(f.exponent - kPowerLaw) <= kPowerLawWindow && ratio >= kAdvantage;
    return {pass, "p = " + fmt("%.3f", f.exponent) + " +- " + fmt("%.3f", f.standard_error) +
                      ", homogeneous/type-II median at T=1e4 = " + fmt("%.1f", ratio)};
  } catch (const FitRefused& e) {
    return {false, std::string("fit refused: ") + e.what()};
  }
}

// ---------------------------------------------------------------- 7

Outcome optimal_slope(const fs::path& dir) {
  const fs::path pm = dir / "multi_front" / "results.csv";
  const fs::path ps = dir / "slopes" / "results.csv";
  const auto m = load_table(pm);
  const auto s = load_table(ps);
  if (!m) return missing(pm);
  if (!s) return missing(ps);
  const double t = 1000.0;
  const auto e8 = eps_at(m->select("multi_front", 0.125, 256), t);
  const auto e32 = eps_at(s->select("multi_front", 1.0 / 32, 256), t);
  const auto e2 = eps_at(s->select("multi_front", 0.5, 256), t);
  if (e8.empty() || e32.empty() || e2.empty()) return {false, "missing slope data at T = 1000"};
  const double m8 = median(e8), m32 = median(e32), m2 = median(e2);
  return {m8 <= m32 && m8 <= m2, "median eps_Q: alpha=1/32 " + fmt("%.3e", m32) + ", 1/8 " +
                                     fmt("%.3e", m8) + ", 1/2 " + fmt("%.3e", m2)};
}

// ---------------------------------------------------------------- 8

Outcome cluster_count_scaling() {
  const auto dist = CouplingDistribution::uniform(-1.0, 1.0);
  auto mean_count = [&](int n, double t) {
    double sum = 0.0;
    const int instances = 100;
    for (int i = 0; i < instances; ++i) {
      const DisorderRealization r = sample_couplings(dist, n, derive_seed(808, i));
      sum += partition_clusters(r, {t, 0.125, 2.0, 2.0, 0.0}).cluster_count();
    }
    return sum / instances;
  };
  std::vector<double> times, counts;
  for (double t : {1e2, 3e2, 1e3, 3e3, 1e4}) {
    times.push_back(t);
    counts.push_back(mean_count(4096, t));
  }
  const FitResult f = fit_curve(times, counts, ScalingModel::kPowerLaw);
  const double size_ratio = mean_count(8192, 1e3) / mean_count(4096, 1e3);
  const bool pass = std::abs(f.exponent - kClusterExponent) <= kClusterWindow &&
                    std::abs(size_ratio - 2.0) <= 0.2;
  return {pass, "count ~ T^-" + fmt("%.3f", f.exponent) + " +- " + fmt("%.3f", f.standard_error) +
                    ", count(2N)/count(N) = " + fmt("%.3f", size_ratio)};
}

// ---------------------------------------------------------------- 9, 10

std::optional<std::vector<GapSample>> load_gaps(const fs::path& path) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  return read_gap_csv(in);
}

std::vector<GapSample> with_alphas(const std::vector<GapSample>& all, std::set<double> alphas) {
  std::vector<GapSample> out;
  for (const GapSample& s : all)
    if (alphas.count(s.alpha)) out.push_back(s);
  return out;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
    std::vector<double> r(v.size());
    for (std::size_t k = 0; k < idx.size(); ++k) r[idx[k]] = static_cast<double>(k);
    return r;
  };
  const auto ra = ranks(a), rb = ranks(b);
  const double n = static_cast<double>(a.size());
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d2 += (ra[i] - rb[i]) * (ra[i] - rb[i]);
  return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
}

Outcome gap_collapse(const fs::path& dir) {
  // Renormalized against exact gaps on N = 64.
  GapStatisticsOptions o;
  o.sites = 64;
  o.instances = 200;
  o.positions = 4;
  o.base_seed = 6464;
  o.residual_size = 8;
  const auto approx = gap_statistics(o);
  o.method = GapMethod::kExact;
  const auto exact = gap_statistics(o);
  std::map<std::tuple<std::uint64_t, double, double>, double> exact_by_key;
  for (const GapSample& e : exact) exact_by_key[{e.seed, e.alpha, e.front_pos}] = e.delta;
  std::vector<double> a, b;
  for (const GapSample& s : approx) {
    const auto it = exact_by_key.find({s.seed, s.alpha, s.front_pos});
    if (it == exact_by_key.end()) continue;
    a.push_back(std::log(s.delta));
    b.push_back(std::log(it->second));
  }
  const double rho = a.size() > 2 ? spearman(a, b) : 0.0;

  const fs::path p = dir / "gaps" / "gaps.csv";
  const auto samples = load_gaps(p);
  if (!samples) return {false, "rho = " + fmt("%.3f", rho) + "; batch output not found: " + p.string()};
  std::map<double, std::set<std::uint64_t>> seeds;
  for (const GapSample& s : *samples) seeds[s.alpha].insert(s.seed);
  std::size_t fewest = samples->empty() ? 0 : std::numeric_limits<std::size_t>::max();
  for (double alpha : {0.125, 0.0625, 0.03125}) fewest = std::min(fewest, seeds[alpha].size());
  try {
    const RescaleResult rr = rescale_gaps(with_alphas(*samples, {0.125, 0.0625, 0.03125}));
    const bool pass = rr.collapse_ks < kCollapseKs && rr.unrescaled_ks > kUnrescaledKs &&
                      static_cast<int>(fewest) >= kGapInstances && rho >= kRankCorrelation;
    return {pass, "rescaled KS " + fmt("%.4f", rr.collapse_ks) + ", unrescaled KS " +
                      fmt("%.4f", rr.unrescaled_ks) + ", instances per alpha >= " +
                      std::to_string(fewest) + ", SDRG/exact rho " + fmt("%.3f", rho) + " (" +
                      std::to_string(a.size()) + " pairs)"};
  } catch (const FitRefused& e) {
    return {false, std::string("rescaling refused: ") + e.what()};
  }
}

Outcome joint_density(const fs::path& dir) {
  const fs::path p = dir / "gaps" / "gaps.csv";
  const auto samples = load_gaps(p);
  if (!samples) return missing(p);
  try {
    const RescaleResult rr = rescale_gaps(with_alphas(*samples, {0.125, 0.03125}));
    const bool pass = rr.collapse_ks < kJointKs && rr.joint_ks_y < kJointKs;
    return {pass, "alpha 1/8 vs 1/32: KS(x) " + fmt("%.4f", rr.collapse_ks) + ", KS(y | peak) " +
                      fmt("%.4f", rr.joint_ks_y)};
  } catch (const FitRefused& e) {
    return {false, std::string("rescaling refused: ") + e.what()};
  }
}

// ---------------------------------------------------------------- 11

Outcome cluster_ising_crossover(const fs::path& dir) {
  const fs::path ph = dir / "cluster_homogeneous" / "results.csv";
  const fs::path pm = dir / "cluster_multi_front" / "results.csv";
  const auto h = load_table(ph);
  const auto m = load_table(pm);
  if (!h) return missing(ph);
  if (!m) return missing(pm);
  const auto th = h->times(), tm = m->times();
  std::vector<double> common;
  std::set_intersection(th.begin(), th.end(), tm.begin(), tm.end(), std::back_inserter(common));
  if (common.empty()) return {false, "no common T"};
  const double t = common.back();
  const double mh = median(eps_at(*h, t));
  std::set<double> alphas;
  for (const auto& [key, r] : m->records()) alphas.insert(r.alpha);
  double best = std::numeric_limits<double>::infinity(), best_alpha = 0.0;
  std::string per_alpha;
  for (double a : alphas) {
    const auto e = eps_at(m->select("multi_front", a, 256), t);
    if (e.empty()) continue;
    const double v = median(e);
    per_alpha += ", alpha " + fmt("%g", a) + " " + fmt("%.3e", v);
    if (v < best) {
      best = v;
      best_alpha = a;
    }
  }
  return {best < mh, "T = " + fmt("%g", t) + ": homogeneous " + fmt("%.3e", mh) + per_alpha +
                         " (best alpha " + fmt("%g", best_alpha) + ")"};
}

// ---------------------------------------------------------------- 12

Outcome property_suite() {
  std::vector<std::string> failures;
  const auto dist = CouplingDistribution::uniform(-1.0, 1.0);

  // Unitarity on every accepted step, both integrators.
  double drift = 0.0;
  for (Integrator method : {Integrator::kSplitting, Integrator::kRungeKutta}) {
    const DisorderRealization r = sample_couplings(dist, CouplingDistribution::uniform(-0.3, 0.3), 48, 12);
    ScheduleSpec s;
    s.sites = 48;
    s.total_time = 40.0;
    s.params = PeriodicTypeI{0.4, 0.9};
    EvolveOptions eo;
    eo.control.method = method;
    eo.control.check_every_step = true;
    eo.control.max_step = method == Integrator::kSplitting ? 0.1 : 0.5;
    drift = std::max(drift, evolve(r, s, eo).stats.max_drift);
  }
  if (!(drift < kUnitarity)) failures.push_back("unitarity " + fmt("%.2e", drift));

  // BdG +-eps symmetry and scale covariance.
  double bdg = 0.0, cov = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const DisorderRealization r = sample_couplings(dist, CouplingDistribution::uniform(-0.5, 0.5), 24, seed);
    std::vector<double> g(24);
    std::mt19937_64 rng(seed);
    for (double& x : g) x = std::uniform_real_distribution<double>(0.0, 2.0)(rng);
    const QuadraticForm f = build_quadratic(r, g);
    const SpectrumResult sp = diagonalize(f);
    Eigen::MatrixXd h(48, 48);
    h << f.hopping, f.pairing, -f.pairing, -f.hopping;
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(h).eigenvalues();
    for (int m = 0; m < 24; ++m) {
      bdg = std::max(bdg, std::abs(ev(24 + m) - sp.energies(m)));
      bdg = std::max(bdg, std::abs(ev(23 - m) + sp.energies(m)));
    }
    const double c = 3.5;
    DisorderRealization scaled = r;
    for (double& j : scaled.couplings) j *= c;
    for (double& k : scaled.three_local) k *= c;
    std::vector<double> gc = g;
    for (double& x : gc) x *= c;
    const SpectrumResult sc = diagonalize(build_quadratic(scaled, gc));
    cov = std::max(cov, (sc.energies - c * sp.energies).cwiseAbs().maxCoeff());
  }
  if (!(bdg < 1e-10)) failures.push_back("BdG symmetry " + fmt("%.2e", bdg));
  if (!(cov < 1e-10)) failures.push_back("scale covariance " + fmt("%.2e", cov));

  // Schedule finite differences: v_v = -dg/dt and alpha = dg/dn.
  double fd = 0.0;
  {
    ScheduleSpec s;
    s.sites = 40;
    s.total_time = 30.0;
    s.params = TanhTypeII{0.4, {Front{3.0, 0.7, 1.2, 0.8, FrontShape::kTanh}}};
    const double h = 1e-5;
    for (int n = 1; n <= 40; n += 3)
      for (double t : {1.0, 7.0, 15.0}) {
        const Hyperparameters hp = hyperparameters(s, n, t);
        const double dgdt = (field_at(s, n, t + h) - field_at(s, n, t - h)) / (2 * h);
        fd = std::max(fd, std::abs(hp.v_v + dgdt));
      }
  }
  if (!(fd < 1e-6)) failures.push_back("schedule derivative " + fmt("%.2e", fd));

  // SDRG cutoff never increases.
  bool monotone = true;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const DisorderRealization r = sample_couplings(dist, 200, seed);
    std::vector<double> g(200, 0.37);
    SdrgSystem sys = SdrgSystem::chain(g, r.couplings);
    double last = sys.cutoff();
    while (auto e = decimate_next(sys)) {
      monotone = monotone && e->scale <= last;
      last = e->scale;
    }
  }
  if (!monotone) failures.push_back("SDRG cutoff increased");

  std::string detail = "drift " + fmt("%.1e", drift) + ", BdG " + fmt("%.1e", bdg) +
                       ", covariance " + fmt("%.1e", cov) + ", d/dt " + fmt("%.1e", fd) +
                       ", SDRG monotone " + (monotone ? "yes" : "no");
  for (const auto& f : failures) detail += "; FAILED " + f;
  return {failures.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string batch_dir = CFRONTS_BATCH_DIR;
  std::vector<int> only;
  app.add_option("--batch-dir", batch_dir, "Output directory of tools/run_batch.sh");
  app.add_option("--only", only, "Criteria to run")->delimiter(',');
  CLI11_PARSE(app, argc, argv);
  const fs::path dir = batch_dir;

  const std::vector<Criterion> criteria{
      {1, "oracle equivalence", 300, oracle_equivalence},
      {2, "pure-chain KZM", 600, pure_kzm},
      {3, "pure-chain threshold velocity", 600, threshold_velocity_drop},
      {4, "expected kinks of growing, merging and self-merging clusters", 300, cluster_merging_kinks},
      {5, "disordered homogeneous log law", 0, [&] { return homogeneous_log_law(dir); }},
      {6, "type-II power law and advantage", 0, [&] { return type_two_advantage(dir); }},
      {7, "optimal slope", 0, [&] { return optimal_slope(dir); }},
      {8, "cluster-count scaling", 300, cluster_count_scaling},
      {9, "gap collapse", 0, [&] { return gap_collapse(dir); }},
      {10, "Omega/Delta joint density", 0, [&] { return joint_density(dir); }},
      {11, "cluster-Ising crossover", 0, [&] { return cluster_ising_crossover(dir); }},
      {12, "property suite", 120, property_suite},
  };

  int failed = 0;
  for (const Criterion& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.time_limit > 0.0 && secs > c.time_limit) {
      o.pass = false;
      o.detail += "; runtime over " + fmt("%.0f", c.time_limit) + " s";
    }
    std::printf("%s criterion %d (%s): %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", c.id,
                c.name.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
