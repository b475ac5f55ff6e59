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

#include "critical_fronts/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <set>
#include <sstream>

#include <Eigen/Dense>

#include "critical_fronts/errors.hpp"

namespace cfronts {

// ---------------------------------------------------------------- tables

void SweepTable::insert(SweepRecord r) {
  if (r.residual_per_site < -1e-12)
    throw DomainError("SweepTable: negative residual energy");
  r.residual_per_site = std::max(r.residual_per_site, 0.0);
  Key key{r.family, r.sites, r.total_time, r.alpha, r.seed};
  if (!records_.emplace(key, std::move(r)).second)
    throw DomainError("SweepTable: duplicate record key");
}

SweepTable SweepTable::select(const std::string& family, std::optional<double> alpha,
                              std::optional<int> sites) const {
  SweepTable out;
  for (const auto& [key, r] : records_) {
    if (r.family != family) continue;
    if (alpha && r.alpha != *alpha) continue;
    if (sites && r.sites != *sites) continue;
    out.records_.emplace(key, r);
  }
  return out;
}

std::vector<double> SweepTable::times() const {
  std::set<double> t;
  for (const auto& [key, r] : records_) t.insert(r.total_time);
  return {t.begin(), t.end()};
}

void SweepTable::write_csv(std::ostream& out) const {
  out << "family,N,T,alpha,seed,eps_Q,defect_density,n_clusters\n";
  for (const auto& [key, r] : records_) {
    std::ostringstream line;
    line << std::setprecision(17) << r.family << ',' << r.sites << ',' << r.total_time << ','
         << r.alpha << ',' << r.seed << ',' << r.residual_per_site << ',' << r.defect_density
         << ',' << r.clusters << '\n';
    out << line.str();
  }
}

SweepTable SweepTable::read_csv(std::istream& in) {
  SweepTable t;
  std::string line;
  if (!std::getline(in, line)) return t;
  std::vector<std::string> header;
  {
    std::istringstream h(line);
    std::string cell;
    while (std::getline(h, cell, ',')) header.push_back(cell);
  }
  auto column = [&header](const std::string& name) -> int {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
  };
  const int c_family = column("family"), c_n = column("N"), c_t = column("T"),
            c_alpha = column("alpha"), c_seed = column("seed"), c_eps = column("eps_Q"),
            c_d = column("defect_density"), c_k = column("n_clusters");
  if (c_n < 0 || c_t < 0 || c_alpha < 0 || c_seed < 0 || c_eps < 0 || c_d < 0)
    throw DomainError("sweep csv: missing required columns");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (cells.size() < header.size()) throw DomainError("sweep csv: short row: " + line);
    SweepRecord r;
    r.family = c_family >= 0 ? cells[static_cast<std::size_t>(c_family)] : "homogeneous";
    r.sites = std::stoi(cells[static_cast<std::size_t>(c_n)]);
    r.total_time = std::stod(cells[static_cast<std::size_t>(c_t)]);
    r.alpha = std::stod(cells[static_cast<std::size_t>(c_alpha)]);
    r.seed = std::stoull(cells[static_cast<std::size_t>(c_seed)]);
    r.residual_per_site = std::stod(cells[static_cast<std::size_t>(c_eps)]);
    r.defect_density = std::stod(cells[static_cast<std::size_t>(c_d)]);
    r.clusters = c_k >= 0 ? std::stoi(cells[static_cast<std::size_t>(c_k)]) : 1;
    t.insert(std::move(r));
  }
  return t;
}

double quantile(std::span<const double> values, double q) {
  if (values.empty()) throw DomainError("quantile: empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("quantile: q outside [0, 1]");
  std::vector<double> v(values.begin(), values.end());
  const std::size_t rank =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size()))));
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(rank - 1), v.end());
  return v[rank - 1];
}

// ---------------------------------------------------------------- fits

LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2) throw FitRefused("least_squares: need at least two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw FitRefused("least_squares: degenerate abscissae");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (n > 2) {
    double ssr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y[i] - f.intercept - f.slope * x[i];
      ssr += r * r;
    }
    const double s2 = ssr / static_cast<double>(n - 2);
    f.slope_error = std::sqrt(s2 / sxx);
    f.intercept_error = std::sqrt(s2 * (1.0 / static_cast<double>(n) + mx * mx / sxx));
  }
  return f;
}

FitResult fit_curve(std::span<const double> times, std::span<const double> values,
                    ScalingModel model) {
  if (times.size() != values.size()) throw FitRefused("fit_curve: size mismatch");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(values[i] > 0.0)) throw FitRefused("fit_curve: non-positive value");
    if (model == ScalingModel::kLogLaw) {
      if (!(times[i] > 1.0)) throw FitRefused("fit_curve: log law needs T > 1");
      x.push_back(std::log(std::log(times[i])));
    } else {
      if (!(times[i] > 0.0)) throw FitRefused("fit_curve: power law needs T > 0");
      x.push_back(std::log(times[i]));
    }
    y.push_back(std::log(values[i]));
  }
  const LinearFit lf = least_squares(x, y);
  FitResult r;
  r.exponent = -lf.slope;
  r.standard_error = lf.slope_error;
  r.intercept = lf.intercept;
  r.times.assign(times.begin(), times.end());
  r.quantiles.assign(values.begin(), values.end());
  return r;
}

FitResult fit_scaling(const SweepTable& table, const FitOptions& o) {
  std::map<double, std::vector<double>> by_time;
  for (const auto& [key, r] : table.records())
    if (r.total_time >= o.t_min && r.total_time <= o.t_max)
      by_time[r.total_time].push_back(r.residual_per_site);
  std::vector<double> times, values;
  for (const auto& [t, eps] : by_time) {
    if (static_cast<int>(eps.size()) < o.min_instances) continue;
    times.push_back(t);
    values.push_back(quantile(eps, o.quantile));
  }
  if (static_cast<int>(times.size()) < o.min_times)
    throw FitRefused("fit_scaling: need at least " + std::to_string(o.min_times) +
                     " values of T with " + std::to_string(o.min_instances) +
                     " instances each");
  return fit_curve(times, values, o.model);
}

// ---------------------------------------------------------------- KZM

KzmPredictor KzmPredictor::pure_ising() {
  KzmPredictor p;
  p.velocity_prefactor = 2.0;
  return p;
}

KzmPredictor KzmPredictor::random_ising(double kappa) {
  KzmPredictor p;
  p.nu = 2.0;
  p.z = 1.0;
  p.kappa = kappa;
  p.disordered = true;
  return p;
}

KzmScales kzm_scales(const KzmPredictor& p, double tau_q) {
  if (!(tau_q > 0.0)) throw DomainError("kzm_scales: tau_Q must be positive");
  if (!(p.nu > 0.0)) throw DomainError("kzm_scales: nu must be positive");
  KzmScales s{};
  if (!p.disordered) {
    const double zn = p.z * p.nu;
    s.time = std::pow(p.tau0 * std::pow(tau_q, zn), 1.0 / (1.0 + zn));
    s.length = p.xi0 * std::pow(tau_q / p.tau0, p.nu / (1.0 + zn));
  } else {
    const double l = std::log(tau_q / p.kappa);
    if (!(l > 1.0)) throw DomainError("kzm_scales: need ln(tau_Q / kappa) > 1");
    const double ll = std::log(l);
    s.length = p.xi0 * l * l / (ll * ll);
    s.time = tau_q * std::pow(s.length / p.xi0, -1.0 / p.nu);
  }
  s.velocity = s.length / s.time;
  return s;
}

double threshold_velocity(const KzmPredictor& p, double alpha) {
  if (!(alpha > 0.0)) throw DomainError("threshold_velocity: alpha must be positive");
  return p.velocity_prefactor * std::pow(alpha, p.nu * (p.z - 1.0) / (1.0 + p.nu));
}

double penetration_depth(const KzmPredictor& p, double alpha) {
  if (!(alpha > 0.0)) throw DomainError("penetration_depth: alpha must be positive");
  return p.depth_prefactor * std::pow(alpha, -p.nu / (p.nu + 1.0));
}

double instantaneous_gap(const KzmPredictor& p, double alpha) {
  if (!(alpha > 0.0)) throw DomainError("instantaneous_gap: alpha must be positive");
  if (p.disordered) return std::exp(-p.gap_prefactor * std::pow(alpha, -1.0 / 3.0));
  return p.gap_prefactor * std::pow(alpha, p.z * p.nu / (p.nu + 1.0));
}

// ---------------------------------------------------------------- gaps

double ks_distance(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw FitRefused("ks_distance: empty sample");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size()), ny = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  return d;
}

double peak_region_ks(const std::vector<std::vector<double>>& groups, double percentile) {
  std::vector<double> pooled;
  for (const auto& g : groups) pooled.insert(pooled.end(), g.begin(), g.end());
  const double boundary = quantile(pooled, percentile);
  std::vector<std::vector<double>> peaks;
  for (const auto& g : groups) {
    std::vector<double> p;
    std::copy_if(g.begin(), g.end(), std::back_inserter(p), [boundary](double v) { return v > boundary; });
    peaks.push_back(std::move(p));
  }
  double d = 0.0;
  for (std::size_t i = 0; i < peaks.size(); ++i)
    for (std::size_t j = i + 1; j < peaks.size(); ++j) d = std::max(d, ks_distance(peaks[i], peaks[j]));
  return d;
}

namespace {

Histogram histogram(std::span<const double> v, double lo, double hi, int bins) {
  Histogram h{lo, hi, std::vector<double>(static_cast<std::size_t>(bins), 0.0)};
  const double width = (hi - lo) / bins;
  for (double x : v) {
    int b = static_cast<int>(std::floor((x - lo) / width));
    b = std::clamp(b, 0, bins - 1);
    h.density[static_cast<std::size_t>(b)] += 1.0;
  }
  for (double& d : h.density) d /= static_cast<double>(v.size()) * width;
  return h;
}

}  // namespace

RescaleResult rescale_gaps(std::span<const GapSample> samples, const RescaleOptions& o) {
  std::map<double, GapGroup> groups;
  for (const GapSample& s : samples) {
    if (!(s.delta > 0.0)) continue;
    GapGroup& g = groups[s.alpha];
    g.alpha = s.alpha;
    const double lg = std::log(s.delta);
    g.log_gap.push_back(lg);
    g.x.push_back(o.homogeneous ? lg / std::sqrt(static_cast<double>(o.sites))
                                : std::cbrt(s.alpha) * lg);
    g.y.push_back(std::log(std::pow(s.alpha, -2.0 / 3.0) * s.omega / s.delta));
  }
  if (groups.size() < 2) throw FitRefused("rescale_gaps: need at least two alpha groups");
  for (const auto& [alpha, g] : groups)
    if (g.x.size() < o.min_samples) throw FitRefused("rescale_gaps: too few samples in a group");

  RescaleResult out;
  std::vector<std::vector<double>> xs, lgs;
  std::vector<double> pooled;
  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
  double y_lo = x_lo, y_hi = -x_lo;
  for (auto& [alpha, g] : groups) {
    xs.push_back(g.x);
    lgs.push_back(g.log_gap);
    pooled.insert(pooled.end(), g.x.begin(), g.x.end());
    for (double v : g.x) x_lo = std::min(x_lo, v), x_hi = std::max(x_hi, v);
    for (double v : g.y) y_lo = std::min(y_lo, v), y_hi = std::max(y_hi, v);
  }
  if (!(x_hi > x_lo)) x_hi = x_lo + 1.0;
  if (!(y_hi > y_lo)) y_hi = y_lo + 1.0;
  out.peak_boundary_x = quantile(pooled, o.peak_percentile);
  out.collapse_ks = peak_region_ks(xs, o.peak_percentile);
  out.unrescaled_ks = peak_region_ks(lgs, o.peak_percentile);

  std::vector<std::vector<double>> ys;
  for (auto& [alpha, g] : groups) {
    g.x_histogram = histogram(g.x, x_lo, x_hi, o.bins);
    g.joint = Histogram2d{x_lo, x_hi, y_lo, y_hi, o.bins,
                          std::vector<double>(static_cast<std::size_t>(o.bins * o.bins), 0.0)};
    const double wx = (x_hi - x_lo) / o.bins, wy = (y_hi - y_lo) / o.bins;
    std::vector<double> y_peak;
    for (std::size_t k = 0; k < g.x.size(); ++k) {
      const int ix = std::clamp(static_cast<int>(std::floor((g.x[k] - x_lo) / wx)), 0, o.bins - 1);
      const int iy = std::clamp(static_cast<int>(std::floor((g.y[k] - y_lo) / wy)), 0, o.bins - 1);
      g.joint.density[static_cast<std::size_t>(ix * o.bins + iy)] += 1.0;
      if (g.x[k] > out.peak_boundary_x) y_peak.push_back(g.y[k]);
    }
    for (double& d : g.joint.density) d /= static_cast<double>(g.x.size()) * wx * wy;
    ys.push_back(std::move(y_peak));
    out.groups.push_back(g);
  }
  for (std::size_t i = 0; i < ys.size(); ++i)
    for (std::size_t j = i + 1; j < ys.size(); ++j)
      out.joint_ks_y = std::max(out.joint_ks_y, ks_distance(ys[i], ys[j]));
  return out;
}

GaussianTail fit_gaussian_tail(std::span<const double> x, int bins) {
  if (x.size() < 50) throw FitRefused("fit_gaussian_tail: too few samples");
  const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
  const Histogram h = histogram(x, *lo_it, *hi_it + 1e-12 * std::abs(*hi_it) + 1e-300, bins);
  const auto mode = static_cast<int>(std::max_element(h.density.begin(), h.density.end()) -
                                     h.density.begin());
  const double width = (h.hi - h.lo) / bins;
  std::vector<double> xs, ys;
  for (int b = 0; b <= mode; ++b) {
    const double d = h.density[static_cast<std::size_t>(b)];
    if (d <= 0.0) continue;
    xs.push_back(h.lo + (b + 0.5) * width);
    ys.push_back(std::log(d));
  }
  if (xs.size() < 3) throw FitRefused("fit_gaussian_tail: tail has fewer than three bins");
  Eigen::MatrixXd a(static_cast<Eigen::Index>(xs.size()), 3);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(xs.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    a(r, 0) = 1.0;
    a(r, 1) = xs[i];
    a(r, 2) = xs[i] * xs[i];
    rhs(r) = ys[i];
  }
  const Eigen::Vector3d beta = a.colPivHouseholderQr().solve(rhs);
  if (!(beta(2) < 0.0)) throw FitRefused("fit_gaussian_tail: tail is not concave");
  GaussianTail t;
  t.a = -beta(2);
  t.x0 = beta(1) / (2.0 * t.a);
  return t;
}

double minimal_gap_quantile(double a, int sites, double q, double alpha, double x0) {
  if (!(a > 0.0) || !(q > 0.0 && q < 1.0) || sites < 2 || !(alpha > 0.0))
    throw DomainError("minimal_gap_quantile: need a > 0, 0 < q < 1, N >= 2, alpha > 0");
  const double ratio = static_cast<double>(sites) / (2.0 * a * std::log(1.0 / q));
  if (!(ratio > 1.0)) throw DomainError("minimal_gap_quantile: log argument must exceed 1");
  const double xq = x0 - std::sqrt(std::log(ratio) / (2.0 * a));
  return std::exp(xq * std::pow(alpha, -1.0 / 3.0));
}

double weak_link_probability(double eps, int bonds) {
  if (!(eps >= 0.0 && eps <= 1.0) || bonds < 1)
    throw DomainError("weak_link_probability: need 0 <= eps <= 1 and bonds >= 1");
  return 1.0 - std::pow(1.0 - eps, bonds);
}

nlohmann::json to_json(const FitResult& fit) {
  return {{"exponent", fit.exponent},
          {"standard_error", fit.standard_error},
          {"intercept", fit.intercept},
          {"T", fit.times},
          {"quantile_values", fit.quantiles}};
}

nlohmann::json to_json(const RescaleResult& r) {
  nlohmann::json groups = nlohmann::json::array();
  for (const GapGroup& g : r.groups)
    groups.push_back({{"alpha", g.alpha},
                      {"samples", g.x.size()},
                      {"x_histogram",
                       {{"lo", g.x_histogram.lo}, {"hi", g.x_histogram.hi},
                        {"density", g.x_histogram.density}}},
                      {"joint",
                       {{"x_lo", g.joint.x_lo}, {"x_hi", g.joint.x_hi},
                        {"y_lo", g.joint.y_lo}, {"y_hi", g.joint.y_hi},
                        {"bins", g.joint.bins}, {"density", g.joint.density}}}});
  return {{"groups", groups},
          {"peak_boundary_x", r.peak_boundary_x},
          {"collapse_ks", r.collapse_ks},
          {"unrescaled_ks", r.unrescaled_ks},
          {"joint_ks_y", r.joint_ks_y}};
}

}  // namespace cfronts
