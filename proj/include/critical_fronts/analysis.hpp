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

#pragma once

#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "critical_fronts/quadratic.hpp"

namespace cfronts {

// ---------------------------------------------------------------- tables

struct SweepRecord {
  std::string family;  // schedule variant, e.g. "homogeneous"
  int sites = 0;
  double total_time = 0.0;
  double alpha = 0.0;
  std::uint64_t seed = 0;
  double residual_per_site = 0.0;  // eps_Q
  double defect_density = 0.0;
  int clusters = 1;
};

class SweepTable {
 public:
  using Key = std::tuple<std::string, int, double, double, std::uint64_t>;

  // Throws DomainError on a duplicate key or eps_Q < -1e-12; tiny negative
  // round-off is stored as 0.
  void insert(SweepRecord record);
  const std::map<Key, SweepRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }

  SweepTable select(const std::string& family, std::optional<double> alpha = std::nullopt,
                    std::optional<int> sites = std::nullopt) const;
  std::vector<double> times() const;  // distinct T, ascending

  void write_csv(std::ostream& out) const;
  static SweepTable read_csv(std::istream& in);

 private:
  std::map<Key, SweepRecord> records_;
};

// Nearest-rank q-quantile: the ceil(q n)-th smallest value (q = 0 gives the
// minimum). Throws DomainError on empty input or q outside [0, 1].
double quantile(std::span<const double> values, double q);

// ---------------------------------------------------------------- fits

enum class ScalingModel {
  kLogLaw,    // eps = A (ln T)^(-gamma)
  kPowerLaw,  // eps = A T^(-p)
};

struct FitOptions {
  ScalingModel model = ScalingModel::kPowerLaw;
  double quantile = 0.5;
  double t_min = 0.0;  // inclusive fit window
  double t_max = std::numeric_limits<double>::infinity();
  int min_times = 4;
  int min_instances = 30;
};

struct FitResult {
  double exponent = 0.0;  // gamma or p, positive for decaying data
  double standard_error = 0.0;
  double intercept = 0.0;  // ln A
  std::vector<double> times;
  std::vector<double> quantiles;
};

// Least squares of ln(eps_q) against ln ln T or ln T. Throws FitRefused when
// fewer than min_times values of T carry min_instances records each, or a
// quantile is not positive.
FitResult fit_scaling(const SweepTable& table, const FitOptions& options);

// Same fit on explicit (T, value) points.
FitResult fit_curve(std::span<const double> times, std::span<const double> values,
                    ScalingModel model);

struct LinearFit {
  double slope = 0.0, intercept = 0.0;
  double slope_error = 0.0, intercept_error = 0.0;
};
LinearFit least_squares(std::span<const double> x, std::span<const double> y);

// ---------------------------------------------------------------- KZM

struct KzmPredictor {
  double nu = 1.0;
  double z = 1.0;
  double xi0 = 1.0;
  double tau0 = 1.0;
  double kappa = 1.0;
  bool disordered = false;
  // Prefactors of the scaling forms below.
  double velocity_prefactor = 1.0;
  double depth_prefactor = 1.0;
  double gap_prefactor = 1.0;

  static KzmPredictor pure_ising();         // nu = z = 1, v_t = 2
  static KzmPredictor random_ising(double kappa = 1.0);  // nu = 2, log-gap branch
};

struct KzmScales {
  double time;      // t_hat
  double length;    // xi_hat
  double velocity;  // v_hat = xi_hat / t_hat
};

// Pure:       t = (tau0 tau_Q^(z nu))^(1/(1+z nu)),  xi = xi0 (tau_Q/tau0)^(nu/(1+z nu))
// Disordered: xi = xi0 ln^2(tau_Q/kappa) / ln^2 ln(tau_Q/kappa),
//             eps_hat = (xi/xi0)^(-1/nu),  t = tau_Q eps_hat
// Throws DomainError for tau_Q <= 0, or tau_Q <= e kappa when disordered.
KzmScales kzm_scales(const KzmPredictor& predictor, double quench_time);

// v_t ~ alpha^(nu (z-1)/(1+nu)); constant for z = 1.
double threshold_velocity(const KzmPredictor& predictor, double alpha);
// xi_i ~ alpha^(-nu/(nu+1)).
double penetration_depth(const KzmPredictor& predictor, double alpha);
// Pure: Delta_i ~ alpha^(z nu/(nu+1)). Disordered: exp(-c alpha^(-1/3)).
double instantaneous_gap(const KzmPredictor& predictor, double alpha);

// ---------------------------------------------------------------- gaps

double ks_distance(std::span<const double> a, std::span<const double> b);

struct RescaleOptions {
  double peak_percentile = 0.1;  // peak region: above this pooled percentile
  std::size_t min_samples = 500;
  int bins = 40;
  bool homogeneous = false;  // x = N^(-1/2) ln Delta instead of alpha^(1/3) ln Delta
  int sites = 0;             // N for the homogeneous rescaling
};

struct Histogram {
  double lo = 0.0, hi = 0.0;
  std::vector<double> density;  // normalized to unit area
};

struct Histogram2d {
  double x_lo = 0.0, x_hi = 0.0, y_lo = 0.0, y_hi = 0.0;
  int bins = 0;
  std::vector<double> density;  // row-major [ix * bins + iy]
};

struct GapGroup {
  double alpha = 0.0;
  std::vector<double> log_gap;  // ln Delta
  std::vector<double> x;        // rescaled log-gap
  std::vector<double> y;        // ln(alpha^(-2/3) Omega / Delta)
  Histogram x_histogram;
  Histogram2d joint;
};

struct RescaleResult {
  std::vector<GapGroup> groups;  // ascending alpha
  double peak_boundary_x = 0.0;
  double collapse_ks = 0.0;      // max pairwise peak-region KS of x
  double unrescaled_ks = 0.0;    // same on ln Delta
  double joint_ks_y = 0.0;       // max pairwise KS of y over the x peak region
};

// Throws FitRefused with fewer than two alpha groups or too few samples.
RescaleResult rescale_gaps(std::span<const GapSample> samples, const RescaleOptions& options = {});

// Max pairwise KS distance of the groups restricted to values above the
// pooled `percentile`.
double peak_region_ks(const std::vector<std::vector<double>>& groups, double percentile);

struct GaussianTail {
  double a = 0.0;
  double x0 = 0.0;
};

// Fits ln P(x) = c - a (x - x0)^2 to the histogram bins left of the mode.
GaussianTail fit_gaussian_tail(std::span<const double> x, int bins = 40);

// x_q = x0 - sqrt(ln(N / (2a ln(1/q))) / (2a)),  Delta = exp(x_q alpha^(-1/3)).
// Throws DomainError when the log argument is <= 1 or inputs are out of range.
double minimal_gap_quantile(double a, int sites, double q, double alpha, double x0 = 0.0);

// Probability that the weakest of `bonds` couplings with |J| uniform on
// [0, 1] falls below eps.
double weak_link_probability(double eps, int bonds);

nlohmann::json to_json(const FitResult& fit);
nlohmann::json to_json(const RescaleResult& result);

}  // namespace cfronts
