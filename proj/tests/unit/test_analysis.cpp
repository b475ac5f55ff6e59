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

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include <doctest.h>

#include "critical_fronts/analysis.hpp"
#include "critical_fronts/errors.hpp"
#include "critical_fronts/instance.hpp"

using namespace cfronts;

namespace {

SweepTable synthetic(const std::vector<double>& times, int instances, double (*law)(double),
                     double noise = 0.0, std::uint64_t seed = 1) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, noise);
  SweepTable t;
  for (double total_time : times)
    for (int i = 0; i < instances; ++i) {
      SweepRecord r;
      r.family = "homogeneous";
      r.sites = 64;
      r.total_time = total_time;
      r.seed = static_cast<std::uint64_t>(i);
      r.residual_per_site = law(total_time) * std::exp(noise > 0.0 ? gauss(rng) : 0.0);
      r.defect_density = 0.5 * r.residual_per_site;
      t.insert(r);
    }
  return t;
}

double log_law(double t) { return std::pow(std::log(t), -4.0); }
double power_law(double t) { return 3.0 * std::pow(t, -1.03); }

}  // namespace

TEST_SUITE("analysis") {
  TEST_CASE("sweep table keys and validation") {
    SweepTable t;
    SweepRecord r{"homogeneous", 16, 100.0, 0.125, 7, 0.01, 0.02, 1};
    t.insert(r);
    CHECK_THROWS_AS(t.insert(r), DomainError);
    r.seed = 8;
    r.residual_per_site = -1e-3;
    CHECK_THROWS_AS(t.insert(r), DomainError);
    r.residual_per_site = -1e-14;
    t.insert(r);
    CHECK(t.records().rbegin()->second.residual_per_site == 0.0);
    CHECK(t.size() == 2);
  }

  TEST_CASE("sweep table csv round trip and selection") {
    SweepTable t = synthetic({10.0, 100.0}, 3, power_law);
    SweepRecord extra{"multi_front", 64, 10.0, 0.125, 99, 1.0 / 3.0, 0.25, 4};
    t.insert(extra);
    std::stringstream io;
    t.write_csv(io);
    const SweepTable back = SweepTable::read_csv(io);
    REQUIRE(back.size() == t.size());
    auto it = back.records().begin();
    for (const auto& [key, rec] : t.records()) {
      CHECK(it->first == key);
      CHECK(it->second.residual_per_site == rec.residual_per_site);
      CHECK(it->second.clusters == rec.clusters);
      ++it;
    }
    CHECK(t.select("multi_front").size() == 1);
    CHECK(t.select("homogeneous", 0.0, 64).size() == 6);
    CHECK(t.times() == std::vector<double>{10.0, 100.0});
  }

  TEST_CASE("nearest rank quantile") {
    const std::vector<double> v{5, 3, 9, 1, 7, 2, 8, 4, 6, 10};
    CHECK(quantile(v, 0.0) == 1.0);
    CHECK(quantile(v, 0.5) == 5.0);
    CHECK(quantile(v, 0.51) == 6.0);
    CHECK(quantile(v, 1.0) == 10.0);
    CHECK_THROWS_AS(quantile(v, 1.5), DomainError);
    CHECK_THROWS_AS(quantile(std::vector<double>{}, 0.5), DomainError);
  }

  TEST_CASE("quantiles are monotone in q") {
    std::mt19937_64 rng(3);
    std::lognormal_distribution<double> d;
    std::vector<double> v(257);
    for (double& x : v) x = d(rng);
    double last = -1.0;
    for (int k = 0; k <= 100; ++k) {
      const double q = quantile(v, k / 100.0);
      CHECK(q >= last);
      last = q;
    }
  }

  TEST_CASE("exact log law is recovered") {
    FitOptions o;
    o.model = ScalingModel::kLogLaw;
    const FitResult f = fit_scaling(synthetic({1e2, 1e3, 1e4, 1e5, 1e6}, 30, log_law), o);
    CHECK(f.exponent == doctest::Approx(4.0).epsilon(0.0025));
    CHECK(f.standard_error < 1e-6);
    CHECK(f.times.size() == 5);
  }

  TEST_CASE("exact power law is recovered") {
    const FitResult f = fit_scaling(synthetic({1e2, 3e2, 1e3, 3e3, 1e4}, 30, power_law), {});
    CHECK(f.exponent == doctest::Approx(1.03).epsilon(1e-9));
    CHECK(f.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-9));
  }

  TEST_CASE("refitting the fitted model stays within one standard error") {
    const SweepTable noisy = synthetic({1e2, 2e2, 5e2, 1e3, 2e3, 5e3}, 40, power_law, 0.3, 11);
    const FitResult f = fit_scaling(noisy, {});
    CHECK(f.standard_error > 0.0);
    std::vector<double> model(f.times.size());
    for (std::size_t i = 0; i < f.times.size(); ++i)
      model[i] = std::exp(f.intercept - f.exponent * std::log(f.times[i]));
    const FitResult again = fit_curve(f.times, model, ScalingModel::kPowerLaw);
    CHECK(std::abs(again.exponent - f.exponent) <= f.standard_error);
  }

  TEST_CASE("fits refuse thin data") {
    CHECK_THROWS_AS(fit_scaling(synthetic({1e2, 1e3, 1e4}, 30, power_law), {}), FitRefused);
    CHECK_THROWS_AS(fit_scaling(synthetic({1e2, 1e3, 1e4, 1e5}, 29, power_law), {}), FitRefused);
    FitOptions window;
    window.t_min = 5e2;
    CHECK_THROWS_AS(fit_scaling(synthetic({1e2, 1e3, 1e4, 1e5}, 30, power_law), window),
                    FitRefused);
  }

  TEST_CASE("least squares standard errors") {
    const std::vector<double> x{0, 1, 2, 3, 4}, y{1.1, 2.9, 5.2, 6.8, 9.1};
    const LinearFit f = least_squares(x, y);
    // Closed form: slope = Sxy/Sxx, se^2 = (RSS/(n-2))/Sxx.
    double sxy = 0, sxx = 0;
    for (int i = 0; i < 5; ++i) {
      sxy += (x[i] - 2) * (y[i] - 5.02);
      sxx += (x[i] - 2) * (x[i] - 2);
    }
    const double slope = sxy / sxx;
    double rss = 0;
    for (int i = 0; i < 5; ++i) {
      const double e = y[i] - (5.02 + slope * (x[i] - 2));
      rss += e * e;
    }
    CHECK(f.slope == doctest::Approx(slope));
    CHECK(f.slope_error == doctest::Approx(std::sqrt(rss / 3 / sxx)));
  }

  TEST_CASE("pure KZM scales") {
    const KzmPredictor p = KzmPredictor::pure_ising();
    for (double tau : {4.0, 64.0, 1e4}) {
      const KzmScales s = kzm_scales(p, tau);
      CHECK(s.length == doctest::Approx(std::sqrt(tau)));
      CHECK(s.time == doctest::Approx(std::sqrt(tau)));
      CHECK(s.velocity == doctest::Approx(1.0));
    }
    CHECK(threshold_velocity(p, 0.01) == 2.0);
    CHECK(threshold_velocity(p, 0.5) == 2.0);
    CHECK_THROWS_AS(kzm_scales(p, 0.0), DomainError);
  }

  TEST_CASE("disordered KZM scales") {
    const KzmPredictor p = KzmPredictor::random_ising(2.0);
    const KzmScales s = kzm_scales(p, 2.0 * std::exp(4.0));
    CHECK(s.length == doctest::Approx(16.0 / std::pow(std::log(4.0), 2)));
    CHECK(s.velocity == doctest::Approx(s.length / s.time));
    CHECK_THROWS_AS(kzm_scales(p, 2.0 * std::exp(1.0)), DomainError);
    CHECK(penetration_depth(p, 1.0 / 64) / penetration_depth(p, 1.0 / 8) == doctest::Approx(4.0));
    const double ratio = std::log(instantaneous_gap(p, 0.01)) / std::log(instantaneous_gap(p, 0.08));
    CHECK(ratio == doctest::Approx(2.0));
  }

  TEST_CASE("ks distance") {
    const std::vector<double> a{1, 2, 3}, b{4, 5, 6}, c{1, 2, 3, 4};
    CHECK(ks_distance(a, b) == 1.0);
    CHECK(ks_distance(a, a) == 0.0);
    CHECK(ks_distance(a, c) == doctest::Approx(0.25));
  }

  TEST_CASE("exactly rescaled gap sets collapse") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> gauss(-6.0, 1.5);
    std::uniform_real_distribution<double> u(0.01, 0.5);
    std::vector<GapSample> samples;
    const double a1 = 0.125, a2 = 1.0;
    for (int i = 0; i < 800; ++i) {
      const double x = gauss(rng), ratio = u(rng);
      // Same x and y for both slopes.
      const double d1 = std::exp(x / std::cbrt(a1)), d2 = std::exp(x / std::cbrt(a2));
      samples.push_back({static_cast<std::uint64_t>(i), a1, 1.0, d1, ratio * d1 * std::pow(a1, 2.0 / 3.0), 0.0});
      samples.push_back({static_cast<std::uint64_t>(i), a2, 1.0, d2, ratio * d2 * std::pow(a2, 2.0 / 3.0), 0.0});
    }
    samples.push_back({1000, a1, 1.0, 0.0, 0.0, 0.0});  // dropped: no positive gap
    RescaleOptions o;
    const RescaleResult r = rescale_gaps(samples, o);
    REQUIRE(r.groups.size() == 2);
    CHECK(r.groups[0].alpha == a1);
    CHECK(r.groups[0].x.size() == 800);
    CHECK(r.groups[1].x.size() == 800);
    CHECK(r.collapse_ks < 2.0 / 800);
    CHECK(r.joint_ks_y < 2.0 / 800);
    CHECK(r.unrescaled_ks > 0.5);
    for (const auto& g : r.groups) {
      double area = 0.0;
      const double w = (g.x_histogram.hi - g.x_histogram.lo) / g.x_histogram.density.size();
      for (double dens : g.x_histogram.density) area += dens * w;
      CHECK(area == doctest::Approx(1.0));
    }
  }

  TEST_CASE("rescaling refuses a single group or thin groups") {
    std::vector<GapSample> one(600, GapSample{1, 0.125, 1.0, 0.1, 0.01, 0.0});
    CHECK_THROWS_AS(rescale_gaps(one), FitRefused);
    std::vector<GapSample> thin = one;
    thin.push_back({2, 0.25, 1.0, 0.1, 0.01, 0.0});
    CHECK_THROWS_AS(rescale_gaps(thin), FitRefused);
  }

  TEST_CASE("gaussian tail recovery") {
    std::mt19937_64 rng(6);
    const double a = 2.0, x0 = -1.0;
    std::normal_distribution<double> gauss(x0, std::sqrt(1.0 / (2.0 * a)));
    std::vector<double> x(200000);
    for (double& v : x) v = gauss(rng);
    const GaussianTail t = fit_gaussian_tail(x, 60);
    CHECK(t.a == doctest::Approx(a).epsilon(0.1));
    CHECK(t.x0 == doctest::Approx(x0).epsilon(0.05));
  }

  TEST_CASE("minimal gap quantile") {
    // N / (2a ln(1/q)) = e gives x_q = -sqrt(1 / (2a)).
    const double a = 1.0 / std::exp(1.0), q = std::exp(-1.0), alpha = 0.125;
    const double xq = -std::sqrt(1.0 / (2.0 * a));
    CHECK(minimal_gap_quantile(a, 2, q, alpha) == doctest::Approx(std::exp(xq * 2.0)));
    const double l1 = std::log(minimal_gap_quantile(0.5, 1000, 0.5, alpha));
    const double l2 = std::log(minimal_gap_quantile(0.5, 1000 * 1000, 0.5, alpha));
    // ln Delta = -alpha^(-1/3) sqrt(ln(N c)/ (2a)), c = 1/(2a ln 2).
    const double c = 1.0 / std::log(2.0);
    CHECK(l2 / l1 == doctest::Approx(std::sqrt(std::log(1e6 * c) / std::log(1e3 * c))));
    CHECK_THROWS_AS(minimal_gap_quantile(0.5, 2, 0.1, alpha), DomainError);
    CHECK_THROWS_AS(minimal_gap_quantile(0.0, 100, 0.5, alpha), DomainError);
  }

  TEST_CASE("weak link statistics match direct minima") {
    const int n = 200, trials = 4000;
    const double eps = 0.003;
    int hits = 0;
    for (int i = 0; i < trials; ++i) {
      const auto r = sample_couplings(CouplingDistribution::uniform(-1.0, 1.0), n, derive_seed(41, i));
      double m = 1.0;
      for (double j : r.couplings) m = std::min(m, std::abs(j));
      if (m < eps) ++hits;
    }
    const double p = weak_link_probability(eps, n - 1);
    const double sigma = std::sqrt(p * (1 - p) / trials);
    CHECK(std::abs(static_cast<double>(hits) / trials - p) < 3.0 * sigma);
  }

  TEST_CASE("report json") {
    const FitResult f = fit_scaling(synthetic({1e2, 3e2, 1e3, 3e3}, 30, power_law), {});
    const nlohmann::json j = to_json(f);
    CHECK(j.at("exponent").get<double>() == f.exponent);
    CHECK(j.at("T").size() == 4);
  }
}
