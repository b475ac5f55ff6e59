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

#include "critical_fronts/schedules.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "critical_fronts/errors.hpp"
#include "critical_fronts/hashing.hpp"

namespace cfronts {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_domain(const ScheduleSpec& spec, int site, double t) {
  if (site < 1 || site > spec.sites)
    throw DomainError("schedule: site index out of range");
  const double slack = 1e-12 * spec.total_time;
  if (!(t >= -slack && t <= spec.total_time + slack))
    throw DomainError("schedule: time outside [0, T]");
}

double clamp_between(double value, double a, double b) {
  return std::clamp(value, std::min(a, b), std::max(a, b));
}

struct LocalCoordinate {
  double offset;    // m - L/2
  double velocity;  // vertical velocity of the cluster
};

LocalCoordinate cluster_coordinate(const MultiFrontPiecewise& p, int site) {
  const int k = p.partition.cluster_of(site);
  const int first = p.partition.first_site(k);
  const double length = p.partition.lengths[static_cast<std::size_t>(k)];
  const double local = site - first + 1;
  return {local - length / 2.0, p.partition.velocities[static_cast<std::size_t>(k)]};
}

double piecewise_base(const ScheduleSpec& spec, const MultiFrontPiecewise& p) {
  return p.start_at_midpoint ? 0.5 * (spec.g_initial + spec.g_final)
                             : spec.g_initial;
}

// Unclamped argument of the piecewise branch.
double piecewise_linear(const ScheduleSpec& spec, const MultiFrontPiecewise& p,
                        int site, double t) {
  const auto [offset, v] = cluster_coordinate(p, site);
  return piecewise_base(spec, p) + p.alpha * std::abs(offset) - v * t;
}

bool strictly_inside(double value, double a, double b) {
  return value > std::min(a, b) && value < std::max(a, b);
}

}  // namespace

double Velocity::value() const {
  if (infinite_) throw std::logic_error("Velocity: infinite sentinel has no value");
  return value_;
}

std::string ScheduleSpec::variant_name() const {
  return std::visit(
      overloaded{[](const HomogeneousRamp&) { return std::string("Homogeneous"); },
                 [](const PeriodicTypeI&) { return std::string("PeriodicTypeI"); },
                 [](const TanhTypeII&) { return std::string("TanhTypeII"); },
                 [](const MultiFrontPiecewise&) {
                   return std::string("MultiFrontPiecewise");
                 }},
      params);
}

void validate(const ScheduleSpec& spec) {
  if (!(spec.total_time > 0.0)) throw DomainError("schedule: T must be > 0");
  if (spec.sites < 1) throw DomainError("schedule: N must be >= 1");
  if (const auto* p = std::get_if<MultiFrontPiecewise>(&spec.params)) {
    if (!(p->alpha >= 0.0)) throw DomainError("schedule: alpha must be >= 0");
    if (p->partition.sites() != spec.sites)
      throw DomainError("schedule: partition does not tile the chain");
    if (spec.g_final > spec.g_initial)
      throw DomainError("schedule: piecewise fronts need g_initial >= g_final");
    const double drop = piecewise_base(spec, *p) - spec.g_final;
    for (std::size_t k = 0; k < p->partition.lengths.size(); ++k) {
      // The cluster edge sits alpha * L/2 above the base value.
      const double need = drop + p->alpha * p->partition.lengths[k] / 2.0;
      if (spec.total_time * p->partition.velocities[k] < need * (1.0 - 1e-12))
        throw DomainError("schedule: cluster sweep does not complete by T");
    }
  }
  if (const auto* p = std::get_if<TanhTypeII>(&spec.params)) {
    if (p->fronts.empty()) throw DomainError("schedule: TanhTypeII needs fronts");
  }
}

namespace detail {

double field_unchecked(const ScheduleSpec& spec, int site, double t) {
  const double T = spec.total_time;
  return std::visit(
      overloaded{
          [&](const HomogeneousRamp&) {
            return spec.g_initial + (spec.g_final - spec.g_initial) * t / T;
          },
          [&](const PeriodicTypeI& p) {
            return spec.g_initial + (spec.g_final - spec.g_initial) * t / T +
                   p.amplitude * std::cos(p.wavenumber * site) *
                       std::sin(std::numbers::pi * t / T);
          },
          [&](const TanhTypeII& p) {
            double sum = 0.0;
            bool linear = false;
            for (const Front& f : p.fronts) {
              const double x =
                  f.steepness * (std::abs(site - f.center) - f.velocity * t);
              if (f.shape == FrontShape::kLinear) {
                sum += f.weight * x;
                linear = true;
              } else {
                sum += f.weight * std::tanh(x);
              }
            }
            const double g = p.critical_field * (1.0 + sum);
            return linear ? clamp_between(g, spec.g_initial, spec.g_final) : g;
          },
          [&](const MultiFrontPiecewise& p) {
            return clamp_between(piecewise_linear(spec, p, site, t),
                                 spec.g_initial, spec.g_final);
          }},
      spec.params);
}

namespace {

// Mean of clamp(c0 + c1 t, a, b) over [t0, t1].
double clamped_linear_average(double c0, double c1, double a, double b, double t0, double t1) {
  auto f = [&](double t) { return clamp_between(c0 + c1 * t, a, b); };
  if (c1 == 0.0 || t1 <= t0) return f(0.5 * (t0 + t1));
  double cuts[4] = {t0, (a - c0) / c1, (b - c0) / c1, t1};
  std::sort(cuts + 1, cuts + 3);
  double sum = 0.0, left = t0;
  for (double right : {cuts[1], cuts[2], cuts[3]}) {
    right = std::clamp(right, t0, t1);
    if (right > left) sum += f(0.5 * (left + right)) * (right - left);
    left = std::max(left, right);
  }
  return sum / (t1 - t0);
}

}  // namespace

double field_average_unchecked(const ScheduleSpec& spec, int site, double t0, double t1) {
  if (!(t1 > t0)) return field_unchecked(spec, site, t0);
  const double T = spec.total_time;
  const double mid = 0.5 * (t0 + t1);
  return std::visit(
      overloaded{
          [&](const HomogeneousRamp&) { return field_unchecked(spec, site, mid); },
          [&](const PeriodicTypeI& p) {
            const double ramp = spec.g_initial + (spec.g_final - spec.g_initial) * mid / T;
            const double sin_mean = T / std::numbers::pi *
                                    (std::cos(std::numbers::pi * t0 / T) -
                                     std::cos(std::numbers::pi * t1 / T)) /
                                    (t1 - t0);
            return ramp + p.amplitude * std::cos(p.wavenumber * site) * sin_mean;
          },
          [&](const TanhTypeII& p) {
            double c0 = 0.0, c1 = 0.0;
            for (const Front& f : p.fronts) {
              if (f.shape != FrontShape::kLinear) return field_unchecked(spec, site, mid);
              c0 += f.weight * f.steepness * std::abs(site - f.center);
              c1 -= f.weight * f.steepness * f.velocity;
            }
            return clamped_linear_average(p.critical_field * (1.0 + c0), p.critical_field * c1,
                                          spec.g_initial, spec.g_final, t0, t1);
          },
          [&](const MultiFrontPiecewise& p) {
            const auto [offset, v] = cluster_coordinate(p, site);
            return clamped_linear_average(piecewise_base(spec, p) + p.alpha * std::abs(offset), -v,
                                          spec.g_initial, spec.g_final, t0, t1);
          }},
      spec.params);
}

}  // namespace detail

double field_at(const ScheduleSpec& spec, int site, double t) {
  check_domain(spec, site, t);
  return detail::field_unchecked(spec, site, t);
}

std::vector<double> fields_at(const ScheduleSpec& spec, double t) {
  std::vector<double> g(static_cast<std::size_t>(spec.sites));
  for (int n = 1; n <= spec.sites; ++n) g[static_cast<std::size_t>(n - 1)] = field_at(spec, n, t);
  return g;
}

Hyperparameters hyperparameters(const ScheduleSpec& spec, int site, double t) {
  check_domain(spec, site, t);
  const double T = spec.total_time;
  auto from_slopes = [](double alpha, double v_v) {
    // dn/dt at fixed g = -(dg/dt) / (dg/dn) = v_v / alpha.
    if (alpha == 0.0) return Hyperparameters{0.0, Velocity::infinite(), v_v};
    return Hyperparameters{alpha, Velocity::finite(v_v / alpha), v_v};
  };
  return std::visit(
      overloaded{
          [&](const HomogeneousRamp&) {
            return Hyperparameters{0.0, Velocity::infinite(),
                                   (spec.g_initial - spec.g_final) / T};
          },
          [&](const PeriodicTypeI& p) {
            const double k = p.wavenumber;
            const double phase = std::numbers::pi * t / T;
            const double alpha = -p.amplitude * k * std::sin(k * site) * std::sin(phase);
            const double v_v = (spec.g_initial - spec.g_final) / T -
                               p.amplitude * std::cos(k * site) *
                                   (std::numbers::pi / T) * std::cos(phase);
            return from_slopes(alpha, v_v);
          },
          [&](const TanhTypeII& p) {
            double alpha = 0.0;
            double v_v = 0.0;
            double g_lin = 0.0;
            bool linear = false;
            for (const Front& f : p.fronts) {
              const double dist = site - f.center;
              const double sign = dist > 0.0 ? 1.0 : (dist < 0.0 ? -1.0 : 1.0);
              const double x = f.steepness * (std::abs(dist) - f.velocity * t);
              double slope;
              if (f.shape == FrontShape::kLinear) {
                slope = 1.0;
                g_lin += f.weight * x;
                linear = true;
              } else {
                const double th = std::tanh(x);
                slope = 1.0 - th * th;
              }
              const double common = p.critical_field * f.weight * slope * f.steepness;
              alpha += common * sign;
              v_v += common * f.velocity;
            }
            if (linear) {
              const double g = p.critical_field * (1.0 + g_lin);
              if (!strictly_inside(g, spec.g_initial, spec.g_final)) {
                // Left limit at the clamp kink: still on the linear branch
                // only when exactly at the boundary and arriving from inside.
                return from_slopes(0.0, 0.0);
              }
            }
            if (p.fronts.size() == 1) {
              // Single front: v_h is the front velocity with its direction.
              const Front& f = p.fronts.front();
              const double sign = site >= f.center ? 1.0 : -1.0;
              return Hyperparameters{alpha, Velocity::finite(sign * f.velocity), v_v};
            }
            return from_slopes(alpha, v_v);
          },
          [&](const MultiFrontPiecewise& p) {
            const auto [offset, v] = cluster_coordinate(p, site);
            const double raw = piecewise_linear(spec, p, site, t);
            // Kinks return the left-limit (earlier-time) derivative: the
            // upper clamp is left at raw == g_i, the lower one only after.
            const bool on_branch = raw < spec.g_initial && raw >= spec.g_final;
            if (!on_branch) {
              if (p.alpha == 0.0) return Hyperparameters{0.0, Velocity::infinite(), 0.0};
              return Hyperparameters{0.0, Velocity::finite((offset >= 0 ? 1.0 : -1.0) * v / p.alpha), 0.0};
            }
            const double sign = offset >= 0.0 ? 1.0 : -1.0;
            return from_slopes(sign * p.alpha, v);
          }},
      spec.params);
}

std::vector<double> front_derivative(const ScheduleSpec& spec, double t) {
  std::vector<double> d(static_cast<std::size_t>(spec.sites));
  for (int n = 1; n <= spec.sites; ++n)
    d[static_cast<std::size_t>(n - 1)] = -std::abs(hyperparameters(spec, n, t).alpha);
  return d;
}

nlohmann::json to_json(const ScheduleSpec& spec) {
  nlohmann::json j{{"variant", spec.variant_name()},
                   {"N", spec.sites},
                   {"g_initial", spec.g_initial},
                   {"g_final", spec.g_final},
                   {"total_time", spec.total_time}};
  std::visit(
      overloaded{[](const HomogeneousRamp&) {},
                 [&](const PeriodicTypeI& p) {
                   j["amplitude"] = p.amplitude;
                   j["wavenumber"] = p.wavenumber;
                 },
                 [&](const TanhTypeII& p) {
                   j["critical_field"] = p.critical_field;
                   j["fronts"] = nlohmann::json::array();
                   for (const Front& f : p.fronts)
                     j["fronts"].push_back(
                         {{"center", f.center},
                          {"steepness", f.steepness},
                          {"weight", f.weight},
                          {"velocity", f.velocity},
                          {"shape", f.shape == FrontShape::kLinear ? "linear" : "tanh"}});
                 },
                 [&](const MultiFrontPiecewise& p) {
                   j["alpha"] = p.alpha;
                   j["start_at_midpoint"] = p.start_at_midpoint;
                   j["clusters"] = nlohmann::json::array();
                   for (std::size_t k = 0; k < p.partition.lengths.size(); ++k)
                     j["clusters"].push_back({{"length", p.partition.lengths[k]},
                                              {"velocity", p.partition.velocities[k]}});
                 }},
      spec.params);
  return j;
}

ScheduleSpec schedule_from_json(const nlohmann::json& j) {
  ScheduleSpec spec;
  spec.sites = j.at("N").get<int>();
  spec.g_initial = j.at("g_initial").get<double>();
  spec.g_final = j.at("g_final").get<double>();
  spec.total_time = j.at("total_time").get<double>();
  const std::string variant = j.at("variant").get<std::string>();
  if (variant == "Homogeneous") {
    spec.params = HomogeneousRamp{};
  } else if (variant == "PeriodicTypeI") {
    spec.params = PeriodicTypeI{j.at("amplitude").get<double>(),
                                j.at("wavenumber").get<double>()};
  } else if (variant == "TanhTypeII") {
    TanhTypeII p;
    p.critical_field = j.at("critical_field").get<double>();
    for (const auto& f : j.at("fronts")) {
      Front front;
      front.center = f.at("center").get<double>();
      front.steepness = f.at("steepness").get<double>();
      front.weight = f.value("weight", 1.0);
      front.velocity = f.at("velocity").get<double>();
      front.shape = f.value("shape", std::string("tanh")) == "linear"
                        ? FrontShape::kLinear
                        : FrontShape::kTanh;
      p.fronts.push_back(front);
    }
    spec.params = std::move(p);
  } else if (variant == "MultiFrontPiecewise") {
    MultiFrontPiecewise p;
    p.alpha = j.at("alpha").get<double>();
    p.start_at_midpoint = j.value("start_at_midpoint", false);
    int edge = 0;
    for (const auto& c : j.at("clusters")) {
      p.partition.lengths.push_back(c.at("length").get<int>());
      p.partition.velocities.push_back(c.at("velocity").get<double>());
      edge += p.partition.lengths.back();
      p.partition.cuts.push_back(edge);
    }
    if (!p.partition.cuts.empty()) p.partition.cuts.pop_back();
    spec.params = std::move(p);
  } else {
    throw ConfigError("unknown schedule variant: " + variant);
  }
  validate(spec);
  return spec;
}

std::string schedule_hash(const ScheduleSpec& spec) {
  return fnv1a_hex(to_json(spec).dump());
}

}  // namespace cfronts
