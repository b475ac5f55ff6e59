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

// Annealing fields g(n, t) on sites n = 1..N over 0 <= t <= T (hbar = 1).
//
//   Homogeneous          g = g_i + (g_f - g_i) t / T
//   PeriodicTypeI        g = g_i + (g_f - g_i) t / T + a cos(k n) sin(pi t / T)
//   TanhTypeII           g = g_c {1 + sum_k w_k tanh[theta_k (|n - n_k| - v_k t)]}
//                        (linear fronts replace tanh(x) by x and clamp the
//                        result to [g_f, g_i])
//   MultiFrontPiecewise  per cluster of length L, local site m,
//                        d = |m - L/2|:
//                        g = clamp(base + alpha d - v_k t, g_f, g_i)
//                        base = g_i, or (g_i + g_f)/2 when start_at_midpoint.
//                        v_k is the cluster's vertical velocity; the fronts
//                        move at v_k / alpha sites per unit time.

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "critical_fronts/instance.hpp"

namespace cfronts {

struct HomogeneousRamp {};

struct PeriodicTypeI {
  double amplitude = 1.0;
  double wavenumber = 0.0;
};

enum class FrontShape { kTanh, kLinear };

struct Front {
  double center = 0.0;     // n_k
  double steepness = 1.0;  // theta_k
  double weight = 1.0;     // omega_k
  double velocity = 1.0;   // v_k, sites / time
  FrontShape shape = FrontShape::kTanh;
};

struct TanhTypeII {
  double critical_field = 1.0;  // g_c
  std::vector<Front> fronts;
};

struct MultiFrontPiecewise {
  double alpha = 0.125;
  ClusterPartition partition;
  bool start_at_midpoint = false;
};

using ScheduleParams =
    std::variant<HomogeneousRamp, PeriodicTypeI, TanhTypeII, MultiFrontPiecewise>;

struct ScheduleSpec {
  int sites = 1;
  double g_initial = 2.0;
  double g_final = 0.0;
  double total_time = 1.0;
  ScheduleParams params = HomogeneousRamp{};

  std::string variant_name() const;
};

// Throws DomainError when the spec breaks its invariants (T <= 0, alpha < 0,
// incomplete sweep, partition not tiling the chain, ...).
void validate(const ScheduleSpec& spec);

// Horizontal velocity; the homogeneous ramp moves its "front" infinitely fast.
class Velocity {
 public:
  static Velocity finite(double v) { return Velocity(v, false); }
  static Velocity infinite() { return Velocity(0.0, true); }
  bool is_infinite() const { return infinite_; }
  // Throws std::logic_error for the infinite sentinel.
  double value() const;

 private:
  Velocity(double v, bool inf) : value_(v), infinite_(inf) {}
  double value_;
  bool infinite_;
};

struct Hyperparameters {
  double alpha;        // dg/dn
  Velocity v_h;        // dn/dt at fixed g
  double v_v;          // -dg/dt
};

double field_at(const ScheduleSpec& spec, int site, double t);
Hyperparameters hyperparameters(const ScheduleSpec& spec, int site, double t);

// All N fields at time t.
std::vector<double> fields_at(const ScheduleSpec& spec, double t);

// Derivative of every site's field with respect to the front position,
// -|dg/dn|: the field falls by |alpha| per site the front advances.
std::vector<double> front_derivative(const ScheduleSpec& spec, double t);

namespace detail {
// Closed form without the 0 <= t <= T check; integrators use it for
// sub-step abscissae that step slightly past T.
double field_unchecked(const ScheduleSpec& spec, int site, double t);
// Mean of g over [t0, t1], exact for every schedule except tanh fronts
// (midpoint value there).
double field_average_unchecked(const ScheduleSpec& spec, int site, double t0, double t1);
}  // namespace detail

nlohmann::json to_json(const ScheduleSpec& spec);
ScheduleSpec schedule_from_json(const nlohmann::json& j);

// FNV-1a of the canonical JSON dump, as 16 hex digits.
std::string schedule_hash(const ScheduleSpec& spec);

}  // namespace cfronts
