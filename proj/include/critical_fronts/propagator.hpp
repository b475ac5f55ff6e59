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

// Heisenberg propagation of Majorana operators. With gamma = (a_1, b_1, ...,
// a_N, b_N) (row 2n is a_n, row 2n+1 is b_n, 0-based n) and
//
//   H(t) = (i/2) sum_ij W_ij(t) b_i a_j,
//
// the operators evolve as gamma(t) = R(t) gamma(0) with R orthogonal and
// dR/dt = h(t) R, h_{b_i a_j} = -h_{a_j b_i} = W_ij. A single term w b a
// rotates the rows (b, a) exactly:
//
//   r_b' =  cos(w dt) r_b + sin(w dt) r_a
//   r_a' = -sin(w dt) r_b + cos(w dt) r_a
//
// The Hamiltonian splits into layers of mutually commuting terms: on-site
// fields (b_n, a_n), bonds (b_n, a_{n+1}) plus the periodic closing bond
// (b_N, a_1), and three-site terms (b_n, a_{n+2}). Only the field layer
// depends on time.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "critical_fronts/simd/rotation_kernels.hpp"

namespace cfronts {

// Constant two-Majorana couplings w b_i a_j (0-based site indices).
struct MajoranaTerm {
  int b_site = 0;
  int a_site = 0;
  double weight = 0.0;
};

struct MajoranaGenerator {
  int modes = 0;
  std::vector<MajoranaTerm> bonds;     // disjoint pairs
  std::vector<MajoranaTerm> clusters;  // disjoint pairs
  // Writes the on-site weights w_n(t) = 2 g_n(t) for n = 0..N-1.
  std::function<void(double, std::span<double>)> field_weights;
  // Optional: the on-site weights averaged over [t0, t1]. The splitting
  // integrator prefers it to a midpoint sample, which keeps kinks in g(t)
  // from degrading the step.
  std::function<void(double, double, std::span<double>)> field_averages;

  // Dense h(t), for the reference integrator and tests.
  Eigen::MatrixXd dense(double t) const;
};

enum class Integrator { kSplitting, kRungeKutta };

struct StepControl {
  Integrator method = Integrator::kSplitting;
  // Splitting: uniform dt = T / ceil(T / max_step).
  double max_step = 0.1;
  int order = 4;  // 2 (Strang) or 4 (Yoshida)
  int chunk_steps = 64;
  // Runge-Kutta: absolute and relative tolerance of the DOPRI5 controller.
  double tolerance = 1e-10;
  // Unitarity control, in max |R^T R - I|.
  double reorthonormalize_above = 1e-10;
  double fail_above = 1e-6;
  // Full Gram check after every step instead of column norms per chunk.
  bool check_every_step = false;
  const simd::KernelTable* kernels = nullptr;  // null: simd::active_kernels()
};

struct PropagationStats {
  std::int64_t steps = 0;
  int reorthonormalizations = 0;
  double max_drift = 0.0;  // largest drift seen at any check
};

// Advances `rotation` (2N x 2N, orthogonal) from t0 to t1. Throws
// IntegrationFailure once the drift exceeds control.fail_above.
PropagationStats propagate(const MajoranaGenerator& generator, double t0, double t1,
                           const StepControl& control, Eigen::MatrixXd& rotation);

double orthogonality_drift(const Eigen::MatrixXd& rotation);

// Nearest orthogonal matrix (polar factor).
void reorthonormalize(Eigen::MatrixXd& rotation);

}  // namespace cfronts
