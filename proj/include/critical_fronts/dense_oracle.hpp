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

// Brute-force spin dynamics on the full 2^N Hilbert space, used to validate
// the free-fermion machinery. Basis state bit n (0-based) is the Z_{n+1}
// eigenvalue: 0 -> +1, 1 -> -1. Periodic chains carry a literal Z_N Z_1 term,
// so no parity sectors are involved.

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "critical_fronts/instance.hpp"
#include "critical_fronts/quadratic.hpp"
#include "critical_fronts/schedules.hpp"

namespace cfronts {

inline constexpr int kDenseOracleMaxSites = 12;

// Dense H for the given fields. Throws DomainError for N > 12.
Eigen::MatrixXd dense_hamiltonian(const DisorderRealization& realization,
                                  std::span<const double> fields,
                                  const BuildOptions& boundary = {});

struct OracleOptions {
  BuildOptions boundary;
  double tolerance = 1e-11;  // DOPRI5 absolute and relative tolerance
  double max_step = 0.05;
};

struct OracleResult {
  double initial_energy = 0.0;  // <H(0)> of the initial ground state
  double final_energy = 0.0;    // <H_p> at t = T
  double ground_energy = 0.0;   // lowest eigenvalue of H_p
  // <Z_n Z_{n+1}> at t = T, n = 1..N-1 (plus the closing bond on a ring).
  std::vector<double> bond_correlators;
  double norm_drift = 0.0;  // | |psi(T)| - 1 |
};

OracleResult dense_oracle(const DisorderRealization& realization, const ScheduleSpec& spec,
                          const OracleOptions& options = {});

}  // namespace cfronts
