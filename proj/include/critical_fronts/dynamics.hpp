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

#include <vector>

#include <Eigen/Dense>

#include "critical_fronts/instance.hpp"
#include "critical_fronts/propagator.hpp"
#include "critical_fronts/quadratic.hpp"
#include "critical_fronts/schedules.hpp"

namespace cfronts {

struct EvolveOptions {
  BuildOptions boundary;
  StepControl control;
};

// Gaussian state of the chain: gamma(t) = R gamma(0) acting on the initial
// ground state with correlations G0_ij = <i b_i a_j>.
struct EvolutionState {
  double time = 0.0;
  int modes = 0;
  Eigen::MatrixXd rotation;              // R, 2N x 2N orthogonal
  Eigen::MatrixXd initial_correlations;  // G0, N x N
  PropagationStats stats;

  // Gamma_kl = <i gamma_k gamma_l> (k != l), 2N x 2N antisymmetric.
  Eigen::MatrixXd covariance() const;
  // G_ij = <i b_i a_j>.
  Eigen::MatrixXd correlations() const;
  // max |R^T R - I|; zero for exact evolution.
  double unitarity_drift() const;
};

MajoranaGenerator make_generator(const DisorderRealization& realization,
                                 const ScheduleSpec& spec,
                                 const BuildOptions& boundary = {});

// Ground-state correlations of `form`. Periodic forms live in the even
// sector: when the quasiparticle vacuum is odd, the lowest mode is occupied.
Eigen::MatrixXd ground_correlations(const QuadraticForm& form);
double ground_energy(const QuadraticForm& form);

EvolutionState initial_state(const DisorderRealization& realization,
                             const ScheduleSpec& spec,
                             const BuildOptions& boundary = {});

// Initial ground state of H(0) propagated to t = T.
EvolutionState evolve(const DisorderRealization& realization, const ScheduleSpec& spec,
                      const EvolveOptions& options = {});

struct DefectReport {
  // Expected kink number per bond, n = 1..N-1 (plus the closing bond N on a
  // ring): p_n = (1 - sign(J_n) <Z_n Z_{n+1}>) / 2.
  std::vector<double> bond_kinks;
  double defect_density = 0.0;  // mean of bond_kinks
  double energy = 0.0;          // <H_p>
  double ground_energy = 0.0;   // E_gs of H_p
  double residual = 0.0;        // Q = <H_p> - E_gs
  double residual_per_site = 0.0;  // eps_Q = Q / N
};

// Problem Hamiltonian H_p = H(T), i.e. the couplings with the final fields.
QuadraticForm problem_form(const DisorderRealization& realization, const ScheduleSpec& spec,
                           const BuildOptions& boundary = {});

// E_gs of H_p. Zero-field Ising chains use the classical value -sum |J_n|
// (a frustrated ring pays 2 min |J|); everything else is diagonalized.
double problem_ground_energy(const DisorderRealization& realization,
                             const QuadraticForm& problem);

DefectReport measure_correlations(const Eigen::MatrixXd& correlations,
                                  const DisorderRealization& realization,
                                  const QuadraticForm& problem,
                                  const BuildOptions& boundary = {});

DefectReport measure(const EvolutionState& state, const DisorderRealization& realization,
                     const ScheduleSpec& spec, const BuildOptions& boundary = {});

}  // namespace cfronts
