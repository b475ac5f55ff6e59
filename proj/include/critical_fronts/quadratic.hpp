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

// Free-fermion image of
//
//   H = -sum_n g_n X_n - sum_n J_n Z_n Z_{n+1} - sum_n K_n Z_n X_{n+1} Z_{n+2}
//
// Conventions (fixed here, checked against dense diagonalization for N <= 10):
//
//   Majoranas   a_n = S_n Z_n,  b_n = S_n Y_n,  S_n = prod_{m<n} X_m
//   fermions    c_n = (a_n - i b_n) / 2,  so X_n = i a_n b_n = 1 - 2 c_n^+ c_n
//   Z_n Z_{n+1}          = i b_n a_{n+1}
//   Z_n X_{n+1} Z_{n+2}  = i b_n a_{n+2}
//
//   H = sum_ij A_ij c_i^+ c_j + 1/2 sum_ij (B_ij c_i^+ c_j^+ + h.c.) - tr(A)/2
//     = (i/2) sum_ij W_ij b_i a_j,        W = A + B
//
//   A_nn = 2 g_n,  A_{n,n+1} = A_{n+1,n} = -J_n,  B_{n,n+1} = -B_{n+1,n} = -J_n,
//   and the same pattern at distance 2 with K_n.
//
// The quasiparticle energies are the singular values of W (equivalently the
// positive BdG eigenvalues of [[A, B], [-B, -A]]), and the ground energy is
// E_0 = -sum_m eps_m / 2 with no additional constant.
//
// Periodic chains are handled in the even-parity sector, which contains the
// paramagnetic initial state: the closing bond enters with the opposite sign
// (antiperiodic fermions).

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "critical_fronts/instance.hpp"

namespace cfronts {

enum class Model { kIsing, kClusterIsing };

struct BuildOptions {
  bool periodic = false;
  // J on the closing bond (N, 1); required when periodic.
  std::optional<double> closing_coupling;
};

struct QuadraticForm {
  int modes = 0;
  Eigen::MatrixXd hopping;  // A, symmetric
  Eigen::MatrixXd pairing;  // B, antisymmetric
  Model model = Model::kIsing;
  bool periodic = false;

  Eigen::MatrixXd coupling() const { return hopping + pairing; }  // W
};

QuadraticForm build_quadratic(const DisorderRealization& realization,
                              std::span<const double> fields,
                              const BuildOptions& options = {});

// Form of a pure field perturbation: A = diag(2 d_n), B = 0. Used for
// dH/dn_f when only the fields depend on the front position.
QuadraticForm field_perturbation(std::span<const double> field_derivative,
                                 Model model = Model::kIsing);

// Throws InvariantViolation unless A = A^T and B = -B^T to 1e-12.
void check_form(const QuadraticForm& form);

struct SpectrumResult {
  Eigen::VectorXd energies;  // eps_1 <= ... <= eps_N, all >= 0
  // Majorana normal modes: b'_m = sum_i left(i, m) b_i, a'_m = sum_j right(j, m) a_j.
  Eigen::MatrixXd left;
  Eigen::MatrixXd right;
  double ground_energy = 0.0;  // energy of the quasiparticle vacuum
  int vacuum_parity = 1;       // eigenvalue of prod X_n on the vacuum

  // Bogoliubov coefficients eta_m = sum_j u_jm c_j + v_jm c_j^+.
  Eigen::MatrixXd u() const { return 0.5 * (right + left); }
  Eigen::MatrixXd v() const { return 0.5 * (right - left); }
};

SpectrumResult diagonalize(const QuadraticForm& form);

// G_ij = <i b_i a_j> in the vacuum of `spectrum`: G = -left * right^T.
Eigen::MatrixXd vacuum_correlations(const SpectrumResult& spectrum);

// <H> for a state with correlations G_ij = <i b_i a_j>.
double energy_of(const QuadraticForm& form, const Eigen::MatrixXd& correlations);

struct RelevantGap {
  double delta = 0.0;  // eps_a + eps_b
  double omega = 0.0;  // |<0| dH |a b>|
  int mode_a = 0;      // 0-based, ascending-energy order, a < b
  int mode_b = 0;
};

// Smallest two-quasiparticle excitation eps_a + eps_b (a < b) whose
// transition element satisfies omega / delta >= threshold. Odd-parity
// states and the a == b channel are absent: a quadratic perturbation only
// creates pairs of distinct quasiparticles from the vacuum.
std::optional<RelevantGap> relevant_gap_and_omega(const QuadraticForm& form,
                                                  const QuadraticForm& derivative,
                                                  double threshold = 1e-3);

// Same, reusing a spectrum already computed for `form`.
std::optional<RelevantGap> relevant_gap_and_omega(const SpectrumResult& spectrum,
                                                  const QuadraticForm& derivative,
                                                  double threshold = 1e-3);

struct GapSample {
  std::uint64_t seed = 0;
  double alpha = 0.0;
  double front_pos = 0.0;
  double delta = 0.0;
  double omega = 0.0;
  double time = 0.0;
};

void write_gap_csv_header(std::ostream& out);
void write_gap_csv_row(std::ostream& out, const GapSample& sample);
std::vector<GapSample> read_gap_csv(std::istream& in);

}  // namespace cfronts
