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

#include "critical_fronts/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "critical_fronts/errors.hpp"

namespace cfronts {
namespace {

Eigen::MatrixXd covariance_from(const Eigen::MatrixXd& g) {
  const Eigen::Index n = g.rows();
  Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      gamma(2 * i + 1, 2 * j) = g(i, j);
      gamma(2 * j, 2 * i + 1) = -g(i, j);
    }
  return gamma;
}

bool fields_vanish(const Eigen::MatrixXd& hopping) {
  return hopping.diagonal().cwiseAbs().maxCoeff() == 0.0;
}

}  // namespace

Eigen::MatrixXd EvolutionState::covariance() const {
  return rotation * covariance_from(initial_correlations) * rotation.transpose();
}

Eigen::MatrixXd EvolutionState::correlations() const {
  const Eigen::MatrixXd gamma = covariance();
  Eigen::MatrixXd g(modes, modes);
  for (int i = 0; i < modes; ++i)
    for (int j = 0; j < modes; ++j) g(i, j) = gamma(2 * i + 1, 2 * j);
  return g;
}

double EvolutionState::unitarity_drift() const { return orthogonality_drift(rotation); }

MajoranaGenerator make_generator(const DisorderRealization& realization,
                                 const ScheduleSpec& spec, const BuildOptions& boundary) {
  if (spec.sites != realization.sites)
    throw DomainError("make_generator: schedule and realization disagree on N");
  const int n = realization.sites;
  MajoranaGenerator gen;
  gen.modes = n;
  for (int s = 0; s + 1 < n; ++s)
    gen.bonds.push_back({s, s + 1, -2.0 * realization.couplings[static_cast<std::size_t>(s)]});
  if (boundary.periodic) {
    if (!boundary.closing_coupling)
      throw DomainError("make_generator: periodic chain needs a closing coupling");
    if (realization.has_three_local())
      throw DomainError("make_generator: periodic chains support the Ising model only");
    gen.bonds.push_back({n - 1, 0, 2.0 * *boundary.closing_coupling});
  }
  for (int s = 0; s + 2 < n && realization.has_three_local(); ++s)
    gen.clusters.push_back(
        {s, s + 2, -2.0 * realization.three_local[static_cast<std::size_t>(s)]});
  gen.field_weights = [spec](double t, std::span<double> w) {
    for (std::size_t s = 0; s < w.size(); ++s)
      w[s] = 2.0 * detail::field_unchecked(spec, static_cast<int>(s) + 1, t);
  };
  gen.field_averages = [spec](double t0, double t1, std::span<double> w) {
    for (std::size_t s = 0; s < w.size(); ++s)
      w[s] = 2.0 * detail::field_average_unchecked(spec, static_cast<int>(s) + 1, t0, t1);
  };
  return gen;
}

Eigen::MatrixXd ground_correlations(const QuadraticForm& form) {
  const SpectrumResult sp = diagonalize(form);
  Eigen::MatrixXd g = vacuum_correlations(sp);
  if (form.periodic && sp.vacuum_parity < 0) {
    // Occupying mode 0 flips the sign of its contribution to G.
    g += 2.0 * sp.left.col(0) * sp.right.col(0).transpose();
  }
  return g;
}

double ground_energy(const QuadraticForm& form) {
  const SpectrumResult sp = diagonalize(form);
  double e = sp.ground_energy;
  if (form.periodic && sp.vacuum_parity < 0) e += sp.energies(0);
  return e;
}

EvolutionState initial_state(const DisorderRealization& realization,
                             const ScheduleSpec& spec, const BuildOptions& boundary) {
  validate(spec);
  const std::vector<double> g0 = fields_at(spec, 0.0);
  const QuadraticForm form = build_quadratic(realization, g0, boundary);
  EvolutionState st;
  st.modes = realization.sites;
  st.time = 0.0;
  st.rotation = Eigen::MatrixXd::Identity(2 * st.modes, 2 * st.modes);
  st.initial_correlations = ground_correlations(form);
  return st;
}

EvolutionState evolve(const DisorderRealization& realization, const ScheduleSpec& spec,
                      const EvolveOptions& options) {
  EvolutionState st = initial_state(realization, spec, options.boundary);
  const MajoranaGenerator gen = make_generator(realization, spec, options.boundary);
  st.stats = propagate(gen, 0.0, spec.total_time, options.control, st.rotation);
  st.time = spec.total_time;
  return st;
}

QuadraticForm problem_form(const DisorderRealization& realization, const ScheduleSpec& spec,
                           const BuildOptions& boundary) {
  return build_quadratic(realization, fields_at(spec, spec.total_time), boundary);
}

double problem_ground_energy(const DisorderRealization& realization,
                             const QuadraticForm& problem) {
  if (problem.model == Model::kIsing && fields_vanish(problem.hopping)) {
    std::vector<double> bonds = realization.couplings;
    double e = 0.0;
    for (double j : bonds) e -= std::abs(j);
    if (problem.periodic) {
      // Closing bond: W(N-1, 0) = +2 J_N in the even sector.
      const double jc = 0.5 * problem.coupling()(problem.modes - 1, 0);
      e -= std::abs(jc);
      bonds.push_back(jc);
      const bool frustrated =
          std::count_if(bonds.begin(), bonds.end(), [](double j) { return j < 0.0; }) % 2 == 1;
      if (frustrated) {
        double weakest = std::numeric_limits<double>::infinity();
        for (double j : bonds) weakest = std::min(weakest, std::abs(j));
        e += 2.0 * weakest;
      }
    }
    return e;
  }
  return ground_energy(problem);
}

DefectReport measure_correlations(const Eigen::MatrixXd& g,
                                  const DisorderRealization& realization,
                                  const QuadraticForm& problem,
                                  const BuildOptions& boundary) {
  const int n = realization.sites;
  if (g.rows() != n || g.cols() != n)
    throw DomainError("measure: correlation matrix has the wrong size");
  auto kink = [](double j, double zz) {
    const double sign = j > 0.0 ? 1.0 : (j < 0.0 ? -1.0 : 0.0);
    return 0.5 * (1.0 - sign * zz);
  };
  DefectReport r;
  for (int s = 0; s + 1 < n; ++s)
    r.bond_kinks.push_back(kink(realization.couplings[static_cast<std::size_t>(s)], g(s, s + 1)));
  if (boundary.periodic)
    r.bond_kinks.push_back(kink(*boundary.closing_coupling, -g(n - 1, 0)));
  if (!r.bond_kinks.empty())
    r.defect_density = std::accumulate(r.bond_kinks.begin(), r.bond_kinks.end(), 0.0) /
                       static_cast<double>(r.bond_kinks.size());
  r.energy = energy_of(problem, g);
  r.ground_energy = problem_ground_energy(realization, problem);
  r.residual = r.energy - r.ground_energy;
  r.residual_per_site = r.residual / static_cast<double>(n);
  return r;
}

DefectReport measure(const EvolutionState& state, const DisorderRealization& realization,
                     const ScheduleSpec& spec, const BuildOptions& boundary) {
  return measure_correlations(state.correlations(), realization,
                              problem_form(realization, spec, boundary), boundary);
}

}  // namespace cfronts
