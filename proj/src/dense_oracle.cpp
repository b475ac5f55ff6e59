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

#include "critical_fronts/dense_oracle.hpp"

#include <cmath>
#include <cstdint>

#include <boost/numeric/odeint.hpp>

#include "critical_fronts/errors.hpp"

namespace cfronts {
namespace {

using Complex = std::complex<double>;
using State = std::vector<Complex>;

double z_of(std::uint32_t x, int site) { return (x >> site) & 1U ? -1.0 : 1.0; }

// Field-independent pieces of H: diagonal ZZ energies and the three-site
// flip amplitudes.
struct SpinChain {
  int n = 0;
  std::uint32_t dim = 0;
  std::vector<double> diagonal;
  std::vector<double> three_local;  // K_n, n = 0..N-3

  SpinChain(const DisorderRealization& r, const BuildOptions& boundary) : n(r.sites) {
    if (n < 1 || n > kDenseOracleMaxSites)
      throw DomainError("dense oracle: N must be in 1..12");
    if (boundary.periodic && !boundary.closing_coupling)
      throw DomainError("dense oracle: periodic chain needs a closing coupling");
    dim = 1U << n;
    diagonal.assign(dim, 0.0);
    for (std::uint32_t x = 0; x < dim; ++x) {
      double e = 0.0;
      for (int s = 0; s + 1 < n; ++s)
        e -= r.couplings[static_cast<std::size_t>(s)] * z_of(x, s) * z_of(x, s + 1);
      if (boundary.periodic) e -= *boundary.closing_coupling * z_of(x, n - 1) * z_of(x, 0);
      diagonal[x] = e;
    }
    three_local = r.three_local;
  }

  void apply(std::span<const double> g, const State& in, State& out) const {
    out.resize(dim);
    for (std::uint32_t x = 0; x < dim; ++x) {
      Complex acc = diagonal[x] * in[x];
      for (int s = 0; s < n; ++s) acc -= g[static_cast<std::size_t>(s)] * in[x ^ (1U << s)];
      for (std::size_t s = 0; s < three_local.size(); ++s) {
        const int site = static_cast<int>(s);
        acc -= three_local[s] * z_of(x, site) * z_of(x, site + 2) * in[x ^ (1U << (site + 1))];
      }
      out[x] = acc;
    }
  }

  Eigen::MatrixXd dense(std::span<const double> g) const {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
    for (std::uint32_t x = 0; x < dim; ++x) {
      h(x, x) = diagonal[x];
      for (int s = 0; s < n; ++s) h(x ^ (1U << s), x) -= g[static_cast<std::size_t>(s)];
      for (std::size_t s = 0; s < three_local.size(); ++s) {
        const int site = static_cast<int>(s);
        h(x ^ (1U << (site + 1)), x) -= three_local[s] * z_of(x, site) * z_of(x, site + 2);
      }
    }
    return h;
  }

  double expectation(std::span<const double> g, const State& psi) const {
    State h;
    apply(g, psi, h);
    Complex e = 0.0;
    for (std::uint32_t x = 0; x < dim; ++x) e += std::conj(psi[x]) * h[x];
    return e.real();
  }
};

}  // namespace

Eigen::MatrixXd dense_hamiltonian(const DisorderRealization& realization,
                                  std::span<const double> fields,
                                  const BuildOptions& boundary) {
  const SpinChain chain(realization, boundary);
  if (static_cast<int>(fields.size()) != chain.n)
    throw DomainError("dense_hamiltonian: need one field per site");
  return chain.dense(fields);
}

OracleResult dense_oracle(const DisorderRealization& realization, const ScheduleSpec& spec,
                          const OracleOptions& options) {
  namespace odeint = boost::numeric::odeint;
  validate(spec);
  if (spec.sites != realization.sites)
    throw DomainError("dense oracle: schedule and realization disagree on N");
  const SpinChain chain(realization, options.boundary);

  const std::vector<double> g0 = fields_at(spec, 0.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> initial(chain.dense(g0));
  State psi(chain.dim);
  for (std::uint32_t x = 0; x < chain.dim; ++x) psi[x] = initial.eigenvectors()(x, 0);

  OracleResult out;
  out.initial_energy = chain.expectation(g0, psi);

  std::vector<double> g(static_cast<std::size_t>(chain.n));
  auto rhs = [&](const State& in, State& dpsi, double t) {
    for (int s = 0; s < chain.n; ++s)
      g[static_cast<std::size_t>(s)] = detail::field_unchecked(spec, s + 1, t);
    chain.apply(g, in, dpsi);
    for (auto& v : dpsi) v *= Complex(0.0, -1.0);
  };
  odeint::integrate_adaptive(
      odeint::make_controlled<odeint::runge_kutta_dopri5<State>>(options.tolerance,
                                                                 options.tolerance),
      rhs, psi, 0.0, spec.total_time, std::min(options.max_step, spec.total_time));

  double norm = 0.0;
  for (const auto& v : psi) norm += std::norm(v);
  out.norm_drift = std::abs(std::sqrt(norm) - 1.0);

  const std::vector<double> gf = fields_at(spec, spec.total_time);
  out.final_energy = chain.expectation(gf, psi) / norm;
  out.ground_energy =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(chain.dense(gf), Eigen::EigenvaluesOnly)
          .eigenvalues()(0);

  auto zz = [&](int i, int j) {
    double acc = 0.0;
    for (std::uint32_t x = 0; x < chain.dim; ++x)
      acc += std::norm(psi[x]) * z_of(x, i) * z_of(x, j);
    return acc / norm;
  };
  for (int s = 0; s + 1 < chain.n; ++s) out.bond_correlators.push_back(zz(s, s + 1));
  if (options.boundary.periodic) out.bond_correlators.push_back(zz(chain.n - 1, 0));
  return out;
}

}  // namespace cfronts
