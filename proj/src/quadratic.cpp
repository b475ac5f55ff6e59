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

#include "critical_fronts/quadratic.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>

#include "critical_fronts/errors.hpp"

namespace cfronts {
namespace {

// Adds the image of -c Z_i (...) Z_j with i < j: A_ij = A_ji -= c, B_ij -= c,
// B_ji += c. Subtraction keeps +0.0 for c == 0.
void add_zz_term(QuadraticForm& f, int i, int j, double c) {
  f.hopping(i, j) -= c;
  f.hopping(j, i) -= c;
  f.pairing(i, j) -= c;
  f.pairing(j, i) += c;
}

}  // namespace

QuadraticForm build_quadratic(const DisorderRealization& realization,
                              std::span<const double> fields,
                              const BuildOptions& options) {
  const int n = realization.sites;
  if (static_cast<int>(fields.size()) != n)
    throw DomainError("build_quadratic: need one field per site");
  if (realization.couplings.size() != static_cast<std::size_t>(n - 1))
    throw DomainError("build_quadratic: need N-1 couplings");
  QuadraticForm f;
  f.modes = n;
  f.model = realization.has_three_local() ? Model::kClusterIsing : Model::kIsing;
  f.periodic = options.periodic;
  f.hopping = Eigen::MatrixXd::Zero(n, n);
  f.pairing = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) f.hopping(i, i) = 2.0 * fields[static_cast<std::size_t>(i)];
  for (int i = 0; i + 1 < n; ++i)
    add_zz_term(f, i, i + 1, realization.couplings[static_cast<std::size_t>(i)]);
  if (realization.has_three_local()) {
    if (realization.three_local.size() != static_cast<std::size_t>(n - 2))
      throw DomainError("build_quadratic: need N-2 three-local couplings");
    for (int i = 0; i + 2 < n; ++i)
      add_zz_term(f, i, i + 2, realization.three_local[static_cast<std::size_t>(i)]);
  }
  if (options.periodic) {
    if (f.model != Model::kIsing)
      throw DomainError("build_quadratic: periodic chains support the Ising model only");
    if (!options.closing_coupling)
      throw DomainError("build_quadratic: periodic chain needs a closing coupling");
    if (n < 3) throw DomainError("build_quadratic: periodic chain needs N >= 3");
    // Even sector: Z_N Z_1 = -(i b_N a_1), i.e. a ZZ term with flipped sign.
    const double j = *options.closing_coupling;
    f.hopping(n - 1, 0) += j;
    f.hopping(0, n - 1) += j;
    f.pairing(n - 1, 0) += j;
    f.pairing(0, n - 1) -= j;
  }
  return f;
}

QuadraticForm field_perturbation(std::span<const double> field_derivative,
                                 Model model) {
  const int n = static_cast<int>(field_derivative.size());
  QuadraticForm f;
  f.modes = n;
  f.model = model;
  f.hopping = Eigen::MatrixXd::Zero(n, n);
  f.pairing = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) f.hopping(i, i) = 2.0 * field_derivative[static_cast<std::size_t>(i)];
  return f;
}

void check_form(const QuadraticForm& form) {
  const auto& a = form.hopping;
  const auto& b = form.pairing;
  if (a.rows() != form.modes || a.cols() != form.modes || b.rows() != form.modes ||
      b.cols() != form.modes)
    throw InvariantViolation("QuadraticForm: block shapes do not match N");
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw InvariantViolation("QuadraticForm: A is not symmetric");
  if ((b + b.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw InvariantViolation("QuadraticForm: B is not antisymmetric");
}

SpectrumResult diagonalize(const QuadraticForm& form) {
  check_form(form);
  const int n = form.modes;
  const Eigen::MatrixXd w = form.coupling();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(w, Eigen::ComputeFullU | Eigen::ComputeFullV);
  // Singular values come out descending; reverse for ascending order.
  SpectrumResult r;
  r.energies.resize(n);
  r.left.resize(n, n);
  r.right.resize(n, n);
  for (int m = 0; m < n; ++m) {
    r.energies(m) = svd.singularValues()(n - 1 - m);
    r.left.col(m) = svd.matrixU().col(n - 1 - m);
    r.right.col(m) = svd.matrixV().col(n - 1 - m);
  }
  r.ground_energy = -0.5 * r.energies.sum();
  const double det = r.left.determinant() * r.right.determinant();
  r.vacuum_parity = det >= 0.0 ? 1 : -1;
  return r;
}

Eigen::MatrixXd vacuum_correlations(const SpectrumResult& spectrum) {
  return -spectrum.left * spectrum.right.transpose();
}

double energy_of(const QuadraticForm& form, const Eigen::MatrixXd& correlations) {
  return 0.5 * form.coupling().cwiseProduct(correlations).sum();
}

std::optional<RelevantGap> relevant_gap_and_omega(const SpectrumResult& spectrum,
                                                  const QuadraticForm& derivative,
                                                  double threshold) {
  check_form(derivative);
  const int n = static_cast<int>(spectrum.energies.size());
  if (derivative.modes != n)
    throw DomainError("relevant_gap_and_omega: derivative has the wrong size");
  const Eigen::MatrixXd x =
      spectrum.left.transpose() * derivative.coupling() * spectrum.right;
  // Scan pairs in ascending delta, (a, b) lexicographic on ties.
  struct Candidate {
    double delta;
    int a, b;
  };
  std::vector<Candidate> pairs;
  pairs.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      pairs.push_back({spectrum.energies(a) + spectrum.energies(b), a, b});
  std::sort(pairs.begin(), pairs.end(), [](const Candidate& l, const Candidate& r) {
    if (l.delta != r.delta) return l.delta < r.delta;
    if (l.a != r.a) return l.a < r.a;
    return l.b < r.b;
  });
  for (const Candidate& c : pairs) {
    if (!(c.delta > 0.0)) continue;
    const double omega = 0.5 * std::abs(x(c.a, c.b) - x(c.b, c.a));
    if (omega / c.delta >= threshold) return RelevantGap{c.delta, omega, c.a, c.b};
  }
  return std::nullopt;
}

std::optional<RelevantGap> relevant_gap_and_omega(const QuadraticForm& form,
                                                  const QuadraticForm& derivative,
                                                  double threshold) {
  if (form.modes != derivative.modes)
    throw DomainError("relevant_gap_and_omega: size mismatch");
  return relevant_gap_and_omega(diagonalize(form), derivative, threshold);
}

void write_gap_csv_header(std::ostream& out) {
  out << "seed,alpha,front_pos,delta,omega,time\n";
}

void write_gap_csv_row(std::ostream& out, const GapSample& s) {
  std::ostringstream line;
  line << std::setprecision(17) << s.seed << ',' << s.alpha << ',' << s.front_pos
       << ',' << s.delta << ',' << s.omega << ',' << s.time << '\n';
  out << line.str();
}

std::vector<GapSample> read_gap_csv(std::istream& in) {
  std::vector<GapSample> out;
  std::string line;
  if (!std::getline(in, line)) return out;
  if (line.rfind("seed,alpha,front_pos,delta,omega,time", 0) != 0)
    throw DomainError("gap csv: unexpected header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    GapSample s;
    char comma;
    row >> s.seed >> comma >> s.alpha >> comma >> s.front_pos >> comma >> s.delta >>
        comma >> s.omega >> comma >> s.time;
    if (!row) throw DomainError("gap csv: malformed row: " + line);
    out.push_back(s);
  }
  return out;
}

}  // namespace cfronts
