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

#include "critical_fronts/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include <boost/numeric/odeint.hpp>

#include "critical_fronts/errors.hpp"

namespace cfronts {
namespace {

using simd::kBlockWidth;

std::uint32_t a_row(int site) { return static_cast<std::uint32_t>(2 * site); }
std::uint32_t b_row(int site) { return static_cast<std::uint32_t>(2 * site + 1); }

enum class LayerKind { kField, kBond, kCluster };

struct ConstantTable {
  LayerKind kind;
  double coef;
  std::vector<double> cos, sin;
};

struct Op {
  LayerKind kind;
  std::size_t table;  // field: offset into the chunk's field tables; else cache index
};

// Column-blocked copy of R: block k holds columns 8k .. 8k+7 of all 2N rows.
class BlockedMatrix {
 public:
  explicit BlockedMatrix(const Eigen::MatrixXd& r)
      : rows_(static_cast<std::size_t>(r.rows())),
        cols_(static_cast<std::size_t>(r.cols())),
        blocks_((cols_ + kBlockWidth - 1) / kBlockWidth),
        data_(blocks_ * rows_ * kBlockWidth, 0.0) {
    scatter(r);
  }

  void scatter(const Eigen::MatrixXd& r) {
    for (std::size_t b = 0; b < blocks_; ++b)
      for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < kBlockWidth; ++j) {
          const std::size_t c = b * kBlockWidth + j;
          block(b)[i * kBlockWidth + j] =
              c < cols_ ? r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) : 0.0;
        }
  }

  void gather(Eigen::MatrixXd& r) const {
    for (std::size_t b = 0; b < blocks_; ++b)
      for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < kBlockWidth; ++j) {
          const std::size_t c = b * kBlockWidth + j;
          if (c < cols_)
            r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
                block(b)[i * kBlockWidth + j];
        }
  }

  double* block(std::size_t b) { return data_.data() + b * rows_ * kBlockWidth; }
  const double* block(std::size_t b) const { return data_.data() + b * rows_ * kBlockWidth; }
  std::size_t blocks() const { return blocks_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

 private:
  std::size_t rows_, cols_, blocks_;
  std::vector<double> data_;
};

// Yoshida triple-jump weights; order 2 is a single Strang step.
std::vector<double> substep_weights(int order) {
  if (order == 2) return {1.0};
  if (order == 4) {
    const double cbrt2 = std::cbrt(2.0);
    const double w1 = 1.0 / (2.0 - cbrt2);
    return {w1, -cbrt2 * w1, w1};
  }
  throw DomainError("StepControl: order must be 2 or 4");
}

class SplittingPropagator {
 public:
  SplittingPropagator(const MajoranaGenerator& g, const StepControl& control)
      : gen_(g), control_(control), kernels_(control.kernels ? *control.kernels
                                                             : simd::active_kernels()) {
    const int n = g.modes;
    for (int s = 0; s < n; ++s) {
      field_first_.push_back(b_row(s));
      field_second_.push_back(a_row(s));
    }
    for (const auto& t : g.bonds) {
      bond_first_.push_back(b_row(t.b_site));
      bond_second_.push_back(a_row(t.a_site));
    }
    for (const auto& t : g.clusters) {
      cluster_first_.push_back(b_row(t.b_site));
      cluster_second_.push_back(a_row(t.a_site));
    }
    weights_.resize(static_cast<std::size_t>(n));
  }

  PropagationStats run(double t0, double t1, Eigen::MatrixXd& r) {
    PropagationStats stats;
    const double span = t1 - t0;
    if (!(span > 0.0)) return stats;
    const auto steps = static_cast<std::int64_t>(std::ceil(span / control_.max_step - 1e-12));
    dt_ = span / static_cast<double>(std::max<std::int64_t>(steps, 1));
    stats.steps = std::max<std::int64_t>(steps, 1);
    const std::vector<double> sub = substep_weights(control_.order);
    const std::int64_t chunk =
        control_.check_every_step ? 1 : std::max(1, control_.chunk_steps);

    BlockedMatrix m(r);
    for (std::int64_t k0 = 0; k0 < stats.steps; k0 += chunk) {
      ops_.clear();
      field_cos_.clear();
      field_sin_.clear();
      const std::int64_t k1 = std::min(stats.steps, k0 + chunk);
      for (std::int64_t k = k0; k < k1; ++k) {
        double tau = t0 + static_cast<double>(k) * dt_;
        for (double c : sub) {
          emit_constant(LayerKind::kBond, 0.5 * c);
          emit_constant(LayerKind::kCluster, 0.5 * c);
          emit_field(c, tau, tau + c * dt_);
          emit_constant(LayerKind::kCluster, 0.5 * c);
          emit_constant(LayerKind::kBond, 0.5 * c);
          tau += c * dt_;
        }
      }
      if (k1 == stats.steps) flush();
      apply(m);
      const double drift = control_.check_every_step ? full_drift(m, r) : norm_drift(m);
      stats.max_drift = std::max(stats.max_drift, drift);
      if (drift > control_.fail_above)
        throw IntegrationFailure(t0 + static_cast<double>(k1) * dt_, drift,
                                 "propagate: unitarity drift exceeded tolerance");
      if (drift > control_.reorthonormalize_above) {
        m.gather(r);
        reorthonormalize(r);
        m.scatter(r);
        ++stats.reorthonormalizations;
      }
    }
    m.gather(r);
    const double drift = orthogonality_drift(r);
    stats.max_drift = std::max(stats.max_drift, drift);
    if (drift > control_.fail_above)
      throw IntegrationFailure(t1, drift, "propagate: unitarity drift exceeded tolerance");
    return stats;
  }

 private:
  std::span<const std::uint32_t> first_of(LayerKind k) const {
    return k == LayerKind::kBond ? std::span<const std::uint32_t>(bond_first_)
                                 : std::span<const std::uint32_t>(cluster_first_);
  }
  std::span<const std::uint32_t> second_of(LayerKind k) const {
    return k == LayerKind::kBond ? std::span<const std::uint32_t>(bond_second_)
                                 : std::span<const std::uint32_t>(cluster_second_);
  }
  const std::vector<MajoranaTerm>& terms_of(LayerKind k) const {
    return k == LayerKind::kBond ? gen_.bonds : gen_.clusters;
  }

  void emit_constant(LayerKind kind, double coef) {
    if (terms_of(kind).empty()) return;
    if (pending_ && pending_->first == kind) {
      pending_->second += coef;
      return;
    }
    flush();
    pending_ = {kind, coef};
  }

  void emit_field(double coef, double ta, double tb) {
    flush();
    if (gen_.field_averages)
      gen_.field_averages(std::min(ta, tb), std::max(ta, tb), weights_);
    else
      gen_.field_weights(0.5 * (ta + tb), weights_);
    ops_.push_back({LayerKind::kField, field_cos_.size()});
    for (double w : weights_) {
      const double theta = w * coef * dt_;
      field_cos_.push_back(std::cos(theta));
      field_sin_.push_back(std::sin(theta));
    }
  }

  void flush() {
    if (!pending_) return;
    const auto [kind, coef] = *pending_;
    pending_.reset();
    auto it = std::find_if(tables_.begin(), tables_.end(), [&](const ConstantTable& t) {
      return t.kind == kind && t.coef == coef;
    });
    if (it == tables_.end()) {
      ConstantTable t{kind, coef, {}, {}};
      for (const auto& term : terms_of(kind)) {
        const double theta = term.weight * coef * dt_;
        t.cos.push_back(std::cos(theta));
        t.sin.push_back(std::sin(theta));
      }
      tables_.push_back(std::move(t));
      it = tables_.end() - 1;
    }
    ops_.push_back({kind, static_cast<std::size_t>(it - tables_.begin())});
  }

  void apply(BlockedMatrix& m) const {
    std::vector<simd::RotationLayer> layers;
    layers.reserve(ops_.size());
    for (const Op& op : ops_) {
      if (op.kind == LayerKind::kField) {
        layers.push_back({field_first_.data(), field_second_.data(),
                          field_cos_.data() + op.table, field_sin_.data() + op.table,
                          field_first_.size()});
      } else {
        const ConstantTable& t = tables_[op.table];
        layers.push_back({first_of(op.kind).data(), second_of(op.kind).data(),
                          t.cos.data(), t.sin.data(), t.cos.size()});
      }
    }
    for (std::size_t b = 0; b < m.blocks(); ++b) {
      double* block = m.block(b);
      for (const auto& layer : layers) kernels_.rotate_layer(block, layer);
    }
  }

  double norm_drift(const BlockedMatrix& m) const {
    double drift = 0.0;
    double norms[kBlockWidth];
    for (std::size_t b = 0; b < m.blocks(); ++b) {
      kernels_.column_norms(m.block(b), m.rows(), norms);
      for (std::size_t j = 0; j < kBlockWidth && b * kBlockWidth + j < m.cols(); ++j)
        drift = std::max(drift, std::abs(norms[j] - 1.0));
    }
    return drift;
  }

  static double full_drift(const BlockedMatrix& m, Eigen::MatrixXd& scratch) {
    m.gather(scratch);
    return orthogonality_drift(scratch);
  }

  const MajoranaGenerator& gen_;
  StepControl control_;
  const simd::KernelTable& kernels_;
  double dt_ = 0.0;
  std::vector<std::uint32_t> field_first_, field_second_;
  std::vector<std::uint32_t> bond_first_, bond_second_;
  std::vector<std::uint32_t> cluster_first_, cluster_second_;
  std::vector<double> weights_;
  std::vector<ConstantTable> tables_;
  std::vector<Op> ops_;
  std::vector<double> field_cos_, field_sin_;
  std::optional<std::pair<LayerKind, double>> pending_;
};

PropagationStats run_dopri5(const MajoranaGenerator& gen, double t0, double t1,
                            const StepControl& control, Eigen::MatrixXd& r) {
  namespace odeint = boost::numeric::odeint;
  using State = std::vector<double>;
  const Eigen::Index dim = r.rows();
  State x(r.data(), r.data() + r.size());
  auto rhs = [&](const State& in, State& out, double t) {
    Eigen::Map<const Eigen::MatrixXd> rm(in.data(), dim, dim);
    out.resize(in.size());
    Eigen::Map<Eigen::MatrixXd> dm(out.data(), dim, dim);
    dm.noalias() = gen.dense(t) * rm;
  };
  auto stepper = odeint::make_controlled<odeint::runge_kutta_dopri5<State>>(
      control.tolerance, control.tolerance);
  PropagationStats stats;
  double t = t0;
  double dt = std::min(control.max_step, t1 - t0);
  int rejected_in_row = 0;
  while (t1 - t > 1e-14 * std::max(1.0, std::abs(t1))) {
    dt = std::min(dt, t1 - t);
    if (stepper.try_step(rhs, x, t, dt) == odeint::fail) {
      if (++rejected_in_row > 200 || dt < 1e-14)
        throw IntegrationFailure(t, stats.max_drift, "propagate: step size underflow");
      continue;
    }
    rejected_in_row = 0;
    ++stats.steps;
    Eigen::Map<Eigen::MatrixXd> rm(x.data(), dim, dim);
    const double drift = orthogonality_drift(rm);
    stats.max_drift = std::max(stats.max_drift, drift);
    if (drift > control.fail_above)
      throw IntegrationFailure(t, drift, "propagate: unitarity drift exceeded tolerance");
    if (drift > control.reorthonormalize_above) {
      Eigen::MatrixXd fixed = rm;
      reorthonormalize(fixed);
      rm = fixed;
      ++stats.reorthonormalizations;
    }
    dt = std::min(dt, control.max_step);
  }
  r = Eigen::Map<Eigen::MatrixXd>(x.data(), dim, dim);
  return stats;
}

}  // namespace

Eigen::MatrixXd MajoranaGenerator::dense(double t) const {
  const Eigen::Index dim = 2 * modes;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  auto put = [&h](int b_site, int a_site, double w) {
    h(b_row(b_site), a_row(a_site)) += w;
    h(a_row(a_site), b_row(b_site)) -= w;
  };
  std::vector<double> w(static_cast<std::size_t>(modes));
  field_weights(t, w);
  for (int s = 0; s < modes; ++s) put(s, s, w[static_cast<std::size_t>(s)]);
  for (const auto& term : bonds) put(term.b_site, term.a_site, term.weight);
  for (const auto& term : clusters) put(term.b_site, term.a_site, term.weight);
  return h;
}

double orthogonality_drift(const Eigen::MatrixXd& rotation) {
  const Eigen::MatrixXd gram = rotation.transpose() * rotation;
  return (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

void reorthonormalize(Eigen::MatrixXd& rotation) {
  // Newton-Schulz iteration towards the polar factor; converges quadratically
  // from the near-orthogonal matrices this is called on.
  const Eigen::Index n = rotation.cols();
  for (int iter = 0; iter < 8; ++iter) {
    const Eigen::MatrixXd gram = rotation.transpose() * rotation;
    const double drift = (gram - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
    if (drift < 1e-15) return;
    if (drift > 0.5) {
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(rotation, Eigen::ComputeFullU | Eigen::ComputeFullV);
      rotation = svd.matrixU() * svd.matrixV().transpose();
      return;
    }
    rotation = 0.5 * rotation * (3.0 * Eigen::MatrixXd::Identity(n, n) - gram);
  }
}

PropagationStats propagate(const MajoranaGenerator& generator, double t0, double t1,
                           const StepControl& control, Eigen::MatrixXd& rotation) {
  if (rotation.rows() != 2 * generator.modes || rotation.cols() != 2 * generator.modes)
    throw DomainError("propagate: rotation must be 2N x 2N");
  if (!(control.max_step > 0.0)) throw DomainError("propagate: max_step must be positive");
  if (control.method == Integrator::kRungeKutta)
    return run_dopri5(generator, t0, t1, control, rotation);
  SplittingPropagator p(generator, control);
  return p.run(t0, t1, rotation);
}

}  // namespace cfronts
