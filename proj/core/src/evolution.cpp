// Copyright 2026 The nvsim Authors
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

#include "nvsim/evolution.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "nvsim/errors.hpp"

namespace nvsim {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kGridEps = 1e-9;
const double kGaussOffset = std::sqrt(3.0) / 6.0;

// Hermitian generator K with U = exp(-i 2 pi K) for one step.
Operator step_generator(const HamiltonianFn& h, double t, double dt, TimeDepMethod method) {
  if (method == TimeDepMethod::kPiecewiseConstantMidpoint) return dt * h(t + 0.5 * dt);
  const Operator h1 = h(t + (0.5 - kGaussOffset) * dt);
  const Operator h2 = h(t + (0.5 + kGaussOffset) * dt);
  const Operator comm = h2 * h1 - h1 * h2;
  return (0.5 * dt) * (h1 + h2) +
         Complex(0.0, -kTwoPi * std::sqrt(3.0) / 12.0 * dt * dt) * comm;
}

Operator hermitian_exp(const Operator& k) {
  Eigen::SelfAdjointEigenSolver<Operator> es(0.5 * (k + k.adjoint()));
  const Eigen::VectorXd& w = es.eigenvalues();
  Eigen::VectorXcd phases(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) phases(i) = std::polar(1.0, -kTwoPi * w(i));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

template <typename StepFn>
Operator accumulate_on_grid(int dim, double t0, double t1, double step, StepFn&& one_step) {
  Operator u = Operator::Identity(dim, dim);
  if (t1 <= t0) return u;
  const double ia = std::ceil(t0 / step - kGridEps);
  const double ib = std::floor(t1 / step + kGridEps);
  if (ia > ib) return one_step(t0, t1 - t0);
  const double ga = ia * step;
  const double gb = ib * step;
  if (ga - t0 > kGridEps * step) u = one_step(t0, ga - t0);
  const long long n = static_cast<long long>(ib - ia);
  for (long long k = 0; k < n; ++k) {
    u = one_step((ia + static_cast<double>(k)) * step, step) * u;
  }
  if (t1 - gb > kGridEps * step) u = one_step(gb, t1 - gb) * u;
  return u;
}

void check_trace(const Operator& rho) {
  const double drift = std::abs(rho.trace() - Complex(1.0, 0.0));
  if (drift > 1e-6) {
    throw PropagationError("trace drift " + std::to_string(drift) + " exceeds 1e-6");
  }
}

}  // namespace

void PropagationSettings::validate() const {
  if (samples_per_drive_period < 16) {
    throw ConfigError("samples_per_drive_period must be >= 16");
  }
  if (!(tolerance > 0.0 && tolerance <= 1e-4)) throw ConfigError("tolerance must be in (0, 1e-4]");
  for (const auto& c : collapse_operators) {
    if (c.op.rows() != c.op.cols()) throw DimensionError("collapse operator must be square");
    if (!(c.rate >= 0.0)) throw ConfigError("collapse rate must be >= 0");
  }
}

Operator unitary_exponential(const Operator& h, double dt) {
  if (!is_hermitian(h, 1e-9 * (1.0 + h.cwiseAbs().maxCoeff()))) {
    throw PropagationError("Hamiltonian is not Hermitian");
  }
  return hermitian_exp(h * dt);
}

Operator step_unitary(const HamiltonianFn& h, double t, double dt, TimeDepMethod method) {
  return hermitian_exp(step_generator(h, t, dt, method));
}

Operator grid_unitary(const HamiltonianFn& h, double t0, double t1, double step,
                      TimeDepMethod method) {
  const int dim = static_cast<int>(h(t0).rows());
  return accumulate_on_grid(dim, t0, t1, step, [&](double t, double dt) {
    return step_unitary(h, t, dt, method);
  });
}

DensityMatrix propagate_static(const Operator& h, const DensityMatrix& rho, double dt) {
  if (dt < 0.0) throw PropagationError("negative duration");
  if (h.rows() != rho.dim()) throw DimensionError("Hamiltonian and state dimensions differ");
  if (dt == 0.0) return rho;
  const Operator u = unitary_exponential(h, dt);
  return DensityMatrix::trusted(u * rho.matrix() * u.adjoint());
}

Eigen::VectorXcd vectorize(const Operator& rho) {
  return Eigen::Map<const Eigen::VectorXcd>(rho.data(), rho.size());
}

Operator unvectorize(const Eigen::VectorXcd& v, int dim) {
  return Eigen::Map<const Operator>(v.data(), dim, dim);
}

Operator liouvillian(const Operator& h, const std::vector<CollapseOperator>& collapse) {
  const Eigen::Index n = h.rows();
  const Operator id = Operator::Identity(n, n);
  auto kron = [](const Operator& a, const Operator& b) {
    Operator out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      for (Eigen::Index j = 0; j < a.cols(); ++j) {
        out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
      }
    }
    return out;
  };
  Operator l = Complex(0.0, -kTwoPi) * (kron(id, h) - kron(h.transpose(), id));
  for (const auto& c : collapse) {
    const Operator ldl = c.op.adjoint() * c.op;
    l += c.rate * (kron(c.op.conjugate(), c.op) - 0.5 * kron(id, ldl) -
                   0.5 * kron(ldl.transpose(), id));
  }
  return l;
}

DensityMatrix propagate_timedep(const HamiltonianFn& h, const DensityMatrix& rho, double t0,
                                double t1, double max_frequency_mhz,
                                const PropagationSettings& settings) {
  settings.validate();
  if (t1 < t0) throw PropagationError("t1 precedes t0");
  if (!(max_frequency_mhz > 0.0)) throw PropagationError("maximum frequency must be > 0");
  const double step = 1.0 / (max_frequency_mhz * settings.samples_per_drive_period);
  const int dim = rho.dim();
  Operator out;
  if (settings.collapse_operators.empty()) {
    const Operator u = grid_unitary(h, t0, t1, step, settings.timedep_method);
    out = u * rho.matrix() * u.adjoint();
  } else {
    const Operator s = accumulate_on_grid(dim * dim, t0, t1, step, [&](double t, double dt) {
      const Operator k = step_generator(h, t, dt, settings.timedep_method);
      const Operator l = liouvillian(k / dt, settings.collapse_operators);
      return Operator((l * dt).exp());
    });
    out = unvectorize(s * vectorize(rho.matrix()), dim);
  }
  check_trace(out);
  return DensityMatrix::trusted(std::move(out));
}

double bright_state_probability(const DensityMatrix& rho0, const DensityMatrix& rhof) {
  if (rho0.dim() != rhof.dim()) throw DimensionError("state dimensions differ");
  return (rho0.matrix() * rhof.matrix().adjoint()).trace().real();
}

StaticPropagator::StaticPropagator(const Operator& h) {
  if (!is_hermitian(h, 1e-9 * (1.0 + h.cwiseAbs().maxCoeff()))) {
    throw PropagationError("Hamiltonian is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<Operator> es(0.5 * (h + h.adjoint()));
  vectors_ = es.eigenvectors();
  values_ = es.eigenvalues();
}

Operator StaticPropagator::operator()(double dt) const {
  Eigen::VectorXcd phases(values_.size());
  for (Eigen::Index i = 0; i < values_.size(); ++i) {
    phases(i) = std::polar(1.0, -kTwoPi * values_(i) * dt);
  }
  return vectors_ * phases.asDiagonal() * vectors_.adjoint();
}

PeriodicPropagator::PeriodicPropagator(Operator h_static, Operator coupling,
                                       double frequency_mhz, int samples_per_period,
                                       TimeDepMethod method)
    : h_static_(std::move(h_static)),
      coupling_(std::move(coupling)),
      frequency_(frequency_mhz),
      period_(1.0 / frequency_mhz),
      step_(1.0 / (frequency_mhz * samples_per_period)),
      samples_(samples_per_period),
      method_(method) {
  if (!(frequency_mhz > 0.0)) throw PropagationError("oscillation frequency must be > 0");
  if (samples_per_period < 16) throw ConfigError("samples_per_drive_period must be >= 16");
  const Eigen::Index n = h_static_.rows();
  prefix_.reserve(samples_ + 1);
  prefix_.push_back(Operator::Identity(n, n));
  for (int j = 0; j < samples_; ++j) {
    prefix_.push_back(step_between(j * step_, (j + 1) * step_) * prefix_.back());
  }
  squares_.push_back(prefix_.back());
  for (int k = 1; k < 48; ++k) squares_.push_back(squares_.back() * squares_.back());
}

Operator PeriodicPropagator::hamiltonian(double t) const {
  return h_static_ + std::sin(kTwoPi * frequency_ * t) * coupling_;
}

Operator PeriodicPropagator::step_between(double a, double b) const {
  const HamiltonianFn h = [this](double t) { return hamiltonian(t); };
  return step_unitary(h, a, b - a, method_);
}

Operator PeriodicPropagator::period_power(long long q) const {
  const Eigen::Index n = h_static_.rows();
  Operator out = Operator::Identity(n, n);
  for (std::size_t k = 0; q > 0; ++k, q >>= 1) {
    if (k >= squares_.size()) throw PropagationError("interval exceeds cached period powers");
    if (q & 1) out = squares_[k] * out;
  }
  return out;
}

Operator PeriodicPropagator::evolve(double t0, double t1, double phase) const {
  const Eigen::Index n = h_static_.rows();
  if (t1 < t0) throw PropagationError("t1 precedes t0");
  if (t1 == t0) return Operator::Identity(n, n);
  // Phase as a time shift, then fold into the first period.
  double a = t0 + phase / (kTwoPi * frequency_);
  double b = t1 + phase / (kTwoPi * frequency_);
  const double shift = std::floor(a / period_) * period_;
  a -= shift;
  b -= shift;
  const double ia = std::ceil(a / step_ - kGridEps);
  const double ib = std::floor(b / step_ + kGridEps);
  if (ia > ib) return step_between(a, b);
  Operator u = Operator::Identity(n, n);
  if (ia * step_ - a > kGridEps * step_) u = step_between(a, ia * step_);
  const long long ja = static_cast<long long>(ia);
  const long long kb = static_cast<long long>(ib);
  const long long qa = ja / samples_, ra = ja % samples_;
  const long long qb = kb / samples_, rb = kb % samples_;
  u = prefix_[rb] * period_power(qb - qa) * prefix_[ra].adjoint() * u;
  if (b - ib * step_ > kGridEps * step_) u = step_between(ib * step_, b) * u;
  return u;
}

}  // namespace nvsim
