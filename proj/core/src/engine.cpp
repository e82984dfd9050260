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

#include "nvsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "nvsim/errors.hpp"

namespace nvsim {
namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

Engine::Engine(SpinSystem system, DriveSpec drive, std::optional<SignalSpec> signal,
               PropagationSettings settings)
    : system_(std::move(system)),
      drive_(std::move(drive)),
      signal_(std::move(signal)),
      settings_(std::move(settings)),
      h0_(build_static(system_)),
      drive_coupling_(electron_field_coupling(system_, drive_.b1_tesla)),
      rho0_(initial_state(system_)) {
  drive_.validate();
  settings_.validate();
  for (const auto& c : settings_.collapse_operators) {
    if (c.op.rows() != h0_.rows()) throw DimensionError("collapse operator dimension mismatch");
  }
  const int samples = settings_.samples_per_drive_period;
  const TimeDepMethod method = settings_.timedep_method;
  if (signal_) {
    signal_->validate();
    signal_coupling_ = electron_field_coupling(system_, signal_->b2_tesla);
    free_signal_ = std::make_unique<PeriodicPropagator>(h0_, signal_coupling_,
                                                        signal_->frequency_mhz, samples, method);
  } else {
    free_ = std::make_unique<StaticPropagator>(h0_);
    if (drive_.carrier_mhz() > 0.0) {
      pulse_ = std::make_unique<PeriodicPropagator>(h0_, drive_coupling_, drive_.carrier_mhz(),
                                                    samples, method);
    } else {
      // Zero carrier: sin(phase) is constant over the pulse.
      pulse_static_ = std::make_unique<StaticPropagator>(h0_);
    }
  }
}

Operator Engine::hamiltonian(double t, double drive_phase, bool drive_on) const {
  Operator h = h0_;
  if (drive_on) h += std::sin(kTwoPi * drive_.carrier_mhz() * t + drive_phase) * drive_coupling_;
  if (signal_) h += signal_envelope(*signal_, t) * signal_coupling_;
  return h;
}

Operator Engine::free_unitary(double t0, double dt) const {
  if (free_signal_) return free_signal_->evolve(t0, t0 + dt, signal_->phase);
  return (*free_)(dt);
}

Operator Engine::pulse_unitary(double t0, double dt, double phase) const {
  if (pulse_) return pulse_->evolve(t0, t0 + dt, phase);
  const double max_f = std::max(drive_.carrier_mhz(), signal_ ? signal_->frequency_mhz : 0.0);
  if (!(max_f > 0.0)) {
    return StaticPropagator(h0_ + std::sin(phase) * drive_coupling_)(dt);
  }
  const double step = 1.0 / (max_f * settings_.samples_per_drive_period);
  const HamiltonianFn h = [this, phase](double t) { return hamiltonian(t, phase, true); };
  return grid_unitary(h, t0, t0 + dt, step, settings_.timedep_method);
}

Operator Engine::segment_superoperator(const Segment& s, double t0) const {
  const bool drive_on = s.kind == SegmentKind::kPulse;
  const double phase = drive_.phase + s.phase;
  if (!drive_on && !signal_) {
    const Operator l = liouvillian(h0_, settings_.collapse_operators);
    return (l * s.duration_us).exp();
  }
  double max_f = signal_ ? signal_->frequency_mhz : 0.0;
  if (drive_on) max_f = std::max(max_f, drive_.carrier_mhz());
  const double step = 1.0 / (max_f * settings_.samples_per_drive_period);
  const int n2 = static_cast<int>(h0_.rows() * h0_.rows());
  Operator total = Operator::Identity(n2, n2);
  const double t1 = t0 + s.duration_us;
  for (double t = t0; t < t1 - 1e-12 * step;) {
    const double next = std::min(t1, (std::floor(t / step + 1e-9) + 1.0) * step);
    const double dt = next - t;
    const HamiltonianFn h = [&](double x) { return hamiltonian(x, phase, drive_on); };
    const double g = std::sqrt(3.0) / 6.0;
    Operator k;
    if (settings_.timedep_method == TimeDepMethod::kPiecewiseConstantMidpoint) {
      k = h(t + 0.5 * dt);
    } else {
      const Operator h1 = h(t + (0.5 - g) * dt), h2 = h(t + (0.5 + g) * dt);
      k = 0.5 * (h1 + h2) +
          Complex(0.0, -kTwoPi * std::sqrt(3.0) / 12.0 * dt) * (h2 * h1 - h1 * h2);
    }
    const Operator l = liouvillian(k, settings_.collapse_operators);
    total = Operator((l * dt).exp()) * total;
    t = next;
  }
  return total;
}

Operator Engine::unitary(const SequenceTimeline& tl) const {
  const Eigen::Index n = h0_.rows();
  Operator u = Operator::Identity(n, n);
  double t = 0.0;
  for (const auto& s : tl.segments) {
    if (s.drive_ref != 0) throw ConfigError("unknown drive reference");
    if (s.duration_us <= 0.0) continue;
    if (s.kind == SegmentKind::kFree) {
      u = free_unitary(t, s.duration_us) * u;
    } else {
      u = pulse_unitary(t, s.duration_us, drive_.phase + s.phase) * u;
    }
    t += s.duration_us;
  }
  return u;
}

DensityMatrix Engine::final_state(const SequenceTimeline& tl) const {
  const Operator& rho = rho0_.matrix();
  Operator out;
  if (settings_.collapse_operators.empty()) {
    const Operator u = unitary(tl);
    out = u * rho * u.adjoint();
  } else {
    const int n = static_cast<int>(rho.rows());
    Eigen::VectorXcd v = vectorize(rho);
    double t = 0.0;
    for (const auto& s : tl.segments) {
      if (s.duration_us <= 0.0) continue;
      v = segment_superoperator(s, t) * v;
      t += s.duration_us;
    }
    out = unvectorize(v, n);
  }
  const double drift = std::abs(out.trace() - Complex(1.0, 0.0));
  if (drift > 1e-6) throw PropagationError("trace drift exceeds 1e-6");
  return DensityMatrix::trusted(std::move(out));
}

double Engine::probability(const SequenceTimeline& tl) const {
  if (settings_.collapse_operators.empty()) {
    const Operator u = unitary(tl);
    const Operator& rho = rho0_.matrix();
    return (rho * u * rho * u.adjoint()).trace().real();
  }
  return bright_state_probability(rho0_, final_state(tl));
}

double estimated_t_pi_us(const SpinSystem& sys, const DriveSpec& drive) {
  const double b_perp = std::hypot(drive.b1_tesla.x(), drive.b1_tesla.y());
  const double rabi = std::abs(sys.constants.gamma_e) * b_perp / std::sqrt(2.0);
  if (!(rabi > 0.0)) throw CalibrationError("drive has no transverse component");
  return 1.0 / (2.0 * rabi);
}

double calibrate_pi(const SpinSystem& sys, const DriveSpec& drive,
                    const PropagationSettings& settings) {
  const double t_est = estimated_t_pi_us(sys, drive);
  const Engine engine(sys, drive, std::nullopt, settings);
  const double step = t_est / 40.0;
  const int n = static_cast<int>(std::ceil(2.5 * t_est / step));
  std::vector<double> p(n + 1);
  for (int i = 0; i <= n; ++i) p[i] = engine.probability(rabi_timeline(i * step, drive));
  constexpr int kWindow = 5;
  for (int i = 1; i < n; ++i) {
    if (p[i] > 0.5) continue;
    bool is_min = true;
    for (int j = std::max(0, i - kWindow); j <= std::min(n, i + kWindow); ++j) {
      if (p[j] < p[i]) is_min = false;
    }
    if (!is_min || i + kWindow > n) continue;
    const double a = p[i - 1], b = p[i], c = p[i + 1];
    const double denom = a - 2.0 * b + c;
    const double shift = denom > 0.0 ? 0.5 * (a - c) / denom : 0.0;
    return (i + std::clamp(shift, -0.5, 0.5)) * step * 1e3;
  }
  throw CalibrationError("no Rabi minimum within 2.5 estimated pi durations");
}

}  // namespace nvsim
