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

#ifndef NVSIM_EVOLUTION_HPP_
#define NVSIM_EVOLUTION_HPP_

#include <functional>
#include <vector>

#include "nvsim/spin.hpp"

namespace nvsim {

enum class TimeDepMethod { kPiecewiseConstantMidpoint, kFourthOrderStepper };

struct CollapseOperator {
  Operator op;
  double rate = 0.0;  // 1/us
};

struct PropagationSettings {
  int samples_per_drive_period = 64;
  TimeDepMethod timedep_method = TimeDepMethod::kFourthOrderStepper;
  double tolerance = 1e-8;
  std::vector<CollapseOperator> collapse_operators;

  void validate() const;
};

// Time-dependent Hamiltonian in MHz, argument in us.
using HamiltonianFn = std::function<Operator(double)>;

// exp(-i 2 pi H dt) for Hermitian H.
Operator unitary_exponential(const Operator& h, double dt);

// One step of length `dt` starting at `t`.
Operator step_unitary(const HamiltonianFn& h, double t, double dt, TimeDepMethod method);

// Unitary from t0 to t1 on the absolute grid k*step, with partial steps at
// both ends.
Operator grid_unitary(const HamiltonianFn& h, double t0, double t1, double step,
                      TimeDepMethod method);

DensityMatrix propagate_static(const Operator& h, const DensityMatrix& rho, double dt);

// Step size is 1 / (max_frequency_mhz * samples_per_drive_period).
DensityMatrix propagate_timedep(const HamiltonianFn& h, const DensityMatrix& rho, double t0,
                                double t1, double max_frequency_mhz,
                                const PropagationSettings& settings);

// Re Tr[rho0 rhof^dagger].
double bright_state_probability(const DensityMatrix& rho0, const DensityMatrix& rhof);

// Column-stacked Liouvillian: d vec(rho)/dt = L vec(rho).
Operator liouvillian(const Operator& h, const std::vector<CollapseOperator>& collapse);
Eigen::VectorXcd vectorize(const Operator& rho);
Operator unvectorize(const Eigen::VectorXcd& v, int dim);

// exp(-i 2 pi H t) from a single eigendecomposition.
class StaticPropagator {
 public:
  explicit StaticPropagator(const Operator& h);
  Operator operator()(double dt) const;

 private:
  Operator vectors_;
  Eigen::VectorXd values_;
};

// Propagators of H(t) = H_s + sin(2 pi f t + phase) V. One period of prefix
// products is precomputed; any interval and phase is then assembled from
// cached factors and repeated squaring of the period propagator.
class PeriodicPropagator {
 public:
  PeriodicPropagator(Operator h_static, Operator coupling, double frequency_mhz,
                     int samples_per_period, TimeDepMethod method);

  Operator evolve(double t0, double t1, double phase) const;
  double step() const { return step_; }
  double frequency() const { return frequency_; }

 private:
  Operator hamiltonian(double t) const;
  Operator step_between(double a, double b) const;
  Operator period_power(long long q) const;

  Operator h_static_;
  Operator coupling_;
  double frequency_;
  double period_;
  double step_;
  int samples_;
  TimeDepMethod method_;
  std::vector<Operator> prefix_;   // U(j h <- 0), j = 0..samples
  std::vector<Operator> squares_;  // U_T^(2^k)
};

}  // namespace nvsim

#endif  // NVSIM_EVOLUTION_HPP_
