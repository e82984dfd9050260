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

#ifndef NVSIM_HAMILTONIAN_HPP_
#define NVSIM_HAMILTONIAN_HPP_

#include <array>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "nvsim/spin.hpp"
#include "nvsim/system.hpp"

namespace nvsim {

// Microwave control field. Frequencies in MHz, phases in radians.
struct DriveSpec {
  Eigen::Vector3d b1_tesla = Eigen::Vector3d::Zero();
  double frequency_mhz = 0.0;
  double phase = 0.0;
  double detuning_mhz = 0.0;
  double duration_scale = 1.0;

  double carrier_mhz() const { return frequency_mhz + detuning_mhz; }
  void validate() const;
};

// Classical RF signal acting on the electron.
struct SignalSpec {
  Eigen::Vector3d b2_tesla = Eigen::Vector3d::Zero();
  double frequency_mhz = 0.0;
  double phase = 0.0;

  void validate() const;
};

// All operators are in MHz on the composite space of `sys`.
Operator build_internal(const SpinSystem& sys);
Operator build_sensing_static(const SpinSystem& sys);
// build_internal plus build_sensing_static when a target spin is present.
Operator build_static(const SpinSystem& sys);

// gamma_e * (B . S) on the composite space.
Operator electron_field_coupling(const SpinSystem& sys, const Eigen::Vector3d& b);

double drive_envelope(const DriveSpec& spec, double t_us);
double signal_envelope(const SignalSpec& spec, double t_us);
Operator drive_hamiltonian(const SpinSystem& sys, const DriveSpec& spec, double t_us);
Operator signal_hamiltonian(const SpinSystem& sys, const SignalSpec& spec, double t_us);

// Drive along x with |gamma_e| B1 = rabi_mhz, resonant with `t`.
DriveSpec resonant_drive(const SpinSystem& sys, Transition t, double rabi_mhz);

enum class Nucleus { kAuto, kNitrogen, kTarget };

// Eigen-decomposition of a static Hamiltonian with every eigenstate labelled
// by its electron manifold and nuclear quantum numbers.
class StaticSpectrum {
 public:
  StaticSpectrum(const Operator& h, std::span<const int> dims);

  // Mean energy of the m_s manifold.
  double centroid(int ms) const;
  // Mean over spectator configurations of the level gap of `slot` inside the
  // m_s manifold. Spin-1 nuclei report the smaller adjacent gap.
  double nuclear_gap(int ms, int slot) const;
  std::span<const double> energies() const { return energies_; }
  int manifold_of(int state) const { return ms_[state]; }

 private:
  std::vector<int> dims_;
  std::vector<double> energies_;
  std::vector<int> ms_;
  std::vector<double> plus_share_;  // weight on m_s = +1 within the +-1 sector
  // Per state, per nuclear slot: basis index (0 = highest m) of best overlap.
  std::vector<std::vector<int>> nuclear_index_;
};

double transition_frequency(const SpinSystem& sys, Transition target);
double effective_larmor(const SpinSystem& sys, int ms, Nucleus which = Nucleus::kAuto);
double zero_field_larmor(const Eigen::Matrix3d& a);

}  // namespace nvsim

#endif  // NVSIM_HAMILTONIAN_HPP_
