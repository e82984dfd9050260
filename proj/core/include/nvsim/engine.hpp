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

#ifndef NVSIM_ENGINE_HPP_
#define NVSIM_ENGINE_HPP_

#include <memory>
#include <optional>

#include "nvsim/evolution.hpp"
#include "nvsim/hamiltonian.hpp"
#include "nvsim/sequences.hpp"
#include "nvsim/system.hpp"

namespace nvsim {

// Runs timelines for one (system, drive, signal) configuration. All caches
// are built at construction, so const members are safe to call concurrently.
class Engine {
 public:
  Engine(SpinSystem system, DriveSpec drive, std::optional<SignalSpec> signal = std::nullopt,
         PropagationSettings settings = {});

  // Propagator of the whole timeline (unitary dynamics only).
  Operator unitary(const SequenceTimeline& tl) const;
  DensityMatrix final_state(const SequenceTimeline& tl) const;
  double probability(const SequenceTimeline& tl) const;

  const SpinSystem& system() const { return system_; }
  const DriveSpec& drive() const { return drive_; }
  const std::optional<SignalSpec>& signal() const { return signal_; }
  const PropagationSettings& settings() const { return settings_; }
  const DensityMatrix& initial() const { return rho0_; }
  const Operator& static_hamiltonian() const { return h0_; }

 private:
  Operator free_unitary(double t0, double dt) const;
  Operator pulse_unitary(double t0, double dt, double phase) const;
  Operator segment_superoperator(const Segment& s, double t0) const;
  Operator hamiltonian(double t, double drive_phase, bool drive_on) const;

  SpinSystem system_;
  DriveSpec drive_;
  std::optional<SignalSpec> signal_;
  PropagationSettings settings_;
  Operator h0_;
  Operator drive_coupling_;
  Operator signal_coupling_;
  DensityMatrix rho0_;
  std::unique_ptr<StaticPropagator> free_;
  std::unique_ptr<PeriodicPropagator> free_signal_;
  std::unique_ptr<PeriodicPropagator> pulse_;
  std::unique_ptr<StaticPropagator> pulse_static_;
};

// Rabi estimate of t_pi in us from the transverse drive amplitude.
double estimated_t_pi_us(const SpinSystem& sys, const DriveSpec& drive);

// First minimum of the simulated Rabi trace, refined by a parabola. Returns ns.
double calibrate_pi(const SpinSystem& sys, const DriveSpec& drive,
                    const PropagationSettings& settings = {});

}  // namespace nvsim

#endif  // NVSIM_ENGINE_HPP_
